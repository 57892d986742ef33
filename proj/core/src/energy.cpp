#include "grownet/energy.hpp"

#include <algorithm>

#include "grownet/error.hpp"

namespace grownet {

std::int64_t split_cost(const Network& net, NeuronRef ref) {
    net.check_ref(ref);
    const std::size_t k = std::size_t(ref.layer);
    const std::size_t fan_in = net.fan_in(k);
    const std::size_t fan_out = (k + 1 < net.hidden.size()) ? net.hidden[k + 1].units.size()
                                                            : net.n_outputs();
    return std::int64_t(fan_in + 1) + std::int64_t(fan_out);
}

namespace {

void check_items(const std::vector<CostedIndex>& items, std::int64_t budget) {
    if (budget < 0) throw Error("selection: budget must be >= 0");
    for (const CostedIndex& it : items)
        if (it.cost < 1) throw Error("selection: costs must be >= 1");
}

} // namespace

SelectionResult select_fractional(const std::vector<CostedIndex>& items, std::int64_t budget) {
    check_items(items, budget);

    SelectionResult res;
    for (const CostedIndex& it : items) res.beta[it.neuron] = 0.0;

    std::vector<const CostedIndex*> order;
    for (const CostedIndex& it : items)
        if (it.lambda_min < 0.0) order.push_back(&it);
    std::sort(order.begin(), order.end(), [](const CostedIndex* a, const CostedIndex* b) {
        const double ra = a->lambda_min / double(a->cost);
        const double rb = b->lambda_min / double(b->cost);
        if (ra != rb) return ra < rb;
        return a->neuron < b->neuron;
    });

    std::int64_t remaining = budget;
    for (const CostedIndex* it : order) {
        if (remaining <= 0) break;
        if (it->cost <= remaining) {
            res.beta[it->neuron] = 1.0;
            remaining -= it->cost;
        } else {
            // First item that does not fit takes the fractional remainder;
            // everything after it stays at zero.
            res.beta[it->neuron] = double(remaining) / double(it->cost);
            remaining = 0;
            break;
        }
    }

    for (const CostedIndex* it : order) {
        const double beta = res.beta[it->neuron];
        if (beta <= 0.9) continue;
        // A fractional item is kept whole only if its full cost still fits.
        if (beta < 1.0 && res.spent + it->cost > budget) continue;
        res.chosen.push_back(it->neuron);
        res.objective += it->lambda_min;
        res.spent += it->cost;
    }
    std::sort(res.chosen.begin(), res.chosen.end());
    return res;
}

SelectionResult select_exact(const std::vector<CostedIndex>& items, std::int64_t budget) {
    check_items(items, budget);

    std::vector<const CostedIndex*> cand;
    std::int64_t total_cost = 0;
    for (const CostedIndex& it : items)
        if (it.lambda_min < 0.0) {
            cand.push_back(&it);
            total_cost += it.cost;
        }
    const std::int64_t cap = std::min(budget, total_cost);

    const std::size_t n = cand.size();
    const std::size_t cells = (n + 1) * std::size_t(cap + 1);
    if (cells > 10'000'000) throw Error("select_exact: DP table would need " +
                                        std::to_string(cells) + " cells (limit 1e7)");

    SelectionResult res;
    for (const CostedIndex& it : items) res.beta[it.neuron] = 0.0;
    if (n == 0 || cap == 0) return res;

    // best[i][w]: minimal sum of lambda using the first i items within cost w
    const std::size_t width = std::size_t(cap) + 1;
    std::vector<double> best((n + 1) * width, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const std::int64_t c = cand[i - 1]->cost;
        const double lam = cand[i - 1]->lambda_min;
        for (std::size_t w = 0; w < width; ++w) {
            double v = best[(i - 1) * width + w];
            if (std::int64_t(w) >= c) {
                const double take = best[(i - 1) * width + (w - std::size_t(c))] + lam;
                if (take < v) v = take;
            }
            best[i * width + w] = v;
        }
    }

    std::size_t w = width - 1;
    for (std::size_t i = n; i > 0; --i) {
        if (best[i * width + w] != best[(i - 1) * width + w]) {
            res.beta[cand[i - 1]->neuron] = 1.0;
            res.chosen.push_back(cand[i - 1]->neuron);
            res.objective += cand[i - 1]->lambda_min;
            res.spent += cand[i - 1]->cost;
            w -= std::size_t(cand[i - 1]->cost);
        }
    }
    std::sort(res.chosen.begin(), res.chosen.end());
    return res;
}

} // namespace grownet
