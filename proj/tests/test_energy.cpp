#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "grownet/energy.hpp"
#include "grownet/error.hpp"
#include "test_util.hpp"

using namespace grownet;

namespace {

std::vector<CostedIndex> random_items(Rng& rng, std::size_t n, double pos_fraction = 0.25) {
    std::vector<CostedIndex> items;
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = rng.uniform01() < pos_fraction ? rng.uniform(0.0, 1.0)
                                                             : rng.uniform(-3.0, 0.0);
        items.push_back({NeuronRef{0, int(i)}, lambda, 1 + std::int64_t(rng.index(9))});
    }
    return items;
}

/// Exhaustive 0/1 enumeration, the oracle for select_exact.
double brute_force_best(const std::vector<CostedIndex>& items, std::int64_t budget) {
    const std::size_t n = items.size();
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
        double obj = 0.0;
        std::int64_t cost = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t(1) << i)) {
                obj += items[i].lambda_min;
                cost += items[i].cost;
            }
        if (cost <= budget) best = std::min(best, obj);
    }
    return best;
}

std::int64_t total_cost(const std::vector<CostedIndex>& items,
                        const std::vector<NeuronRef>& chosen) {
    std::int64_t c = 0;
    for (const CostedIndex& it : items)
        if (std::find(chosen.begin(), chosen.end(), it.neuron) != chosen.end()) c += it.cost;
    return c;
}

} // namespace

TEST_CASE("split_cost from the layer model") {
    // fan_in 2, fan_out 3 -> (2+1) + 3 = 6
    Network net = make_network(2, {4, 3}, 2, ActivationKind::tanh, LossHead::cross_entropy, 1);
    CHECK(split_cost(net, NeuronRef{0, 0}) == 6);
    // last hidden layer: fan_in 4, fan_out = outputs = 2
    CHECK(split_cost(net, NeuronRef{1, 0}) == 7);
    CHECK_THROWS_AS((void)split_cost(net, NeuronRef{2, 0}), Error);
}

TEST_CASE("split_cost tracks topology changes from earlier splits") {
    Network net = make_network(2, {2, 2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 2);
    const std::int64_t before = split_cost(net, NeuronRef{0, 0});
    // Splitting a layer-1 neuron raises layer-0 fan_out by one.
    Network grown = apply_split(net, NeuronRef{1, 0}, Vec{1.0, 0.0, 0.0}, 0.0);
    CHECK(split_cost(grown, NeuronRef{0, 0}) == before + 1);
}

TEST_CASE("split_cost equals the realized flops delta") {
    Rng rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        Network net = testutil::random_network(rng, LossHead::cross_entropy);
        const int layer = int(rng.index(net.hidden.size()));
        const int index = int(rng.index(net.hidden[std::size_t(layer)].units.size()));
        const NeuronRef ref{layer, index};
        Network grown = apply_split(net, ref, testutil::random_unit(rng, net.theta(ref).size()),
                                    0.01);
        CHECK(flops(grown) - flops(net) == split_cost(net, ref));
    }
}

TEST_CASE("select_fractional: no beneficial item") {
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, 0.5, 2}, {NeuronRef{0, 1}, 0.0, 1}};
    SelectionResult res = select_fractional(items, 10);
    CHECK(res.chosen.empty());
    CHECK(res.objective == 0.0);
    CHECK(res.spent == 0);
}

TEST_CASE("select_fractional: everything fits") {
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, -1.0, 2},
                                   {NeuronRef{0, 1}, -0.5, 3},
                                   {NeuronRef{0, 2}, 0.25, 1}};
    SelectionResult res = select_fractional(items, 5);
    CHECK(res.chosen == std::vector<NeuronRef>{{0, 0}, {0, 1}});
    CHECK(res.objective == doctest::Approx(-1.5));
    CHECK(res.spent == 5);
}

TEST_CASE("select_fractional: the worked example") {
    // ratios -2, -3, -0.5: take (-3, e=1) then (-4, e=2); budget exhausted.
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, -4.0, 2},
                                   {NeuronRef{0, 1}, -3.0, 1},
                                   {NeuronRef{0, 2}, -1.0, 2}};
    SelectionResult res = select_fractional(items, 3);
    CHECK(res.chosen == std::vector<NeuronRef>{{0, 0}, {0, 1}});
    CHECK(res.objective == doctest::Approx(-7.0));
    CHECK(res.spent == 3);
    CHECK(res.beta.at(NeuronRef{0, 0}) == 1.0);
    CHECK(res.beta.at(NeuronRef{0, 1}) == 1.0);
    CHECK(res.beta.at(NeuronRef{0, 2}) == 0.0);
    // matches exhaustive 0/1 enumeration here
    CHECK(res.objective == doctest::Approx(brute_force_best(items, 3)));
}

TEST_CASE("select_fractional: budget zero") {
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, -1.0, 1}};
    SelectionResult res = select_fractional(items, 0);
    CHECK(res.chosen.empty());
}

TEST_CASE("select_exact: single item against the budget boundary") {
    std::vector<CostedIndex> one{{NeuronRef{0, 0}, -1.0, 5}};
    CHECK(select_exact(one, 4).chosen.empty());
    SelectionResult res = select_exact(one, 5);
    CHECK(res.chosen == std::vector<NeuronRef>{{0, 0}});
    CHECK(res.objective == doctest::Approx(-1.0));
    CHECK(res.spent == 5);
    CHECK(res.beta.at(NeuronRef{0, 0}) == 1.0);
}

TEST_CASE("select_exact matches exhaustive enumeration") {
    Rng rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(12);
        std::vector<CostedIndex> items = random_items(rng, n);
        const std::int64_t budget = std::int64_t(rng.index(30));
        SelectionResult res = select_exact(items, budget);
        CHECK(res.objective == doctest::Approx(brute_force_best(items, budget)).epsilon(1e-12));
        CHECK(res.spent <= budget);
        CHECK(res.spent == total_cost(items, res.chosen));
    }
}

TEST_CASE("select_exact rejects oversized tables") {
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, -1.0, 50'000'000},
                                   {NeuronRef{0, 1}, -2.0, 50'000'000}};
    CHECK_THROWS_WITH_AS((void)select_exact(items, 40'000'000), doctest::Contains("cells"),
                         Error);
}

TEST_CASE("greedy relaxation is LP-optimal against random feasible vectors") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.index(10);
        std::vector<CostedIndex> items = random_items(rng, n);
        const std::int64_t budget = 1 + std::int64_t(rng.index(25));
        SelectionResult res = select_fractional(items, budget);

        double greedy_obj = 0.0;
        for (const CostedIndex& it : items) greedy_obj += res.beta.at(it.neuron) * it.lambda_min;

        for (int probe = 0; probe < 1000; ++probe) {
            // Random feasible fractional vector: scale a random beta down to
            // the budget if needed.
            std::vector<double> beta(n);
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                beta[i] = rng.uniform01();
                cost += beta[i] * double(items[i].cost);
            }
            if (cost > double(budget))
                for (double& b : beta) b *= double(budget) / cost;
            double obj = 0.0;
            for (std::size_t i = 0; i < n; ++i) obj += beta[i] * items[i].lambda_min;
            CHECK(greedy_obj <= obj + 1e-9);
        }
    }
}

TEST_CASE("relaxation bounds and feasibility") {
    Rng rng(54);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(15);
        std::vector<CostedIndex> items = random_items(rng, n);
        const std::int64_t budget = std::int64_t(rng.index(40));
        SelectionResult frac = select_fractional(items, budget);
        SelectionResult exact = select_exact(items, budget);

        double frac_obj = 0.0;
        for (const CostedIndex& it : items) frac_obj += frac.beta.at(it.neuron) * it.lambda_min;
        CHECK(frac_obj <= exact.objective + 1e-12);
        CHECK(exact.objective <= 0.0);

        // Thresholded set stays within the budget.
        CHECK(frac.spent <= budget);
        CHECK(frac.spent == total_cost(items, frac.chosen));

        // No non-negative lambda is ever selected.
        for (const CostedIndex& it : items) {
            const bool in_frac =
                std::find(frac.chosen.begin(), frac.chosen.end(), it.neuron) != frac.chosen.end();
            const bool in_exact = std::find(exact.chosen.begin(), exact.chosen.end(),
                                            it.neuron) != exact.chosen.end();
            if (it.lambda_min >= 0.0) {
                CHECK_FALSE(in_frac);
                CHECK_FALSE(in_exact);
                CHECK(frac.beta.at(it.neuron) == 0.0);
            }
        }

        // At most one fractional coordinate, and only the last taken one.
        int fractional = 0;
        for (const CostedIndex& it : items) {
            const double b = frac.beta.at(it.neuron);
            CHECK(b >= 0.0);
            CHECK(b <= 1.0);
            if (b > 0.0 && b < 1.0) ++fractional;
        }
        CHECK(fractional <= 1);
    }
}

TEST_CASE("selection rejects invalid arguments") {
    std::vector<CostedIndex> items{{NeuronRef{0, 0}, -1.0, 0}};
    CHECK_THROWS_AS((void)select_fractional(items, 3), Error);
    CHECK_THROWS_AS((void)select_exact({}, -1), Error);
}
