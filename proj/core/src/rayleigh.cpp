#include "grownet/rayleigh.hpp"

#include <cmath>
#include <numeric>

#include "grownet/error.hpp"
#include "grownet/rng.hpp"

namespace grownet {

namespace {

Vec random_unit(std::size_t dim, Rng& rng) {
    Vec v(dim);
    double n = 0.0;
    do {
        for (double& x : v) x = rng.normal();
        n = norm2(v);
    } while (n == 0.0);
    for (double& x : v) x /= n;
    return v;
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

struct IterState {
    Vec v;
    Vec acc; // per-coordinate RMS accumulator
    int restarts = 0;
};

/// One descent step from g = S v. Returns false when the iterate went
/// non-finite and must be restarted.
bool rayleigh_step(IterState& st, const Vec& g, const RayleighConfig& cfg) {
    const double quotient = dot(st.v, g); // |v| == 1
    Vec grad(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) grad[j] = g[j] - quotient * st.v[j];

    if (cfg.adaptive) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            st.acc[j] = cfg.adaptive_decay * st.acc[j] +
                        (1.0 - cfg.adaptive_decay) * grad[j] * grad[j];
            st.v[j] -= cfg.learning_rate * grad[j] / (std::sqrt(st.acc[j]) + cfg.epsilon_guard);
        }
    } else {
        for (std::size_t j = 0; j < g.size(); ++j) st.v[j] -= cfg.learning_rate * grad[j];
    }
    if (!all_finite(st.v)) return false;
    const double n = norm2(st.v);
    if (n == 0.0 || !std::isfinite(n)) return false;
    for (double& x : st.v) x /= n;
    return true;
}

} // namespace

double rayleigh_quotient(const Network& net, std::span<const Sample> samples, NeuronRef ref,
                         const Vec& v) {
    const double nn = dot(v, v);
    if (nn == 0.0) throw Error("rayleigh_quotient: zero vector");
    std::map<NeuronRef, Vec> vs{{ref, v}};
    const Vec g = splitting_matvec(net, samples, vs).at(ref);
    return dot(v, g) / nn;
}

double rayleigh_quotient(const Network& net, const Dataset& data, NeuronRef ref, const Vec& v) {
    return rayleigh_quotient(net, std::span<const Sample>(data.train), ref, v);
}

RayleighOutcome rayleigh_descent(const Network& net, std::span<const Sample> samples,
                                 const RayleighConfig& cfg) {
    if (samples.empty()) throw Error("rayleigh_descent: empty dataset");
    if (cfg.batch_size < 1) throw Error("rayleigh_descent: batch_size must be >= 1");
    if (cfg.epochs < 1) throw Error("rayleigh_descent: epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw Error("rayleigh_descent: learning_rate must be > 0");

    std::vector<NeuronRef> refs;
    for (std::size_t k = 0; k < net.hidden.size(); ++k)
        for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i)
            refs.push_back(NeuronRef{int(k), int(i)});

    Rng rng(mix_seed(cfg.seed, 0x4a1eULL));
    std::map<NeuronRef, IterState> states;
    for (NeuronRef ref : refs) {
        const std::size_t dim = net.theta(ref).size();
        states.emplace(ref, IterState{random_unit(dim, rng), Vec(dim, 0.0), 0});
    }

    auto full_quotients = [&]() {
        std::map<NeuronRef, Vec> vs;
        for (auto& [ref, st] : states) vs.emplace(ref, st.v);
        std::map<NeuronRef, Vec> gs = splitting_matvec(net, samples, vs);
        std::map<NeuronRef, double> q;
        for (auto& [ref, st] : states) q[ref] = dot(st.v, gs.at(ref));
        return q;
    };

    RayleighOutcome out;
    for (auto& [ref, q] : full_quotients()) out.traces[ref].push_back(q);

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Sample> batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);

            std::map<NeuronRef, Vec> vs;
            for (auto& [ref, st] : states) vs.emplace(ref, st.v);
            std::map<NeuronRef, Vec> gs = splitting_matvec(net, batch, vs);
            for (auto& [ref, st] : states) {
                if (!rayleigh_step(st, gs.at(ref), cfg)) {
                    if (++st.restarts > cfg.max_restarts)
                        throw Error("rayleigh_descent: neuron (" + std::to_string(ref.layer) +
                                    "," + std::to_string(ref.index) + ") exceeded " +
                                    std::to_string(cfg.max_restarts) + " restarts");
                    st.v = random_unit(st.v.size(), rng);
                    st.acc.assign(st.acc.size(), 0.0);
                }
            }
        }
        for (auto& [ref, q] : full_quotients()) out.traces[ref].push_back(q);
    }

    for (auto& [ref, st] : states) {
        const double lambda = out.traces[ref].back();
        out.indexes.emplace(ref, SplitIndex{ref, lambda, st.v, IndexMethod::rayleigh});
    }
    return out;
}

RayleighOutcome rayleigh_descent(const Network& net, const Dataset& data,
                                 const RayleighConfig& cfg) {
    return rayleigh_descent(net, std::span<const Sample>(data.train), cfg);
}

MatrixDescentResult rayleigh_minimize_matrix(const SymMatrix& m, const RayleighConfig& cfg,
                                             int max_steps) {
    Rng rng(mix_seed(cfg.seed, 0x3a7fULL));
    IterState st{random_unit(m.dim(), rng), Vec(m.dim(), 0.0), 0};

    MatrixDescentResult res;
    for (int step = 0; step < max_steps; ++step) {
        const Vec g = matvec(m, st.v);
        res.trace.push_back(dot(st.v, g));
        if (!rayleigh_step(st, g, cfg)) {
            if (++st.restarts > cfg.max_restarts)
                throw Error("rayleigh_minimize_matrix: exceeded restart limit");
            st.v = random_unit(st.v.size(), rng);
            st.acc.assign(st.acc.size(), 0.0);
        }
    }
    const Vec g = matvec(m, st.v);
    res.lambda = dot(st.v, g);
    res.trace.push_back(res.lambda);
    res.v = std::move(st.v);
    return res;
}

} // namespace grownet
