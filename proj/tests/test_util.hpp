#ifndef GROWNET_TEST_UTIL_HPP
#define GROWNET_TEST_UTIL_HPP

// Shared generators and independent oracles for the test suites. Everything
// here must stay independent of the library code paths it is used to check:
// finite differences, closed forms, and brute-force enumeration only.

#include <cmath>
#include <functional>
#include <vector>

#include "grownet/linalg.hpp"
#include "grownet/net.hpp"
#include "grownet/rng.hpp"

namespace testutil {

using grownet::Network;
using grownet::Rng;
using grownet::Sample;
using grownet::SymMatrix;
using grownet::Vec;

inline SymMatrix random_sym_matrix(Rng& rng, std::size_t dim, double scale = 1.0) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j <= i; ++j) m.set(i, j, scale * rng.uniform(-1.0, 1.0));
    return m;
}

inline Vec random_unit(Rng& rng, std::size_t dim) {
    Vec v(dim);
    double n = 0.0;
    do {
        for (double& x : v) x = rng.normal();
        n = grownet::norm2(v);
    } while (n == 0.0);
    for (double& x : v) x /= n;
    return v;
}

/// Closed-form minimum eigenvalue of a 2x2 symmetric matrix (trace and
/// determinant), the oracle for the Jacobi solver.
inline double eig_min_2x2(double a, double b, double c) {
    const double mean = (a + c) / 2.0;
    const double disc = std::sqrt((a - c) * (a - c) / 4.0 + b * b);
    return mean - disc;
}

/// Random small network: 1-2 hidden layers of width 1..4, random activation.
inline Network random_network(Rng& rng, grownet::LossHead head) {
    const std::size_t input_dim = 1 + rng.index(3);
    const std::size_t n_layers = 1 + rng.index(2);
    std::vector<std::size_t> hidden;
    for (std::size_t k = 0; k < n_layers; ++k) hidden.push_back(1 + rng.index(4));
    const std::size_t outputs = 1 + rng.index(3);
    const grownet::ActivationKind acts[3] = {grownet::ActivationKind::tanh,
                                             grownet::ActivationKind::sigmoid,
                                             grownet::ActivationKind::softplus};
    return grownet::make_network(input_dim, hidden, outputs, acts[rng.index(3)], head,
                                 rng.raw());
}

inline std::vector<Sample> random_samples(Rng& rng, const Network& net, std::size_t n) {
    std::vector<Sample> out(n);
    for (Sample& s : out) {
        s.x.resize(net.input_dim);
        for (double& x : s.x) x = rng.uniform(-1.5, 1.5);
        s.label = int(rng.index(net.n_outputs()));
        s.target.assign(net.n_outputs(), 0.0);
        for (double& t : s.target) t = rng.uniform(-1.0, 1.0);
    }
    return out;
}

/// Visits every parameter of the network as a mutable reference.
inline void for_each_param(Network& net, const std::function<void(double&)>& fn) {
    for (grownet::Layer& layer : net.hidden)
        for (Vec& theta : layer.units)
            for (double& w : theta) fn(w);
    for (Vec& w : net.output.units)
        for (double& x : w) fn(x);
}

/// Central-difference gradient of the batch-mean loss with respect to every
/// parameter, in the same order as for_each_param.
inline std::vector<double> fd_gradient(const Network& net, std::span<const Sample> batch,
                                       double step = 1e-5) {
    Network work = net;
    std::vector<double*> slots;
    for_each_param(work, [&](double& w) { slots.push_back(&w); });

    std::vector<double> grad(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double saved = *slots[i];
        *slots[i] = saved + step;
        const double up = grownet::mean_loss(work, batch);
        *slots[i] = saved - step;
        const double down = grownet::mean_loss(work, batch);
        *slots[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

inline bool close_rel(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

} // namespace testutil

#endif
