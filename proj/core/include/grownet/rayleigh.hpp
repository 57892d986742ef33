#ifndef GROWNET_RAYLEIGH_HPP
#define GROWNET_RAYLEIGH_HPP

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "grownet/splitmat.hpp"

namespace grownet {

struct RayleighConfig {
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    int epochs = 10;
    double adaptive_decay = 0.9; // RMS accumulator decay
    double epsilon_guard = 1e-8;
    std::uint64_t seed = 0;
    bool adaptive = true; // false: plain-gradient steps, for testing
    int max_restarts = 3;
};

/// v^T S v / v^T v for one neuron, with S applied matrix-free over the full
/// sample set. Errors on the zero vector.
double rayleigh_quotient(const Network& net, std::span<const Sample> samples, NeuronRef ref,
                         const Vec& v);
double rayleigh_quotient(const Network& net, const Dataset& data, NeuronRef ref, const Vec& v);

struct RayleighOutcome {
    std::map<NeuronRef, SplitIndex> indexes;
    /// Full-dataset quotient per neuron: entry 0 at initialization, then one
    /// per epoch end.
    std::map<NeuronRef, std::vector<double>> traces;
};

/// Estimates every hidden neuron's splitting index simultaneously by
/// stochastic descent on the Rayleigh quotient. Each mini-batch supplies
/// S_B v for all neurons in one streaming pass; iterates are renormalized to
/// the unit sphere after every step, and the reported lambda comes from a
/// final full-dataset quotient.
RayleighOutcome rayleigh_descent(const Network& net, const Dataset& data,
                                 const RayleighConfig& cfg);
RayleighOutcome rayleigh_descent(const Network& net, std::span<const Sample> samples,
                                 const RayleighConfig& cfg);

/// Deterministic full-batch descent on an explicit matrix; the testing and
/// benchmarking path for the update rule itself.
struct MatrixDescentResult {
    double lambda = 0.0;
    Vec v;
    std::vector<double> trace;
};
MatrixDescentResult rayleigh_minimize_matrix(const SymMatrix& m, const RayleighConfig& cfg,
                                             int max_steps);

} // namespace grownet

#endif
