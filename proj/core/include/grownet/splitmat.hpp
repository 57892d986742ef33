#ifndef GROWNET_SPLITMAT_HPP
#define GROWNET_SPLITMAT_HPP

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "grownet/linalg.hpp"
#include "grownet/net.hpp"

namespace grownet {

enum class IndexMethod { exact, rayleigh };

/// Minimum eigenpair of a neuron's splitting matrix together with how it was
/// obtained.
struct SplitIndex {
    NeuronRef neuron;
    double lambda_min = 0.0;
    Vec v_min;
    IndexMethod method = IndexMethod::exact;
};

/// One (neuron, example) contribution to a splitting matrix: the scalar
/// coefficient gbar * h''(z) and the layer input x~.
struct CaptureTerm {
    double coef = 0.0;
    Vec x_tilde;
};

/// S = (1/N) * sum_i coef_i * x~_i x~_i^T, accumulated in packed symmetric
/// storage.
SymMatrix splitting_matrix_from_terms(std::span<const CaptureTerm> terms, std::size_t dim);

/// (1/N) * sum_i coef_i * (x~_i . v) * x~_i without forming any matrix.
Vec splitting_matvec_from_terms(std::span<const CaptureTerm> terms, const Vec& v);

SymMatrix splitting_matrix(const Network& net, std::span<const Sample> samples, NeuronRef ref);
SymMatrix splitting_matrix(const Network& net, const Dataset& data, NeuronRef ref);

SplitIndex splitting_index_exact(const Network& net, std::span<const Sample> samples,
                                 NeuronRef ref);
SplitIndex splitting_index_exact(const Network& net, const Dataset& data, NeuronRef ref);

/// Exact splitting indexes for every hidden neuron from one capture pass.
std::vector<SplitIndex> splitting_indexes_exact(const Network& net,
                                                std::span<const Sample> samples);

/// S_l v_l for every requested neuron from one streaming forward-backward
/// pass over the batch; no d x d buffer is ever allocated.
std::map<NeuronRef, Vec> splitting_matvec(const Network& net, std::span<const Sample> batch,
                                          const std::map<NeuronRef, Vec>& vs);

/// Sum of individual gains over a selection; gains are additive across
/// disjoint neuron sets by construction.
double total_gain(std::span<const SplitIndex> indexes);

/// Debug dump, row-major with a "d=<dim>" header line.
void dump_matrix_csv(const SymMatrix& m, std::ostream& out);

} // namespace grownet

#endif
