#ifndef GROWNET_NET_HPP
#define GROWNET_NET_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grownet/data.hpp"
#include "grownet/linalg.hpp"

namespace grownet {

enum class ActivationKind { tanh, sigmoid, softplus };

/// Smooth scalar activation with closed-form first and second derivatives.
/// ReLU is deliberately absent: its second derivative vanishes everywhere,
/// which makes every splitting matrix zero.
struct Activation {
    ActivationKind kind = ActivationKind::tanh;

    double h(double z) const;
    double dh(double z) const;
    double d2h(double z) const;
};

enum class LossHead { cross_entropy, squared_error };

/// Addresses a hidden neuron; output units are not addressable (they are
/// linear and never split).
struct NeuronRef {
    int layer = 0;
    int index = 0;
    auto operator<=>(const NeuronRef&) const = default;
};

/// A layer is a list of per-unit parameter vectors; each vector covers the
/// incoming weights with the bias as its last coordinate.
struct Layer {
    std::vector<Vec> units;
};

struct Network {
    std::size_t input_dim = 0;
    std::vector<Layer> hidden;
    Layer output; // linear units
    ActivationKind activation = ActivationKind::tanh;
    LossHead loss_head = LossHead::cross_entropy;

    std::size_t n_outputs() const { return output.units.size(); }
    std::size_t n_hidden_neurons() const;
    /// Input width of hidden layer k (not counting the bias slot).
    std::size_t fan_in(std::size_t layer) const;
    const Vec& theta(NeuronRef ref) const;
    void check_ref(NeuronRef ref) const;
};

/// Fresh network with per-unit weights drawn uniformly from
/// [-1/sqrt(fan_in), +1/sqrt(fan_in)], bias included.
Network make_network(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                     std::size_t n_outputs, ActivationKind act, LossHead head,
                     std::uint64_t seed);

/// Forward pass with the per-neuron cache needed to rebuild captures:
/// layer inputs x~ (bias slot = 1) and pre-activations z.
struct ForwardResult {
    Vec output;
    std::vector<Vec> layer_inputs; // per hidden layer: x~ of length fan_in+1
    std::vector<Vec> pre_acts;     // per hidden layer: z per neuron
    Vec output_input;              // x~ seen by the output layer
};
ForwardResult forward(const Network& net, const Vec& x);

/// One example's forward/backward tapes: everything per-neuron splitting
/// needs (x~, z, and gbar = dPhi/dsigma), plus the per-example loss and the
/// output-layer deltas.
struct ExampleTapes {
    std::vector<Vec> x_tilde; // per hidden layer
    std::vector<Vec> z;       // per hidden layer, per neuron
    std::vector<Vec> gbar;    // per hidden layer, per neuron
    Vec output_input;
    Vec output;
    Vec delta_out; // dPhi/d(output unit)
    double loss = 0.0;
};
ExampleTapes example_pass(const Network& net, const Sample& sample);

struct Gradients {
    std::vector<std::vector<Vec>> hidden; // [layer][neuron] -> dL/dtheta
    std::vector<Vec> output;              // [unit] -> dL/dw
};

/// Per-neuron, per-example captures from one batch pass.
struct Captures {
    std::vector<std::vector<Vec>> x_tilde; // [layer][example]
    std::vector<std::vector<Vec>> z;       // [layer][example][neuron]
    std::vector<std::vector<Vec>> gbar;    // [layer][example][neuron]
};

struct LossGrads {
    double loss = 0.0; // batch mean
    Gradients grads;   // gradients of the batch mean
    Captures captures; // raw per-example quantities
};
LossGrads loss_and_grads(const Network& net, std::span<const Sample> batch);

struct TrainHyper {
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    int max_epochs = 200;
    int patience = 10;
    double rel_improve_tol = 1e-4;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Network net; // best-loss snapshot
    std::vector<std::pair<int, double>> history;
};

/// SGD with momentum over shuffled mini-batches. Stops at max_epochs or when
/// the best epoch loss fails to improve relatively by rel_improve_tol for
/// `patience` consecutive epochs. Throws DivergenceError (carrying the finite
/// history) if the loss goes non-finite.
TrainResult train_to_plateau(const Network& net, const Dataset& data, const TrainHyper& hyper);

/// Multiply-accumulate count of one forward pass; every weight including the
/// bias is one MAC. Equals the parameter count for this layer model.
std::int64_t flops(const Network& net);
std::int64_t param_count(const Network& net);

/// Splits hidden neuron `ref` into two off-springs theta +- eps*v. Each
/// outgoing weight u becomes u/2 on both off-springs, so at eps = 0 the
/// network function is unchanged. The second off-spring is appended at the
/// end of the layer; existing neuron indices are stable.
Network apply_split(const Network& net, NeuronRef ref, const Vec& v, double eps);

double mean_loss(const Network& net, std::span<const Sample> samples);
double accuracy(const Network& net, std::span<const Sample> samples);

std::string activation_name(ActivationKind kind);
ActivationKind activation_from_name(const std::string& name);
std::string loss_head_name(LossHead head);
LossHead loss_head_from_name(const std::string& name);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);
std::string checkpoint_json(const Network& net);
Network network_from_checkpoint_json(const std::string& text);

} // namespace grownet

#endif
