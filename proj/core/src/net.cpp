#include "grownet/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "grownet/error.hpp"
#include "grownet/rng.hpp"

namespace grownet {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

double Activation::h(double z) const {
    switch (kind) {
    case ActivationKind::tanh: return std::tanh(z);
    case ActivationKind::sigmoid: return stable_sigmoid(z);
    case ActivationKind::softplus:
        return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    throw Error("unknown activation");
}

double Activation::dh(double z) const {
    switch (kind) {
    case ActivationKind::tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    case ActivationKind::sigmoid: {
        const double s = stable_sigmoid(z);
        return s * (1.0 - s);
    }
    case ActivationKind::softplus: return stable_sigmoid(z);
    }
    throw Error("unknown activation");
}

double Activation::d2h(double z) const {
    switch (kind) {
    case ActivationKind::tanh: {
        const double t = std::tanh(z);
        return -2.0 * t * (1.0 - t * t);
    }
    case ActivationKind::sigmoid: {
        const double s = stable_sigmoid(z);
        return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ActivationKind::softplus: {
        const double s = stable_sigmoid(z);
        return s * (1.0 - s);
    }
    }
    throw Error("unknown activation");
}

std::size_t Network::n_hidden_neurons() const {
    std::size_t n = 0;
    for (const Layer& l : hidden) n += l.units.size();
    return n;
}

std::size_t Network::fan_in(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden[layer - 1].units.size();
}

void Network::check_ref(NeuronRef ref) const {
    if (ref.layer < 0 || static_cast<std::size_t>(ref.layer) >= hidden.size()) {
        if (static_cast<std::size_t>(ref.layer) == hidden.size())
            throw Error("neuron ref addresses the output layer; output units are not splittable");
        throw Error("neuron ref layer " + std::to_string(ref.layer) + " out of range");
    }
    const Layer& l = hidden[static_cast<std::size_t>(ref.layer)];
    if (ref.index < 0 || static_cast<std::size_t>(ref.index) >= l.units.size())
        throw Error("neuron ref index " + std::to_string(ref.index) + " out of range in layer " +
                    std::to_string(ref.layer));
}

const Vec& Network::theta(NeuronRef ref) const {
    check_ref(ref);
    return hidden[static_cast<std::size_t>(ref.layer)].units[static_cast<std::size_t>(ref.index)];
}

Network make_network(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                     std::size_t n_outputs, ActivationKind act, LossHead head,
                     std::uint64_t seed) {
    if (input_dim == 0) throw Error("make_network: input_dim must be >= 1");
    if (n_outputs == 0) throw Error("make_network: need at least one output");
    for (std::size_t m : hidden_sizes)
        if (m == 0) throw Error("make_network: hidden layer sizes must be >= 1");

    Network net;
    net.input_dim = input_dim;
    net.activation = act;
    net.loss_head = head;
    Rng rng(mix_seed(seed, 0x1717ULL));

    std::size_t fan_in = input_dim;
    for (std::size_t m : hidden_sizes) {
        Layer layer;
        const double bound = 1.0 / std::sqrt(double(fan_in));
        for (std::size_t i = 0; i < m; ++i) {
            Vec theta(fan_in + 1);
            for (double& w : theta) w = rng.uniform(-bound, bound);
            layer.units.push_back(std::move(theta));
        }
        net.hidden.push_back(std::move(layer));
        fan_in = m;
    }
    const double bound = 1.0 / std::sqrt(double(fan_in));
    for (std::size_t o = 0; o < n_outputs; ++o) {
        Vec w(fan_in + 1);
        for (double& x : w) x = rng.uniform(-bound, bound);
        net.output.units.push_back(std::move(w));
    }
    return net;
}

namespace {

double affine(const Vec& theta, const Vec& x_tilde) {
    double z = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) z += theta[i] * x_tilde[i];
    return z;
}

Vec with_bias(const Vec& a) {
    Vec x(a.size() + 1);
    std::copy(a.begin(), a.end(), x.begin());
    x.back() = 1.0;
    return x;
}

} // namespace

ForwardResult forward(const Network& net, const Vec& x) {
    if (x.size() != net.input_dim)
        throw Error("forward: input length " + std::to_string(x.size()) +
                    " does not match input_dim " + std::to_string(net.input_dim));

    const Activation act{net.activation};
    ForwardResult r;
    Vec a = x;
    for (const Layer& layer : net.hidden) {
        Vec x_tilde = with_bias(a);
        Vec z(layer.units.size());
        Vec next(layer.units.size());
        for (std::size_t i = 0; i < layer.units.size(); ++i) {
            z[i] = affine(layer.units[i], x_tilde);
            next[i] = act.h(z[i]);
            if (!std::isfinite(next[i]))
                throw Error("forward: non-finite activation in layer " +
                            std::to_string(&layer - net.hidden.data()));
        }
        r.layer_inputs.push_back(std::move(x_tilde));
        r.pre_acts.push_back(std::move(z));
        a = std::move(next);
    }
    r.output_input = with_bias(a);
    r.output.resize(net.n_outputs());
    for (std::size_t o = 0; o < net.n_outputs(); ++o)
        r.output[o] = affine(net.output.units[o], r.output_input);
    return r;
}

namespace {

/// Per-example loss and dPhi/d(output) for the configured head.
double head_loss_and_delta(const Network& net, const Vec& out, const Sample& sample,
                           Vec& delta) {
    delta.assign(out.size(), 0.0);
    if (net.loss_head == LossHead::cross_entropy) {
        if (sample.label < 0 || static_cast<std::size_t>(sample.label) >= out.size())
            throw Error("cross-entropy: label " + std::to_string(sample.label) +
                        " out of range for " + std::to_string(out.size()) + " outputs");
        const double m = *std::max_element(out.begin(), out.end());
        double sum = 0.0;
        for (double o : out) sum += std::exp(o - m);
        const double log_sum = std::log(sum);
        for (std::size_t o = 0; o < out.size(); ++o)
            delta[o] = std::exp(out[o] - m) / sum;
        delta[static_cast<std::size_t>(sample.label)] -= 1.0;
        return -(out[static_cast<std::size_t>(sample.label)] - m - log_sum);
    }
    // squared error, summed over output coordinates
    if (sample.target.size() != out.size())
        throw Error("squared_error: target length " + std::to_string(sample.target.size()) +
                    " does not match " + std::to_string(out.size()) + " outputs");
    double loss = 0.0;
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double d = out[o] - sample.target[o];
        loss += d * d;
        delta[o] = 2.0 * d;
    }
    return loss;
}

} // namespace

ExampleTapes example_pass(const Network& net, const Sample& sample) {
    const Activation act{net.activation};
    ForwardResult fwd = forward(net, sample.x);

    ExampleTapes tapes;
    tapes.x_tilde = std::move(fwd.layer_inputs);
    tapes.z = std::move(fwd.pre_acts);
    tapes.output_input = std::move(fwd.output_input);
    tapes.output = std::move(fwd.output);
    tapes.loss = head_loss_and_delta(net, tapes.output, sample, tapes.delta_out);

    // Backward: da holds dPhi/d(activation) for the layer below the cursor.
    const std::size_t n_layers = net.hidden.size();
    Vec da(net.output.units.empty() ? 0 : net.output.units[0].size() - 1, 0.0);
    for (std::size_t o = 0; o < net.output.units.size(); ++o) {
        const Vec& w = net.output.units[o];
        for (std::size_t j = 0; j + 1 < w.size(); ++j) da[j] += tapes.delta_out[o] * w[j];
    }
    tapes.gbar.resize(n_layers);
    for (std::size_t k = n_layers; k-- > 0;) {
        const Layer& layer = net.hidden[k];
        tapes.gbar[k] = da;
        Vec prev(layer.units.empty() ? 0 : layer.units[0].size() - 1, 0.0);
        for (std::size_t i = 0; i < layer.units.size(); ++i) {
            const double dz = da[i] * act.dh(tapes.z[k][i]);
            const Vec& theta = layer.units[i];
            for (std::size_t j = 0; j + 1 < theta.size(); ++j) prev[j] += dz * theta[j];
        }
        da = std::move(prev);
    }
    return tapes;
}

LossGrads loss_and_grads(const Network& net, std::span<const Sample> batch) {
    if (batch.empty()) throw Error("loss_and_grads: empty batch");
    const Activation act{net.activation};

    LossGrads out;
    out.grads.hidden.resize(net.hidden.size());
    for (std::size_t k = 0; k < net.hidden.size(); ++k) {
        out.grads.hidden[k].resize(net.hidden[k].units.size());
        for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i)
            out.grads.hidden[k][i].assign(net.hidden[k].units[i].size(), 0.0);
    }
    out.grads.output.resize(net.n_outputs());
    for (std::size_t o = 0; o < net.n_outputs(); ++o)
        out.grads.output[o].assign(net.output.units[o].size(), 0.0);
    out.captures.x_tilde.resize(net.hidden.size());
    out.captures.z.resize(net.hidden.size());
    out.captures.gbar.resize(net.hidden.size());

    double total = 0.0;
    for (const Sample& sample : batch) {
        ExampleTapes tapes = example_pass(net, sample);
        total += tapes.loss;
        for (std::size_t o = 0; o < net.n_outputs(); ++o) {
            Vec& g = out.grads.output[o];
            for (std::size_t j = 0; j < g.size(); ++j)
                g[j] += tapes.delta_out[o] * tapes.output_input[j];
        }
        for (std::size_t k = 0; k < net.hidden.size(); ++k) {
            const Vec& x_tilde = tapes.x_tilde[k];
            for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i) {
                const double dz = tapes.gbar[k][i] * act.dh(tapes.z[k][i]);
                Vec& g = out.grads.hidden[k][i];
                for (std::size_t j = 0; j < g.size(); ++j) g[j] += dz * x_tilde[j];
            }
            out.captures.x_tilde[k].push_back(std::move(tapes.x_tilde[k]));
            out.captures.z[k].push_back(std::move(tapes.z[k]));
            out.captures.gbar[k].push_back(std::move(tapes.gbar[k]));
        }
    }

    const double inv_n = 1.0 / double(batch.size());
    out.loss = total * inv_n;
    for (auto& layer : out.grads.hidden)
        for (Vec& g : layer)
            for (double& x : g) x *= inv_n;
    for (Vec& g : out.grads.output)
        for (double& x : g) x *= inv_n;
    return out;
}

namespace {

struct Velocity {
    std::vector<std::vector<Vec>> hidden;
    std::vector<Vec> output;

    explicit Velocity(const Network& net) {
        hidden.resize(net.hidden.size());
        for (std::size_t k = 0; k < net.hidden.size(); ++k) {
            hidden[k].resize(net.hidden[k].units.size());
            for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i)
                hidden[k][i].assign(net.hidden[k].units[i].size(), 0.0);
        }
        output.resize(net.n_outputs());
        for (std::size_t o = 0; o < net.n_outputs(); ++o)
            output[o].assign(net.output.units[o].size(), 0.0);
    }
};

void sgd_step(Network& net, Velocity& vel, const Gradients& grads, double lr, double momentum) {
    for (std::size_t k = 0; k < net.hidden.size(); ++k)
        for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i) {
            Vec& theta = net.hidden[k].units[i];
            Vec& v = vel.hidden[k][i];
            const Vec& g = grads.hidden[k][i];
            for (std::size_t j = 0; j < theta.size(); ++j) {
                v[j] = momentum * v[j] + g[j];
                theta[j] -= lr * v[j];
            }
        }
    for (std::size_t o = 0; o < net.n_outputs(); ++o) {
        Vec& w = net.output.units[o];
        Vec& v = vel.output[o];
        const Vec& g = grads.output[o];
        for (std::size_t j = 0; j < w.size(); ++j) {
            v[j] = momentum * v[j] + g[j];
            w[j] -= lr * v[j];
        }
    }
}

} // namespace

TrainResult train_to_plateau(const Network& net, const Dataset& data, const TrainHyper& hyper) {
    if (data.train.empty()) throw Error("train_to_plateau: empty dataset");
    if (hyper.learning_rate <= 0.0) throw Error("train_to_plateau: learning_rate must be > 0");
    if (hyper.batch_size < 1) throw Error("train_to_plateau: batch_size must be >= 1");
    if (hyper.patience < 1) throw Error("train_to_plateau: patience must be >= 1");

    TrainResult result;
    result.net = net;
    if (hyper.max_epochs <= 0) return result;

    Network cur = net;
    Velocity vel(cur);
    Rng rng(mix_seed(hyper.seed, 0x7e41ULL));
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_loss = std::numeric_limits<double>::infinity();
    int stale = 0;
    std::vector<Sample> batch;
    for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t end = std::min(order.size(), start + hyper.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data.train[order[i]]);
            LossGrads lg = loss_and_grads(cur, batch);
            sgd_step(cur, vel, lg.grads, hyper.learning_rate, hyper.momentum);
            epoch_total += lg.loss * double(batch.size());
        }
        const double epoch_loss = epoch_total / double(order.size());
        if (!std::isfinite(epoch_loss))
            throw DivergenceError("train_to_plateau: loss diverged at epoch " +
                                      std::to_string(epoch),
                                  result.history);
        result.history.emplace_back(epoch, epoch_loss);

        const bool improved_rel =
            epoch_loss < best_loss - hyper.rel_improve_tol * std::max(std::abs(best_loss), 1e-12);
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            result.net = cur;
        }
        if (improved_rel) {
            stale = 0;
        } else if (++stale >= hyper.patience) {
            break;
        }
    }
    return result;
}

std::int64_t flops(const Network& net) {
    std::int64_t macs = 0;
    for (std::size_t k = 0; k < net.hidden.size(); ++k)
        macs += std::int64_t(net.hidden[k].units.size()) * std::int64_t(net.fan_in(k) + 1);
    const std::size_t out_fan_in =
        net.hidden.empty() ? net.input_dim : net.hidden.back().units.size();
    macs += std::int64_t(net.n_outputs()) * std::int64_t(out_fan_in + 1);
    return macs;
}

std::int64_t param_count(const Network& net) {
    return flops(net); // one MAC per weight, bias included
}

Network apply_split(const Network& net, NeuronRef ref, const Vec& v, double eps) {
    net.check_ref(ref);
    if (eps < 0.0) throw Error("apply_split: eps must be >= 0");
    const Vec& theta = net.theta(ref);
    if (v.size() != theta.size())
        throw Error("apply_split: direction length " + std::to_string(v.size()) +
                    " does not match neuron dim " + std::to_string(theta.size()));
    if (std::abs(norm2(v) - 1.0) > 1e-8)
        throw Error("apply_split: direction must be unit norm");

    Network out = net;
    const std::size_t k = static_cast<std::size_t>(ref.layer);
    const std::size_t i = static_cast<std::size_t>(ref.index);
    Layer& layer = out.hidden[k];
    const std::size_t old_width = layer.units.size();

    Vec theta1 = theta, theta2 = theta;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        theta1[j] += eps * v[j];
        theta2[j] -= eps * v[j];
    }
    layer.units[i] = std::move(theta1);
    layer.units.push_back(std::move(theta2));

    // Halve the outgoing weight and give the new unit the other half; the
    // new coordinate sits just before the bias slot.
    Layer& next = (k + 1 < out.hidden.size()) ? out.hidden[k + 1] : out.output;
    for (Vec& u : next.units) {
        const double w = u[i];
        u[i] = w / 2.0;
        u.insert(u.begin() + long(old_width), w / 2.0);
    }
    return out;
}

double mean_loss(const Network& net, std::span<const Sample> samples) {
    if (samples.empty()) throw Error("mean_loss: empty sample set");
    double total = 0.0;
    Vec delta;
    for (const Sample& s : samples) {
        ForwardResult fwd = forward(net, s.x);
        total += head_loss_and_delta(net, fwd.output, s, delta);
    }
    return total / double(samples.size());
}

double accuracy(const Network& net, std::span<const Sample> samples) {
    if (samples.empty()) throw Error("accuracy: empty sample set");
    std::size_t hits = 0;
    for (const Sample& s : samples) {
        ForwardResult fwd = forward(net, s.x);
        const std::size_t pred =
            std::size_t(std::max_element(fwd.output.begin(), fwd.output.end()) -
                        fwd.output.begin());
        if (int(pred) == s.label) ++hits;
    }
    return double(hits) / double(samples.size());
}

std::string activation_name(ActivationKind kind) {
    switch (kind) {
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::softplus: return "softplus";
    }
    throw Error("unknown activation");
}

ActivationKind activation_from_name(const std::string& name) {
    if (name == "tanh") return ActivationKind::tanh;
    if (name == "sigmoid") return ActivationKind::sigmoid;
    if (name == "softplus") return ActivationKind::softplus;
    throw Error("unknown activation '" + name + "'");
}

std::string loss_head_name(LossHead head) {
    return head == LossHead::cross_entropy ? "cross_entropy" : "mse";
}

LossHead loss_head_from_name(const std::string& name) {
    if (name == "cross_entropy") return LossHead::cross_entropy;
    if (name == "mse") return LossHead::squared_error;
    throw Error("unknown loss head '" + name + "'");
}

} // namespace grownet
