#include "grownet/splitmat.hpp"

#include <cstdio>
#include <ostream>

#include "grownet/error.hpp"

namespace grownet {

SymMatrix splitting_matrix_from_terms(std::span<const CaptureTerm> terms, std::size_t dim) {
    if (terms.empty()) throw Error("splitting_matrix: empty capture set");
    SymMatrix s(dim);
    for (const CaptureTerm& t : terms) {
        if (t.x_tilde.size() != dim) throw Error("splitting_matrix: capture dim mismatch");
        for (std::size_t i = 0; i < dim; ++i) {
            const double ci = t.coef * t.x_tilde[i];
            for (std::size_t j = 0; j <= i; ++j) s.add(i, j, ci * t.x_tilde[j]);
        }
    }
    const double inv_n = 1.0 / double(terms.size());
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j <= i; ++j) s.set(i, j, s(i, j) * inv_n);
    return s;
}

Vec splitting_matvec_from_terms(std::span<const CaptureTerm> terms, const Vec& v) {
    if (terms.empty()) throw Error("splitting_matvec: empty capture set");
    Vec g(v.size(), 0.0);
    for (const CaptureTerm& t : terms) {
        if (t.x_tilde.size() != v.size()) throw Error("splitting_matvec: capture dim mismatch");
        const double proj = t.coef * dot(t.x_tilde, v);
        for (std::size_t i = 0; i < v.size(); ++i) g[i] += proj * t.x_tilde[i];
    }
    const double inv_n = 1.0 / double(terms.size());
    for (double& x : g) x *= inv_n;
    return g;
}

SymMatrix splitting_matrix(const Network& net, std::span<const Sample> samples, NeuronRef ref) {
    net.check_ref(ref);
    if (samples.empty()) throw Error("splitting_matrix: empty dataset");
    const Activation act{net.activation};
    const std::size_t k = std::size_t(ref.layer);
    const std::size_t i = std::size_t(ref.index);
    const std::size_t dim = net.theta(ref).size();

    SymMatrix s(dim);
    for (const Sample& sample : samples) {
        ExampleTapes tapes = example_pass(net, sample);
        const double coef = tapes.gbar[k][i] * act.d2h(tapes.z[k][i]);
        const Vec& x_tilde = tapes.x_tilde[k];
        for (std::size_t a = 0; a < dim; ++a) {
            const double ca = coef * x_tilde[a];
            for (std::size_t b = 0; b <= a; ++b) s.add(a, b, ca * x_tilde[b]);
        }
    }
    const double inv_n = 1.0 / double(samples.size());
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b <= a; ++b) s.set(a, b, s(a, b) * inv_n);
    return s;
}

SymMatrix splitting_matrix(const Network& net, const Dataset& data, NeuronRef ref) {
    return splitting_matrix(net, std::span<const Sample>(data.train), ref);
}

SplitIndex splitting_index_exact(const Network& net, std::span<const Sample> samples,
                                 NeuronRef ref) {
    EigenPair pair = sym_eig_min(splitting_matrix(net, samples, ref));
    return SplitIndex{ref, pair.value, std::move(pair.vector), IndexMethod::exact};
}

SplitIndex splitting_index_exact(const Network& net, const Dataset& data, NeuronRef ref) {
    return splitting_index_exact(net, std::span<const Sample>(data.train), ref);
}

std::vector<SplitIndex> splitting_indexes_exact(const Network& net,
                                                std::span<const Sample> samples) {
    if (samples.empty()) throw Error("splitting_indexes_exact: empty dataset");
    const Activation act{net.activation};

    // One streaming pass accumulates every neuron's matrix.
    std::vector<std::vector<SymMatrix>> mats(net.hidden.size());
    for (std::size_t k = 0; k < net.hidden.size(); ++k) {
        const std::size_t dim = net.fan_in(k) + 1;
        mats[k].assign(net.hidden[k].units.size(), SymMatrix(dim));
    }
    for (const Sample& sample : samples) {
        ExampleTapes tapes = example_pass(net, sample);
        for (std::size_t k = 0; k < net.hidden.size(); ++k) {
            const Vec& x_tilde = tapes.x_tilde[k];
            const std::size_t dim = x_tilde.size();
            for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i) {
                const double coef = tapes.gbar[k][i] * act.d2h(tapes.z[k][i]);
                SymMatrix& s = mats[k][i];
                for (std::size_t a = 0; a < dim; ++a) {
                    const double ca = coef * x_tilde[a];
                    for (std::size_t b = 0; b <= a; ++b) s.add(a, b, ca * x_tilde[b]);
                }
            }
        }
    }

    const double inv_n = 1.0 / double(samples.size());
    std::vector<SplitIndex> out;
    for (std::size_t k = 0; k < net.hidden.size(); ++k) {
        for (std::size_t i = 0; i < net.hidden[k].units.size(); ++i) {
            SymMatrix& s = mats[k][i];
            for (std::size_t a = 0; a < s.dim(); ++a)
                for (std::size_t b = 0; b <= a; ++b) s.set(a, b, s(a, b) * inv_n);
            EigenPair pair = sym_eig_min(s);
            out.push_back(SplitIndex{NeuronRef{int(k), int(i)}, pair.value,
                                     std::move(pair.vector), IndexMethod::exact});
        }
    }
    return out;
}

std::map<NeuronRef, Vec> splitting_matvec(const Network& net, std::span<const Sample> batch,
                                          const std::map<NeuronRef, Vec>& vs) {
    if (batch.empty()) throw Error("splitting_matvec: empty batch");
    const Activation act{net.activation};

    std::map<NeuronRef, Vec> out;
    for (const auto& [ref, v] : vs) {
        net.check_ref(ref);
        if (v.size() != net.theta(ref).size())
            throw Error("splitting_matvec: direction length " + std::to_string(v.size()) +
                        " does not match neuron dim " + std::to_string(net.theta(ref).size()) +
                        " at layer " + std::to_string(ref.layer) + " index " +
                        std::to_string(ref.index));
        out.emplace(ref, Vec(v.size(), 0.0));
    }

    for (const Sample& sample : batch) {
        ExampleTapes tapes = example_pass(net, sample);
        for (const auto& [ref, v] : vs) {
            const std::size_t k = std::size_t(ref.layer);
            const std::size_t i = std::size_t(ref.index);
            const Vec& x_tilde = tapes.x_tilde[k];
            const double coef = tapes.gbar[k][i] * act.d2h(tapes.z[k][i]);
            const double proj = coef * dot(x_tilde, v);
            Vec& g = out[ref];
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += proj * x_tilde[j];
        }
    }
    const double inv_n = 1.0 / double(batch.size());
    for (auto& [ref, g] : out)
        for (double& x : g) x *= inv_n;
    return out;
}

double total_gain(std::span<const SplitIndex> indexes) {
    double g = 0.0;
    for (const SplitIndex& idx : indexes) g += idx.lambda_min;
    return g;
}

void dump_matrix_csv(const SymMatrix& m, std::ostream& out) {
    out << "d=" << m.dim() << '\n';
    for (std::size_t i = 0; i < m.dim(); ++i) {
        for (std::size_t j = 0; j < m.dim(); ++j) {
            if (j) out << ',';
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf;
        }
        out << '\n';
    }
}

} // namespace grownet
