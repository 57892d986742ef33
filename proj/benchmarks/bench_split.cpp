// Microbenchmarks for the two splitting-index paths: explicit matrix build
// plus Jacobi eigen-decomposition, and matrix-free Rayleigh-quotient descent.

#include <benchmark/benchmark.h>

#include "grownet/rayleigh.hpp"
#include "grownet/rng.hpp"
#include "grownet/splitmat.hpp"

using namespace grownet;

namespace {

struct Fixture {
    Network net;
    std::vector<Sample> data;
};

/// One hidden neuron with the requested parameter dimension d (d-1 inputs
/// plus bias) over 256 random examples.
Fixture make_fixture(std::size_t d) {
    Rng rng(mix_seed(d, 0xbe9cULL));
    Fixture f;
    f.net.input_dim = d - 1;
    f.net.activation = ActivationKind::tanh;
    f.net.loss_head = LossHead::squared_error;
    Vec theta(d);
    for (double& w : theta) w = rng.uniform(-0.2, 0.2);
    f.net.hidden.push_back(Layer{{std::move(theta)}});
    f.net.output = Layer{{Vec{1.0, 0.0}}};
    f.data.resize(256);
    for (Sample& s : f.data) {
        s.x.resize(f.net.input_dim);
        for (double& x : s.x) x = rng.uniform(-1.0, 1.0);
        s.target = {rng.uniform(-1.0, 1.0)};
    }
    return f;
}

void BM_ExactIndex(benchmark::State& state) {
    Fixture f = make_fixture(std::size_t(state.range(0)));
    for (auto _ : state) {
        SplitIndex idx = splitting_index_exact(f.net, f.data, NeuronRef{0, 0});
        benchmark::DoNotOptimize(idx.lambda_min);
    }
}

void BM_RayleighIndex(benchmark::State& state) {
    Fixture f = make_fixture(std::size_t(state.range(0)));
    RayleighConfig cfg;
    cfg.seed = 1;
    for (auto _ : state) {
        RayleighOutcome out = rayleigh_descent(f.net, f.data, cfg);
        benchmark::DoNotOptimize(out.indexes.at(NeuronRef{0, 0}).lambda_min);
    }
}

void BM_MatrixBuild(benchmark::State& state) {
    Fixture f = make_fixture(std::size_t(state.range(0)));
    for (auto _ : state) {
        SymMatrix s = splitting_matrix(f.net, f.data, NeuronRef{0, 0});
        benchmark::DoNotOptimize(s.packed().data());
    }
}

void BM_MatrixFreeProduct(benchmark::State& state) {
    Fixture f = make_fixture(std::size_t(state.range(0)));
    Rng rng(7);
    Vec v(std::size_t(state.range(0)));
    for (double& x : v) x = rng.normal();
    normalize(v);
    for (auto _ : state) {
        auto g = splitting_matvec(f.net, f.data, {{NeuronRef{0, 0}, v}});
        benchmark::DoNotOptimize(g.at(NeuronRef{0, 0}).data());
    }
}

void BM_JacobiEig(benchmark::State& state) {
    const std::size_t d = std::size_t(state.range(0));
    Rng rng(13);
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
    for (auto _ : state) {
        EigenPair p = sym_eig_min(m);
        benchmark::DoNotOptimize(p.value);
    }
}

} // namespace

BENCHMARK(BM_ExactIndex)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RayleighIndex)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixBuild)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixFreeProduct)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobiEig)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
