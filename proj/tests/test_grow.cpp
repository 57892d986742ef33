#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grownet/error.hpp"
#include "grownet/grow.hpp"
#include "test_util.hpp"

using namespace grownet;

namespace {

GrowthConfig moons_config() {
    GrowthConfig cfg;
    cfg.alpha = 0.5;
    cfg.max_stages = 4;
    cfg.train.learning_rate = 0.25;
    cfg.train.max_epochs = 300;
    cfg.train.patience = 15;
    cfg.train.batch_size = 32;
    cfg.seed = 1;
    return cfg;
}

} // namespace

TEST_CASE("grow_stage terminates before any work when the flops target is met") {
    Dataset ds = synth(SynthKind::two_moons, 200, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 3);
    GrowthConfig cfg = moons_config();
    cfg.flops_target = flops(net); // already reached
    StageOutcome out = grow_stage(net, ds, cfg, 1);
    REQUIRE(out.terminated.has_value());
    CHECK(*out.terminated == "budget reached");
    CHECK_FALSE(out.record.has_value());
    CHECK(out.history.empty());
    CHECK(flops(out.net) == flops(net));
}

TEST_CASE("grow_stage reports no descent direction when the threshold excludes everything") {
    Dataset ds = synth(SynthKind::two_moons, 200, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 3);
    GrowthConfig cfg = moons_config();
    cfg.lambda_stop = 1e9; // nothing can be more negative than this
    StageOutcome out = grow_stage(net, ds, cfg, 1);
    REQUIRE(out.terminated.has_value());
    CHECK(*out.terminated == "no descent direction");
    CHECK(out.at_plateau); // training still happened
    CHECK_FALSE(out.history.empty());
}

TEST_CASE("stage one on the canonical two-moons seed") {
    Dataset ds = synth(SynthKind::two_moons, 1000, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 11);
    GrowthConfig cfg = moons_config();
    StageOutcome out = grow_stage(net, ds, cfg, 1);
    REQUIRE(out.record.has_value());
    const StageRecord& rec = *out.record;
    CHECK(rec.selected.size() >= 1);
    const double ratio = double(rec.flops_after) / double(rec.flops_before);
    CHECK(ratio > 1.0);
    CHECK(ratio <= 1.5);
    for (const SelectedSplit& s : rec.selected) CHECK(s.lambda_min < 0.0);
}

TEST_CASE("run_growth with an already-satisfied target trains once and records nothing") {
    Dataset ds = synth(SynthKind::two_moons, 200, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 3);
    GrowthConfig cfg = moons_config();
    cfg.flops_target = 1; // below the seed's flops
    RunResult run = run_growth(net, ds, cfg);
    CHECK(run.stages.empty());
    CHECK(run.termination == "budget reached");
    CHECK(run.final_flops == flops(net));
    // training happened: the trained loss beats the random-init loss
    CHECK(run.final_train_loss < mean_loss(net, ds.train));
}

TEST_CASE("canonical run: budget invariant, monotone flops, non-increasing loss") {
    Dataset ds = synth(SynthKind::two_moons, 1000, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 11);
    GrowthConfig cfg = moons_config();
    std::size_t seen = 0;
    RunResult run = run_growth(net, ds, cfg, [&](const StageRecord&) { ++seen; });
    REQUIRE_FALSE(run.stages.empty());
    CHECK(seen == run.stages.size());

    for (std::size_t k = 0; k < run.stages.size(); ++k) {
        const StageRecord& rec = run.stages[k];
        CHECK(rec.stage == int(k) + 1);
        // exact integer budget invariant: flops_after <= (1+alpha)*flops_before
        CHECK(rec.flops_after <=
              rec.flops_before + std::int64_t(std::floor(cfg.alpha * double(rec.flops_before))));
        CHECK(rec.flops_after > rec.flops_before);
        if (k + 1 < run.stages.size())
            CHECK(run.stages[k + 1].flops_before == rec.flops_after);
    }
    // post-retrain loss never increases across stages (1e-3 slack)
    for (std::size_t k = 0; k + 1 < run.stages.size(); ++k)
        CHECK(run.stages[k + 1].loss_before <= run.stages[k].loss_before + 1e-3);
    CHECK(run.final_train_loss <= run.stages.back().loss_before + 1e-3);
}

TEST_CASE("prediction matches realization for small eps") {
    Dataset ds = synth(SynthKind::two_moons, 1000, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 11);
    GrowthConfig cfg = moons_config(); // default eps: 0.01 * mean neuron norm
    RunResult run = run_growth(net, ds, cfg);
    REQUIRE_FALSE(run.stages.empty());
    for (const StageRecord& rec : run.stages) {
        CHECK(rec.predicted_gain < 0.0);
        CHECK(rec.realized_gain < 0.0);
        const double ratio = rec.realized_gain / rec.predicted_gain;
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
    }
}

TEST_CASE("exact and rayleigh methods reach comparable accuracy") {
    Dataset ds = synth(SynthKind::two_moons, 600, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 11);
    GrowthConfig cfg = moons_config();
    cfg.max_stages = 2;
    RunResult exact = run_growth(net, ds, cfg);

    cfg.index_method = IndexMethod::rayleigh;
    cfg.rayleigh.learning_rate = 0.005;
    cfg.rayleigh.epochs = 25;
    RunResult rayleigh = run_growth(net, ds, cfg);

    CHECK(std::abs(exact.final_test_accuracy - rayleigh.final_test_accuracy) <= 0.02);
}

TEST_CASE("identical seeds reproduce identical stage records") {
    Dataset ds = synth(SynthKind::two_moons, 400, 0.1, 7);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 11);
    GrowthConfig cfg = moons_config();
    cfg.max_stages = 3;
    RunResult a = run_growth(net, ds, cfg);
    RunResult b = run_growth(net, ds, cfg);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t k = 0; k < a.stages.size(); ++k)
        CHECK(to_json_line(a.stages[k]) == to_json_line(b.stages[k]));
    CHECK(a.final_train_loss == b.final_train_loss);
    CHECK(a.final_test_accuracy == b.final_test_accuracy);
}

TEST_CASE("vanilla mode splits the most negative neurons under a count cap") {
    Dataset ds = synth(SynthKind::two_moons, 600, 0.12, 9);
    Network net = make_network(2, {3, 3}, 2, ActivationKind::tanh, LossHead::cross_entropy, 4);
    GrowthConfig cfg = moons_config();
    cfg.vanilla = true;
    cfg.vanilla_cap = 2;
    StageOutcome out = grow_stage(net, ds, cfg, 1);
    if (out.record) {
        CHECK(out.record->selected.size() <= 2);
        for (const SelectedSplit& s : out.record->selected) CHECK(s.lambda_min < 0.0);
    }
}

TEST_CASE("stage record serialization is stable") {
    StageRecord rec;
    rec.stage = 2;
    rec.loss_before = 0.5;
    rec.loss_after = 0.25;
    rec.accuracy_before = 0.75;
    rec.accuracy_after = 0.8;
    rec.flops_before = 10;
    rec.flops_after = 15;
    rec.budget = 5;
    rec.selected.push_back({NeuronRef{0, 1}, -1.5, 5});
    rec.predicted_gain = -0.01;
    rec.realized_gain = -0.009;
    CHECK(to_json_line(rec) ==
          "{\"accuracy_after\":0.8,\"accuracy_before\":0.75,\"budget\":5,"
          "\"flops_after\":15,\"flops_before\":10,\"loss_after\":0.25,\"loss_before\":0.5,"
          "\"predicted_gain\":-0.01,\"realized_gain\":-0.009,"
          "\"selected\":[{\"cost\":5,\"index\":1,\"lambda_min\":-1.5,\"layer\":0}],"
          "\"stage\":2}");
}

TEST_CASE("growth config validation") {
    Dataset ds = synth(SynthKind::blobs, 50, 0.1, 2);
    Network net = make_network(2, {2}, 2, ActivationKind::tanh, LossHead::cross_entropy, 3);
    GrowthConfig cfg = moons_config();
    cfg.alpha = 0.0;
    CHECK_THROWS_AS((void)grow_stage(net, ds, cfg, 1), Error);
    cfg = moons_config();
    cfg.max_stages = 0;
    CHECK_THROWS_AS((void)run_growth(net, ds, cfg), Error);
}
