#include "grownet/grow.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "grownet/error.hpp"
#include "grownet/rng.hpp"

namespace grownet {

namespace {

double mean_neuron_norm(const Network& net) {
    double total = 0.0;
    std::size_t count = 0;
    for (const Layer& layer : net.hidden) {
        for (const Vec& theta : layer.units) {
            total += norm2(theta);
            ++count;
        }
    }
    return count ? total / double(count) : 0.0;
}

double resolve_epsilon(const GrowthConfig& cfg, const Network& net) {
    if (cfg.epsilon > 0.0) return cfg.epsilon;
    const double mean = mean_neuron_norm(net);
    return mean > 0.0 ? 0.01 * mean : 1e-2;
}

std::map<NeuronRef, SplitIndex> compute_indexes(const Network& net, const Dataset& data,
                                                const GrowthConfig& cfg, int stage) {
    std::map<NeuronRef, SplitIndex> out;
    if (cfg.index_method == IndexMethod::exact) {
        for (SplitIndex& idx : splitting_indexes_exact(net, data.train)) {
            NeuronRef ref = idx.neuron;
            out.emplace(ref, std::move(idx));
        }
    } else {
        RayleighConfig rcfg = cfg.rayleigh;
        rcfg.seed = mix_seed(cfg.seed, cfg.rayleigh.seed, std::uint64_t(stage), 2);
        out = rayleigh_descent(net, data, rcfg).indexes;
    }
    return out;
}

std::vector<NeuronRef> select_vanilla(const std::vector<CostedIndex>& items, int cap) {
    std::vector<CostedIndex> order = items;
    std::sort(order.begin(), order.end(), [](const CostedIndex& a, const CostedIndex& b) {
        if (a.lambda_min != b.lambda_min) return a.lambda_min < b.lambda_min;
        return a.neuron < b.neuron;
    });
    std::vector<NeuronRef> chosen;
    for (const CostedIndex& it : order) {
        if (int(chosen.size()) >= cap) break;
        chosen.push_back(it.neuron);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace

StageOutcome grow_stage(const Network& net, const Dataset& data, const GrowthConfig& cfg,
                        int stage) {
    if (cfg.alpha <= 0.0) throw Error("grow_stage: alpha must be > 0");
    if (cfg.lambda_stop < 0.0) throw Error("grow_stage: lambda_stop must be >= 0");

    StageOutcome out{net, std::nullopt, std::nullopt, false, {}};
    if (cfg.flops_target > 0 && flops(net) >= cfg.flops_target) {
        out.terminated = "budget reached";
        return out;
    }

    TrainHyper hyper = cfg.train;
    hyper.seed = mix_seed(cfg.seed, cfg.train.seed, std::uint64_t(stage), 1);
    TrainResult trained = train_to_plateau(net, data, hyper);
    out.net = std::move(trained.net);
    out.history = std::move(trained.history);
    out.at_plateau = true;

    const double loss_before = mean_loss(out.net, data.train);
    const double acc_before = accuracy(out.net, data.test);
    const std::int64_t flops_before = flops(out.net);

    std::map<NeuronRef, SplitIndex> indexes = compute_indexes(out.net, data, cfg, stage);
    std::vector<CostedIndex> items;
    for (const auto& [ref, idx] : indexes)
        if (idx.lambda_min < -cfg.lambda_stop)
            items.push_back(CostedIndex{ref, idx.lambda_min, split_cost(out.net, ref)});

    const std::int64_t budget = std::int64_t(std::floor(cfg.alpha * double(flops_before)));
    std::vector<NeuronRef> chosen;
    if (cfg.vanilla) {
        const int cap = cfg.vanilla_cap > 0
                            ? cfg.vanilla_cap
                            : std::max(1, int(out.net.n_hidden_neurons()) / 4);
        chosen = select_vanilla(items, cap);
    } else {
        chosen = select_fractional(items, budget).chosen;
    }
    if (chosen.empty()) {
        out.terminated = "no descent direction";
        return out;
    }

    const double eps = resolve_epsilon(cfg, out.net);
    StageRecord rec;
    rec.stage = stage;
    rec.loss_before = loss_before;
    rec.accuracy_before = acc_before;
    rec.flops_before = flops_before;
    rec.budget = budget;

    // Deepest layer first, so every pending neuron keeps the dimension its
    // eigen-direction was computed for. Selection charged each neuron its
    // pre-split cost; a split in layer k+1 raises the realized fan-out cost
    // of a layer-k split in the same stage, so the realized delta is checked
    // against the remaining budget and anything that no longer fits is
    // dropped. That keeps flops_after <= flops_before + budget exact.
    std::vector<NeuronRef> apply_order = chosen;
    std::sort(apply_order.begin(), apply_order.end(), [](NeuronRef a, NeuronRef b) {
        if (a.layer != b.layer) return a.layer > b.layer;
        return a.index < b.index;
    });
    Network grown = out.net;
    std::int64_t spent = 0;
    std::vector<NeuronRef> applied;
    for (NeuronRef ref : apply_order) {
        const std::int64_t realized = split_cost(grown, ref);
        if (!cfg.vanilla && spent + realized > budget) continue;
        grown = apply_split(grown, ref, indexes.at(ref).v_min, eps);
        spent += realized;
        applied.push_back(ref);
    }
    if (applied.empty()) {
        out.terminated = "no descent direction";
        return out;
    }
    std::sort(applied.begin(), applied.end());
    for (NeuronRef ref : applied) {
        const SplitIndex& idx = indexes.at(ref);
        rec.selected.push_back(SelectedSplit{ref, idx.lambda_min, split_cost(out.net, ref)});
        rec.predicted_gain += idx.lambda_min;
    }
    rec.predicted_gain *= eps * eps / 2.0;

    rec.flops_after = flops(grown);
    rec.loss_after = mean_loss(grown, data.train);
    rec.accuracy_after = accuracy(grown, data.test);
    rec.realized_gain = rec.loss_after - rec.loss_before;

    if (!cfg.vanilla && rec.flops_after > rec.flops_before + budget)
        throw Error("grow_stage: budget invariant violated");

    out.net = std::move(grown);
    out.at_plateau = false;
    out.record = std::move(rec);
    return out;
}

RunResult run_growth(const Network& seed_net, const Dataset& data, const GrowthConfig& cfg,
                     const std::function<void(const StageRecord&)>& on_stage) {
    if (cfg.max_stages < 1) throw Error("run_growth: max_stages must be >= 1");

    RunResult result;
    result.net = seed_net;
    result.termination = "max stages reached";
    bool at_plateau = false;

    for (int stage = 1; stage <= cfg.max_stages; ++stage) {
        StageOutcome out = grow_stage(result.net, data, cfg, stage);
        result.net = std::move(out.net);
        at_plateau = out.at_plateau;
        if (out.terminated) {
            result.termination = *out.terminated;
            break;
        }
        result.stages.push_back(*out.record);
        if (on_stage) on_stage(result.stages.back());
    }

    if (!at_plateau) {
        TrainHyper hyper = cfg.train;
        hyper.seed = mix_seed(cfg.seed, cfg.train.seed, std::uint64_t(cfg.max_stages) + 1, 1);
        result.net = train_to_plateau(result.net, data, hyper).net;
    }
    result.final_train_loss = mean_loss(result.net, data.train);
    result.final_test_accuracy = accuracy(result.net, data.test);
    result.final_flops = flops(result.net);
    return result;
}

std::string to_json_line(const StageRecord& rec) {
    nlohmann::json selected = nlohmann::json::array();
    for (const SelectedSplit& s : rec.selected)
        selected.push_back({{"layer", s.neuron.layer},
                            {"index", s.neuron.index},
                            {"lambda_min", s.lambda_min},
                            {"cost", s.cost}});
    nlohmann::json doc{
        {"stage", rec.stage},
        {"loss_before", rec.loss_before},
        {"loss_after", rec.loss_after},
        {"accuracy_before", rec.accuracy_before},
        {"accuracy_after", rec.accuracy_after},
        {"flops_before", rec.flops_before},
        {"flops_after", rec.flops_after},
        {"budget", rec.budget},
        {"selected", selected},
        {"predicted_gain", rec.predicted_gain},
        {"realized_gain", rec.realized_gain},
    };
    return doc.dump();
}

} // namespace grownet
