#ifndef GROWNET_GROW_HPP
#define GROWNET_GROW_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "grownet/energy.hpp"
#include "grownet/rayleigh.hpp"

namespace grownet {

struct GrowthConfig {
    double epsilon = 0.0; // <= 0: use 0.01 * mean per-neuron ||theta||
    double alpha = 0.5;   // per-stage growth ratio
    int max_stages = 4;
    std::int64_t flops_target = 0; // <= 0: no global flops stop
    IndexMethod index_method = IndexMethod::exact;
    double lambda_stop = 1e-4; // ignore neurons with lambda >= -lambda_stop
    RayleighConfig rayleigh;
    TrainHyper train;
    std::uint64_t seed = 0;
    bool vanilla = false; // energy-unaware selection (most-negative lambda)
    int vanilla_cap = 0;  // <= 0: max(1, n_hidden/4) neurons per stage
};

struct SelectedSplit {
    NeuronRef neuron;
    double lambda_min = 0.0;
    std::int64_t cost = 0;
};

struct StageRecord {
    int stage = 0;
    double loss_before = 0.0; // train loss at plateau, pre-split
    double loss_after = 0.0;  // train loss right after splitting
    double accuracy_before = 0.0; // test accuracy at plateau
    double accuracy_after = 0.0;
    std::int64_t flops_before = 0;
    std::int64_t flops_after = 0;
    std::int64_t budget = 0;
    std::vector<SelectedSplit> selected;
    double predicted_gain = 0.0; // eps^2/2 * sum lambda (negative = improvement)
    double realized_gain = 0.0;  // loss_after - loss_before
};

std::string to_json_line(const StageRecord& record);

struct StageOutcome {
    Network net;
    std::optional<StageRecord> record;       // set when a split happened
    std::optional<std::string> terminated;   // reason when no split happened
    bool at_plateau = false;                 // net was trained and not split since
    std::vector<std::pair<int, double>> history;
};

/// One stage of the growth loop: train to plateau, compute every neuron's
/// splitting index with the configured method, select a split set within
/// floor(alpha * flops) (or by most-negative lambda in vanilla mode), and
/// apply the splits. Terminates with "budget reached" before any work when
/// the flops target is already met, or with "no descent direction" when no
/// neuron has lambda < -lambda_stop or nothing affordable remains.
StageOutcome grow_stage(const Network& net, const Dataset& data, const GrowthConfig& cfg,
                        int stage);

struct RunResult {
    std::vector<StageRecord> stages;
    Network net; // trained final network
    double final_train_loss = 0.0;
    double final_test_accuracy = 0.0;
    std::int64_t final_flops = 0;
    std::string termination;
};

/// Repeats grow_stage until termination, max_stages, or the flops target,
/// then trains once more so the returned network is at a plateau. `on_stage`
/// (optional) observes each record as soon as it exists, so partial logs
/// survive a failure later in the run.
RunResult run_growth(const Network& seed_net, const Dataset& data, const GrowthConfig& cfg,
                     const std::function<void(const StageRecord&)>& on_stage = {});

} // namespace grownet

#endif
