#ifndef GROWNET_ENERGY_HPP
#define GROWNET_ENERGY_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "grownet/net.hpp"

namespace grownet {

struct CostedIndex {
    NeuronRef neuron;
    double lambda_min = 0.0;
    std::int64_t cost = 1; // flops added by splitting this neuron now
};

struct SelectionResult {
    std::map<NeuronRef, double> beta; // relaxed selection variables in [0,1]
    std::vector<NeuronRef> chosen;    // A = {beta > 0.9}, feasibility enforced
    double objective = 0.0;           // sum of lambda over A
    std::int64_t spent = 0;           // sum of cost over A
};

/// Flops added to one forward pass if `ref` is split on the current
/// topology: (fan_in + 1) + fan_out.
std::int64_t split_cost(const Network& net, NeuronRef ref);

/// LP relaxation of the budgeted selection, solved exactly by the
/// fractional-knapsack greedy: items with lambda >= 0 are discarded, the
/// rest are taken most-negative lambda/cost first, the first item that does
/// not fit gets the fractional remainder, and the set A keeps the beta > 0.9
/// items whose full cost fits the budget.
SelectionResult select_fractional(const std::vector<CostedIndex>& items, std::int64_t budget);

/// Optimal 0/1 selection by dynamic programming over cost; a testing oracle.
/// Rejects instances whose DP table would exceed 1e7 cells.
SelectionResult select_exact(const std::vector<CostedIndex>& items, std::int64_t budget);

} // namespace grownet

#endif
