#ifndef ODCSIM_PARTITION_HPP
#define ODCSIM_PARTITION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "odcsim/cost_model.hpp"
#include "odcsim/types.hpp"
#include "odcsim/workload.hpp"

namespace odcsim {

// A k-way split of input indices with the per-part cost totals.
struct PartitionResult {
    std::vector<std::vector<int>> parts;  // disjoint, union = {0..n-1}
    std::vector<double> sums;
    double spread = 0.0;  // max sum - min sum
};

// k-way Karmarkar-Karp largest-differencing heuristic. Maintains k-tuples of
// part sums in a max-heap keyed by spread and repeatedly merges the two
// widest tuples, pairing largest-sum sub-part with smallest. Ties are broken
// by lowest contained original index, so the result is deterministic.
// With equal_size, parts get exactly n/k elements each (k must divide n):
// the heap is seeded with k-item groups of the cost-sorted input, one item
// per sub-part, so every merge preserves exact part sizes.
PartitionResult kk_partition(std::span<const double> costs, int k, bool equal_size);

// Exhaustive spread-minimal partition, for n <= 14. Test oracle.
PartitionResult brute_force_partition(std::span<const double> costs, int k, bool equal_size);

// Balance one device-level partition over per-sample compute costs.
// equal_size=false is the ODC + minibatch-level-balancing variant.
PartitionResult minibatch_partition(std::span<const Tokens> seqlens, int world_size,
                                    bool equal_size, const CostModel& cost);

// Smallest k such that a k-way KK split of the costs keeps every microbatch
// within the token budget. Returns per-microbatch index lists.
// Requires every sample to fit the budget on its own.
std::vector<std::vector<int>> microbatch_partition(std::span<const Sample> samples,
                                                   const MemoryBudget& budget,
                                                   const CostModel& cost);

// Joint variant across a data-parallel group: all devices run the k loop in
// lockstep and a device only stops once every peer fits (the all-reduce of
// the OOM flag), so every device ends with the same microbatch count.
std::vector<std::vector<std::vector<int>>> microbatch_partition_joint(
    const std::vector<std::vector<Sample>>& per_device, const MemoryBudget& budget,
    const CostModel& cost);

// A memory-feasible slice of one device's minibatch. Empty microbatches act
// as barrier padding under per-layer collectives.
struct Microbatch {
    std::vector<std::int64_t> sample_ids;
    std::vector<Tokens> lengths;
    Tokens token_sum = 0;

    bool empty() const { return sample_ids.empty(); }
};

enum class BatchingMode { EqualMicro, VariableMicro };

// Per-step assignment of samples to microbatches on each device.
struct BatchingSolution {
    std::vector<std::vector<Microbatch>> per_device;
    BatchingMode mode = BatchingMode::EqualMicro;
    int minibatch_size_per_device = 0;
    int step_index = 0;
    bool partial = false;  // trailing step smaller than devices * minibatch_size

    int devices() const { return static_cast<int>(per_device.size()); }
    std::int64_t sample_count() const;
};

enum class Strategy { LocalSort, LbMicro, LbMini, VerlNative, VerlOptimized };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PlanResult {
    std::vector<BatchingSolution> steps;
    std::vector<std::int64_t> dropped_ids;  // VerlNative remainder, if any
};

// Schedule the whole workload into one BatchingSolution per optimizer step.
//   LocalSort      sort each step's pool by length, deal round-robin, no packing
//   LbMicro        equal-size device split, joint microbatch loop (collective-safe)
//   LbMini         free device split, independent per-device packing (ODC only)
//   VerlNative     balance the whole pool across ranks, then split minibatches
//   VerlOptimized  shuffle, split minibatches globally, then balance each one
// The seed drives the verl strategies' shuffles.
PlanResult plan(Strategy strategy, const Workload& w, int devices, int minibatch_size,
                const MemoryBudget& budget, const CostModel& cost, std::uint64_t seed);

}  // namespace odcsim

#endif  // ODCSIM_PARTITION_HPP
