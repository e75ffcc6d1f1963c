#ifndef ODCSIM_RUNTIME_HPP
#define ODCSIM_RUNTIME_HPP

#include <span>
#include <string>
#include <vector>

#include "odcsim/cost_model.hpp"
#include "odcsim/partition.hpp"

namespace odcsim {

enum class Scheme { Collective, Odc };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

// Analytic, compute-only runtime of one optimizer step. Communication lives
// in the commsim module; the bubble rate here is the packing-algorithm
// estimate.
struct RuntimeReport {
    Scheme scheme = Scheme::Collective;
    double total_time = 0.0;
    std::vector<double> per_device_busy;
    double bubble_rate = 0.0;  // 1 - sum(busy) / (D * total_time)
    double samples_per_time = 0.0;
    std::int64_t sample_count = 0;
    int steps = 1;
};

// Per-layer barriers: every microbatch slot advances at the pace of the
// slowest device, so total = L * sum_m max_d cost(m, d). EqualMicro only.
RuntimeReport runtime_collective(const BatchingSolution& sol, const CostModel& cost);

// One barrier per minibatch: devices run their own microbatch queues, so
// total = max_d of the per-device busy time.
RuntimeReport runtime_odc(const BatchingSolution& sol, const CostModel& cost);

// Idle fraction caused by imbalance. Fails on zero total time.
double bubble_rate(const RuntimeReport& report);

// collective total / ODC total.
double acceleration_ratio(const RuntimeReport& coll, const RuntimeReport& odc);

// Sum per-step reports into one run-level report (same scheme and D).
RuntimeReport aggregate_reports(std::span<const RuntimeReport> reports);

}  // namespace odcsim

#endif  // ODCSIM_RUNTIME_HPP
