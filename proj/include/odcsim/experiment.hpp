#ifndef ODCSIM_EXPERIMENT_HPP
#define ODCSIM_EXPERIMENT_HPP

#include <vector>

#include <nlohmann/json.hpp>

#include "odcsim/config.hpp"

namespace odcsim {

struct StepResult {
    int step = 0;
    bool partial = false;
    RuntimeReport analytic;
    RuntimeReport simulated;
    double exposed_comm_max = 0.0;  // worst device, simulated
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<StepResult> steps;
    RuntimeReport analytic_total;
    RuntimeReport simulated_total;
    VolumeReport gather_volume;  // per client, per layer op
    VolumeReport reduce_volume;
    double exposed_comm_total = 0.0;  // worst device, summed over steps
    std::vector<std::int64_t> dropped_ids;
    WorkloadStats workload_stats;
};

// Plans every optimizer step and evaluates both the analytic runtime and the
// communication-aware simulation under the configured scheme.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// One sweep point: the same LB-Micro plan costed under both schemes, which
// makes the acceleration ratio a pure bubble-rate comparison.
struct SweepRow {
    double value = 0.0;
    double collective_total = 0.0;
    double odc_total = 0.0;
    double acceleration = 0.0;
    double collective_bubble = 0.0;
    double odc_bubble = 0.0;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 1);

nlohmann::json experiment_to_json(const ExperimentReport& report);
nlohmann::json sweep_to_json(const SweepSpec& spec, const std::vector<SweepRow>& rows);

// Serializes a plan for the `partition` subcommand: device -> microbatches
// -> sample ids.
nlohmann::json solutions_to_json(const PlanResult& plan_result);

}  // namespace odcsim

#endif  // ODCSIM_EXPERIMENT_HPP
