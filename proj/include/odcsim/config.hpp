#ifndef ODCSIM_CONFIG_HPP
#define ODCSIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "odcsim/commsim.hpp"
#include "odcsim/cost_model.hpp"
#include "odcsim/partition.hpp"
#include "odcsim/runtime.hpp"
#include "odcsim/workload.hpp"

namespace odcsim {

// One experiment = one (workload, cluster, strategy, scheme) combination.
// Defaults mirror the parametric study's golden setting: minibatch 4,
// 8 devices, packing ratio 1, heavy-tailed lengths capped at 64Ki.
struct ExperimentConfig {
    std::string workload_path;  // newline-separated lengths; wins over spec if set
    std::string workload_spec = "lognormal:mu=8,sigma=1.5";
    std::int64_t workload_n = 2048;
    Tokens workload_cap = 65536;

    ClusterSpec cluster{8, 8, 5.0e7, 2.0, 3.0e11, 1.25e10, 4};
    double alpha = 1.0;
    double beta = 0.0;

    Strategy strategy = Strategy::LbMicro;
    Scheme scheme = Scheme::Collective;
    ShardingMode sharding = ShardingMode::Full;
    int minibatch_size = 4;
    double packing_ratio = 1.0;
    std::uint64_t seed = 0;
    std::string format = "json";
    double time_per_cost_unit = 1.0;
    double backward_factor = 1.0;

    void validate() const;
    CostModel cost_model() const { return CostModel{alpha, beta, cluster.layers}; }
    Workload build_workload() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

enum class SweepAxis { MinibatchSize, MaxLengthRatio, PackingRatio, Devices };

SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

// A one-factor-at-a-time study around a base config.
struct SweepSpec {
    SweepAxis axis = SweepAxis::MinibatchSize;
    std::vector<double> values;
    ExperimentConfig base;

    void validate() const;
};

}  // namespace odcsim

#endif  // ODCSIM_CONFIG_HPP
