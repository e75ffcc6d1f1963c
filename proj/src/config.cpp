#include "odcsim/config.hpp"

#include <fstream>

namespace odcsim {

void ExperimentConfig::validate() const {
    cluster.validate();
    cost_model().validate();
    if (minibatch_size < 1) throw ParamError("minibatch_size must be >= 1");
    if (!(packing_ratio >= 1.0)) throw ParamError("packing_ratio must be >= 1");
    if (strategy == Strategy::LbMini && scheme == Scheme::Collective)
        throw ParamError("lb-mini produces per-device microbatch counts and applies only to the "
                         "odc scheme");
    if (sharding == ShardingMode::Hybrid && cluster.devices == cluster.per_node)
        throw ParamError("hybrid sharding requires a multi-node cluster (devices > per_node)");
    if (format != "json" && format != "csv" && format != "md")
        throw ParamError("format must be json|csv|md");
    if (workload_path.empty()) {
        parse_dist_spec(workload_spec);
        if (workload_n < 1) throw ParamError("workload n must be >= 1");
        if (workload_cap < 1) throw ParamError("workload cap must be >= 1");
    }
    if (!(time_per_cost_unit > 0.0)) throw ParamError("time_per_cost_unit must be > 0");
    if (!(backward_factor > 0.0)) throw ParamError("backward_factor must be > 0");
}

Workload ExperimentConfig::build_workload() const {
    if (!workload_path.empty()) return load_lengths_file(workload_path);
    return generate_synthetic(parse_dist_spec(workload_spec), workload_n, workload_cap, seed);
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("config must be a JSON object");
    ExperimentConfig cfg;
    if (auto it = j.find("workload"); it != j.end()) {
        const auto& w = *it;
        read_field(w, "path", cfg.workload_path);
        read_field(w, "spec", cfg.workload_spec);
        read_field(w, "n", cfg.workload_n);
        read_field(w, "cap", cfg.workload_cap);
    }
    if (auto it = j.find("cluster"); it != j.end()) {
        const auto& c = *it;
        read_field(c, "devices", cfg.cluster.devices);
        read_field(c, "per_node", cfg.cluster.per_node);
        read_field(c, "shard_elems", cfg.cluster.shard_elems);
        read_field(c, "elem_bytes", cfg.cluster.elem_bytes);
        read_field(c, "intra_bw", cfg.cluster.intra_bw);
        read_field(c, "inter_bw", cfg.cluster.inter_bw);
        read_field(c, "layers", cfg.cluster.layers);
    }
    if (auto it = j.find("cost"); it != j.end()) {
        read_field(*it, "alpha", cfg.alpha);
        read_field(*it, "beta", cfg.beta);
    }
    std::string strategy = strategy_name(cfg.strategy);
    std::string scheme = scheme_name(cfg.scheme);
    std::string sharding = sharding_name(cfg.sharding);
    read_field(j, "strategy", strategy);
    read_field(j, "scheme", scheme);
    read_field(j, "sharding", sharding);
    cfg.strategy = parse_strategy(strategy);
    cfg.scheme = parse_scheme(scheme);
    cfg.sharding = parse_sharding(sharding);
    read_field(j, "minibatch_size", cfg.minibatch_size);
    read_field(j, "packing_ratio", cfg.packing_ratio);
    read_field(j, "seed", cfg.seed);
    read_field(j, "format", cfg.format);
    read_field(j, "time_per_cost_unit", cfg.time_per_cost_unit);
    read_field(j, "backward_factor", cfg.backward_factor);
    cfg.validate();
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["workload"] = {{"spec", cfg.workload_spec}, {"n", cfg.workload_n}, {"cap", cfg.workload_cap}};
    if (!cfg.workload_path.empty()) j["workload"]["path"] = cfg.workload_path;
    j["cluster"] = {{"devices", cfg.cluster.devices},   {"per_node", cfg.cluster.per_node},
                    {"shard_elems", cfg.cluster.shard_elems}, {"elem_bytes", cfg.cluster.elem_bytes},
                    {"intra_bw", cfg.cluster.intra_bw}, {"inter_bw", cfg.cluster.inter_bw},
                    {"layers", cfg.cluster.layers}};
    j["cost"] = {{"alpha", cfg.alpha}, {"beta", cfg.beta}};
    j["strategy"] = strategy_name(cfg.strategy);
    j["scheme"] = scheme_name(cfg.scheme);
    j["sharding"] = sharding_name(cfg.sharding);
    j["minibatch_size"] = cfg.minibatch_size;
    j["packing_ratio"] = cfg.packing_ratio;
    j["seed"] = cfg.seed;
    j["format"] = cfg.format;
    j["time_per_cost_unit"] = cfg.time_per_cost_unit;
    j["backward_factor"] = cfg.backward_factor;
    return j;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "minibatch-size") return SweepAxis::MinibatchSize;
    if (name == "max-length-ratio") return SweepAxis::MaxLengthRatio;
    if (name == "packing-ratio") return SweepAxis::PackingRatio;
    if (name == "devices") return SweepAxis::Devices;
    throw ParamError("unknown sweep axis '" + name +
                     "' (expected minibatch-size|max-length-ratio|packing-ratio|devices)");
}

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::MinibatchSize: return "minibatch-size";
        case SweepAxis::MaxLengthRatio: return "max-length-ratio";
        case SweepAxis::PackingRatio: return "packing-ratio";
        case SweepAxis::Devices: return "devices";
    }
    throw InvariantError("unreachable axis");
}

void SweepSpec::validate() const {
    base.validate();
    if (values.empty()) throw ParamError("sweep values must be non-empty");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1]))
            throw ParamError("sweep values must be strictly increasing");
    }
    for (double v : values) {
        if (axis == SweepAxis::MinibatchSize || axis == SweepAxis::Devices) {
            if (v < 1.0 || v != static_cast<double>(static_cast<std::int64_t>(v)))
                throw ParamError("axis '" + sweep_axis_name(axis) + "' needs positive integers");
        } else if (!(v > 0.0)) {
            throw ParamError("axis '" + sweep_axis_name(axis) + "' needs positive values");
        }
        if (axis == SweepAxis::PackingRatio && v < 1.0)
            throw ParamError("packing ratios below 1 are infeasible");
    }
}

}  // namespace odcsim
