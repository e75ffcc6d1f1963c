#include "odcsim/commsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace odcsim {

void ClusterSpec::validate() const {
    if (devices < 1 || per_node < 1) throw ParamError("cluster requires devices >= 1, per_node >= 1");
    if (devices % per_node != 0)
        throw ParamError("per_node (" + std::to_string(per_node) + ") must divide devices (" +
                         std::to_string(devices) + ")");
    if (!(shard_elems >= 1.0)) throw ParamError("shard_elems must be >= 1");
    if (!(elem_bytes > 0.0)) throw ParamError("elem_bytes must be > 0");
    if (!(intra_bw > 0.0) || !(inter_bw > 0.0)) throw ParamError("bandwidths must be > 0");
    if (layers < 1) throw ParamError("layers must be >= 1");
}

CommScheme parse_comm_scheme(const std::string& name) {
    if (name == "collective") return CommScheme::CollectiveRing;
    if (name == "odc") return CommScheme::Odc;
    throw ParamError("unknown scheme '" + name + "' (expected collective|odc)");
}

ShardingMode parse_sharding(const std::string& name) {
    if (name == "full") return ShardingMode::Full;
    if (name == "hybrid") return ShardingMode::Hybrid;
    throw ParamError("unknown sharding '" + name + "' (expected full|hybrid)");
}

std::string sharding_name(ShardingMode s) {
    return s == ShardingMode::Full ? "full" : "hybrid";
}

VolumeReport comm_volume(CommScheme scheme, CommOp /*op*/, const ClusterSpec& cluster) {
    cluster.validate();
    const double d = static_cast<double>(cluster.devices);
    const double g = static_cast<double>(cluster.per_node);
    const double k = cluster.shard_elems;
    VolumeReport v;
    if (cluster.devices == cluster.per_node) {
        // One node: all (D-1)*K element transfers are intra by necessity.
        v.intra = (d - 1.0) * k;
        v.inter = 0.0;
    } else if (scheme == CommScheme::CollectiveRing) {
        v.intra = (g - 1.0) * (d - 1.0) * k / g;
        v.inter = (d - 1.0) * k / g;
    } else {
        v.intra = (g - 1.0) * k;
        v.inter = (d - g) * k;
    }
    v.total = v.intra + v.inter;
    return v;
}

VolumeReport hybrid_volume(CommOp /*op*/, const ClusterSpec& cluster) {
    cluster.validate();
    if (cluster.devices == cluster.per_node)
        throw ParamError("hybrid sharding degenerates to full sharding on a single node");
    const double g = static_cast<double>(cluster.per_node);
    // Sharding over G devices instead of D grows each shard by D/G.
    const double grown = cluster.shard_elems * static_cast<double>(cluster.nodes());
    VolumeReport v;
    v.intra = (g - 1.0) * grown;
    v.inter = 0.0;
    v.total = v.intra;
    return v;
}

double comm_time(const VolumeReport& vol, const ClusterSpec& cluster, CommScheme scheme) {
    const double t_intra = vol.intra * cluster.elem_bytes / cluster.intra_bw;
    const double t_inter = vol.inter * cluster.elem_bytes / cluster.inter_bw;
    if (scheme == CommScheme::CollectiveRing) return std::max(t_intra, t_inter);
    return t_intra + t_inter;
}

BufferRequirement buffer_requirement(std::int64_t layer_elems, int devices) {
    if (layer_elems < 1 || devices < 1)
        throw ParamError("buffer_requirement needs layer_elems >= 1 and devices >= 1");
    BufferRequirement b;
    b.per_client = (layer_elems + devices - 1) / devices;
    b.per_server_total = b.per_client * devices;
    return b;
}

namespace {

struct ComputeStep {
    double compute = 0.0;
    bool backward = false;
    int microbatch = 0;
    int layer = 0;
};

std::vector<ComputeStep> device_steps(const std::vector<Microbatch>& mbs, const CostModel& cost,
                                      double fwd_frac, double bwd_frac, double tpcu) {
    std::vector<ComputeStep> steps;
    steps.reserve(mbs.size() * static_cast<std::size_t>(2 * cost.layers));
    for (std::size_t m = 0; m < mbs.size(); ++m) {
        const double c =
            (mbs[m].empty() ? 0.0 : microbatch_cost(cost, mbs[m].lengths)) * tpcu;
        for (int l = 1; l <= cost.layers; ++l)
            steps.push_back({c * fwd_frac, false, static_cast<int>(m), l});
        for (int l = cost.layers; l >= 1; --l)
            steps.push_back({c * bwd_frac, true, static_cast<int>(m), l});
    }
    return steps;
}

void emit_step_events(SimTrace& trace, int device, const ComputeStep& st, double start,
                      double window_start, double t_gather, double t_reduce, double gather_vol,
                      double reduce_vol) {
    trace.events.push_back({device, true, "gather", st.microbatch, st.layer, window_start,
                            window_start + t_gather, gather_vol});
    trace.events.push_back(
        {device, false, st.backward ? "bwd" : "fwd", st.microbatch, st.layer, start,
         start + st.compute, 0.0});
    if (st.backward) {
        trace.events.push_back({device, true, "reduce", st.microbatch, st.layer,
                                start + st.compute, start + st.compute + t_reduce, reduce_vol});
    }
}

}  // namespace

SimResult simulate(const BatchingSolution& sol, const ClusterSpec& cluster, const CostModel& cost,
                   const SimOptions& opts) {
    cluster.validate();
    cost.validate();
    if (cluster.layers != cost.layers)
        throw ParamError("cluster and cost model disagree on the layer count");
    if (sol.per_device.empty()) throw ParamError("empty solution");
    if (static_cast<int>(sol.per_device.size()) != cluster.devices)
        throw ParamError("solution covers " + std::to_string(sol.per_device.size()) +
                         " devices but the cluster has " + std::to_string(cluster.devices));
    if (!(opts.backward_factor > 0.0)) throw ParamError("backward_factor must be > 0");
    if (!(opts.time_per_cost_unit > 0.0)) throw ParamError("time_per_cost_unit must be > 0");

    const bool collective = opts.scheme == CommScheme::CollectiveRing;
    if (collective && sol.mode != BatchingMode::EqualMicro)
        throw ModeError("per-layer collectives require a uniform microbatch count; "
                        "minibatch-level balancing applies only to ODC");

    const VolumeReport gather_vol = opts.sharding == ShardingMode::Hybrid
                                        ? hybrid_volume(CommOp::ParamGather, cluster)
                                        : comm_volume(opts.scheme, CommOp::ParamGather, cluster);
    const VolumeReport reduce_vol = opts.sharding == ShardingMode::Hybrid
                                        ? hybrid_volume(CommOp::GradReduce, cluster)
                                        : comm_volume(opts.scheme, CommOp::GradReduce, cluster);
    const double t_gather = comm_time(gather_vol, cluster, opts.scheme);
    const double t_reduce = comm_time(reduce_vol, cluster, opts.scheme);

    const double fwd_frac = 1.0 / (1.0 + opts.backward_factor);
    const double bwd_frac = 1.0 - fwd_frac;
    const int devices = cluster.devices;

    std::vector<std::vector<ComputeStep>> steps;
    steps.reserve(sol.per_device.size());
    for (const auto& dev : sol.per_device)
        steps.push_back(device_steps(dev, cost, fwd_frac, bwd_frac, opts.time_per_cost_unit));

    SimTrace trace;
    trace.exposed_comm.assign(static_cast<std::size_t>(devices), 0.0);
    std::vector<double> busy(static_cast<std::size_t>(devices), 0.0);
    for (int d = 0; d < devices; ++d)
        for (const ComputeStep& st : steps[static_cast<std::size_t>(d)])
            busy[static_cast<std::size_t>(d)] += st.compute;

    double total = 0.0;
    if (collective) {
        const std::size_t count = steps.front().size();
        for (const auto& s : steps) {
            if (s.size() != count)
                throw ModeError("EqualMicro solution has differing per-device step counts");
        }
        double window_start = 0.0;  // aligned start of the current comm window
        double barrier = 0.0;       // aligned compute start of the current step
        for (std::size_t i = 0; i < count; ++i) {
            double load = t_gather + (i > 0 && steps.front()[i - 1].backward ? t_reduce : 0.0);
            double prev_compute = 0.0;
            if (i > 0) {
                for (int d = 0; d < devices; ++d)
                    prev_compute = std::max(prev_compute, steps[static_cast<std::size_t>(d)][i - 1].compute);
            }
            window_start = barrier;
            barrier += std::max(prev_compute, load);
            const double exposed = std::max(0.0, load - prev_compute);
            for (int d = 0; d < devices; ++d) {
                trace.exposed_comm[static_cast<std::size_t>(d)] += exposed;
                emit_step_events(trace, d, steps[static_cast<std::size_t>(d)][i], barrier,
                                 window_start, t_gather, t_reduce, gather_vol.total,
                                 reduce_vol.total);
            }
        }
        double last = 0.0;
        for (int d = 0; d < devices; ++d)
            last = std::max(last, steps[static_cast<std::size_t>(d)].empty()
                                      ? 0.0
                                      : steps[static_cast<std::size_t>(d)].back().compute);
        total = barrier + last;
    } else {
        for (int d = 0; d < devices; ++d) {
            const auto& dev = steps[static_cast<std::size_t>(d)];
            double window_start = 0.0;
            double clock = 0.0;
            for (std::size_t i = 0; i < dev.size(); ++i) {
                double load = t_gather + (i > 0 && dev[i - 1].backward ? t_reduce : 0.0);
                double prev_compute = i > 0 ? dev[i - 1].compute : 0.0;
                window_start = clock;
                clock += std::max(prev_compute, load);
                trace.exposed_comm[static_cast<std::size_t>(d)] +=
                    std::max(0.0, load - prev_compute);
                emit_step_events(trace, d, dev[i], clock, window_start, t_gather, t_reduce,
                                 gather_vol.total, reduce_vol.total);
            }
            if (!dev.empty()) clock += dev.back().compute;
            total = std::max(total, clock);
        }
    }

    trace.total_time = total;

    if (!(total > 0.0)) throw ParamError("degenerate solution: zero simulated runtime");
    RuntimeReport report;
    report.scheme = collective ? Scheme::Collective : Scheme::Odc;
    report.total_time = total;
    report.per_device_busy = busy;
    double busy_sum = 0.0;
    for (double b : busy) busy_sum += b;
    report.bubble_rate = 1.0 - busy_sum / (static_cast<double>(devices) * total);
    report.sample_count = sol.sample_count();
    report.samples_per_time = static_cast<double>(report.sample_count) / total;
    report.steps = 1;
    return SimResult{std::move(trace), std::move(report)};
}

std::string to_chrome_trace(const SimTrace& trace) {
    nlohmann::json events = nlohmann::json::array();
    for (const TraceEvent& e : trace.events) {
        nlohmann::json j;
        j["name"] = e.kind + " m" + std::to_string(e.microbatch) + " l" + std::to_string(e.layer);
        j["cat"] = e.is_comm ? "comm" : "compute";
        j["ph"] = "X";
        j["pid"] = e.device;
        j["tid"] = e.is_comm ? 1 : 0;
        j["ts"] = e.start * 1e6;
        j["dur"] = (e.end - e.start) * 1e6;
        if (e.is_comm) j["args"]["volume_elems"] = e.volume;
        events.push_back(std::move(j));
    }
    nlohmann::json root;
    root["traceEvents"] = std::move(events);
    root["displayTimeUnit"] = "ms";
    return root.dump(2);
}

std::string trace_to_json(const SimTrace& trace) {
    nlohmann::json events = nlohmann::json::array();
    for (const TraceEvent& e : trace.events) {
        events.push_back({{"device", e.device},
                          {"kind", e.kind},
                          {"microbatch", e.microbatch},
                          {"layer", e.layer},
                          {"start", e.start},
                          {"end", e.end},
                          {"volume_elems", e.volume}});
    }
    nlohmann::json root{{"events", std::move(events)},
                        {"total_time", trace.total_time},
                        {"exposed_comm", trace.exposed_comm}};
    return root.dump(2);
}

}  // namespace odcsim
