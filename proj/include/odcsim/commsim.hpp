#ifndef ODCSIM_COMMSIM_HPP
#define ODCSIM_COMMSIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "odcsim/cost_model.hpp"
#include "odcsim/partition.hpp"
#include "odcsim/runtime.hpp"

namespace odcsim {

// D devices in nodes of G, each owning a per-layer shard of K elements.
struct ClusterSpec {
    int devices = 8;
    int per_node = 8;
    double shard_elems = 1.0;  // K, per layer
    double elem_bytes = 2.0;
    double intra_bw = 3.0e11;  // bytes per time unit
    double inter_bw = 1.25e10;
    int layers = 1;

    void validate() const;
    int nodes() const { return devices / per_node; }
};

enum class CommScheme { CollectiveRing, Odc };
enum class CommOp { ParamGather, GradReduce };
enum class ShardingMode { Full, Hybrid };

CommScheme parse_comm_scheme(const std::string& name);
ShardingMode parse_sharding(const std::string& name);
std::string sharding_name(ShardingMode s);

// Per-client communication volume, in elements.
struct VolumeReport {
    double intra = 0.0;
    double inter = 0.0;
    double total = 0.0;
};

// Ring collectives move (G-1)/G*(D-1)*K intra-node and (D-1)*K/G inter-node
// per client; ODC point-to-point moves (G-1)*K intra and (D-G)*K inter. On a
// single node the ring's inter share is routed intra, since one-node rings
// have no cross-node hop. Both ops share the same table.
VolumeReport comm_volume(CommScheme scheme, CommOp op, const ClusterSpec& cluster);

// Node-local sharding: shards grow to K*D/G and all gather/scatter traffic
// stays inside the node. Only meaningful multi-node.
VolumeReport hybrid_volume(CommOp op, const ClusterSpec& cluster);

// Ring collectives pipeline the tiers (max); an ODC client's transfers are
// serialized (sum).
double comm_time(const VolumeReport& vol, const ClusterSpec& cluster, CommScheme scheme);

// Appendix-style server staging bound: one slot of ceil(M/N) per client.
struct BufferRequirement {
    std::int64_t per_client = 0;
    std::int64_t per_server_total = 0;
};
BufferRequirement buffer_requirement(std::int64_t layer_elems, int devices);

struct TraceEvent {
    int device = 0;
    bool is_comm = false;
    std::string kind;  // fwd | bwd | gather | reduce
    int microbatch = 0;
    int layer = 0;
    double start = 0.0;
    double end = 0.0;
    double volume = 0.0;  // elements, comm events only
};

struct SimTrace {
    std::vector<TraceEvent> events;
    double total_time = 0.0;
    std::vector<double> exposed_comm;  // per device, comm time not hidden by compute
};

struct SimOptions {
    CommScheme scheme = CommScheme::CollectiveRing;
    ShardingMode sharding = ShardingMode::Full;
    double time_per_cost_unit = 1.0;
    // Backward compute per layer relative to forward. Forward and backward
    // are normalized to sum to the analytic per-layer cost, so this knob
    // cancels out of totals and only shifts where comm can hide.
    double backward_factor = 1.0;
};

struct SimResult {
    SimTrace trace;
    RuntimeReport report;
};

// Event-driven refinement of the analytic runtime. Per microbatch and layer,
// the forward pass needs one parameter gather and the backward pass one
// gather plus one gradient reduce. A step's gather prefetches under the
// previous compute step (one layer deep); a backward step's reduce rides the
// following window on the same serialized channel. Collectives align all
// devices at every layer step; ODC devices run free until the minibatch
// barrier. The trailing gradient push drains during the (unmodeled)
// optimizer step.
SimResult simulate(const BatchingSolution& sol, const ClusterSpec& cluster, const CostModel& cost,
                   const SimOptions& opts);

// Chrome trace viewer JSON (chrome://tracing / perfetto).
std::string to_chrome_trace(const SimTrace& trace);

// Plain event JSON: {events: [...], total_time, exposed_comm}.
std::string trace_to_json(const SimTrace& trace);

}  // namespace odcsim

#endif  // ODCSIM_COMMSIM_HPP
