#include "odcsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace odcsim {

namespace {

RuntimeReport analytic_report(const BatchingSolution& sol, const CostModel& cost, Scheme scheme) {
    return scheme == Scheme::Collective ? runtime_collective(sol, cost) : runtime_odc(sol, cost);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Workload w = cfg.build_workload();
    const CostModel cost = cfg.cost_model();
    const MemoryBudget budget{token_budget(w.max_length(), cfg.packing_ratio)};

    PlanResult planned = plan(cfg.strategy, w, cfg.cluster.devices, cfg.minibatch_size, budget,
                              cost, cfg.seed);

    SimOptions opts;
    opts.scheme = cfg.scheme == Scheme::Collective ? CommScheme::CollectiveRing : CommScheme::Odc;
    opts.sharding = cfg.sharding;
    opts.time_per_cost_unit = cfg.time_per_cost_unit;
    opts.backward_factor = cfg.backward_factor;

    ExperimentReport report;
    report.config = cfg;
    report.dropped_ids = planned.dropped_ids;
    report.workload_stats = summarize(w);
    report.gather_volume = cfg.sharding == ShardingMode::Hybrid
                               ? hybrid_volume(CommOp::ParamGather, cfg.cluster)
                               : comm_volume(opts.scheme, CommOp::ParamGather, cfg.cluster);
    report.reduce_volume = cfg.sharding == ShardingMode::Hybrid
                               ? hybrid_volume(CommOp::GradReduce, cfg.cluster)
                               : comm_volume(opts.scheme, CommOp::GradReduce, cfg.cluster);

    std::vector<RuntimeReport> analytic;
    std::vector<RuntimeReport> simulated;
    for (const BatchingSolution& sol : planned.steps) {
        StepResult step;
        step.step = sol.step_index;
        step.partial = sol.partial;
        step.analytic = analytic_report(sol, cost, cfg.scheme);
        SimResult sim = simulate(sol, cfg.cluster, cost, opts);
        step.simulated = sim.report;
        step.exposed_comm_max =
            *std::max_element(sim.trace.exposed_comm.begin(), sim.trace.exposed_comm.end());
        report.exposed_comm_total += step.exposed_comm_max;
        analytic.push_back(step.analytic);
        simulated.push_back(step.simulated);
        report.steps.push_back(std::move(step));
    }
    report.analytic_total = aggregate_reports(analytic);
    report.simulated_total = aggregate_reports(simulated);
    return report;
}

namespace {

ExperimentConfig config_for_value(const SweepSpec& spec, double value) {
    ExperimentConfig cfg = spec.base;
    switch (spec.axis) {
        case SweepAxis::MinibatchSize:
            cfg.minibatch_size = static_cast<int>(value);
            break;
        case SweepAxis::PackingRatio:
            cfg.packing_ratio = value;
            break;
        case SweepAxis::Devices:
            cfg.cluster.devices = static_cast<int>(value);
            if (cfg.cluster.per_node > cfg.cluster.devices)
                cfg.cluster.per_node = cfg.cluster.devices;
            break;
        case SweepAxis::MaxLengthRatio:
            break;  // applied to the workload, not the config
    }
    return cfg;
}

SweepRow evaluate_point(const SweepSpec& spec, double value) {
    ExperimentConfig cfg = config_for_value(spec, value);
    cfg.strategy = Strategy::LbMicro;
    cfg.validate();

    Workload w = cfg.build_workload();
    if (spec.axis == SweepAxis::MaxLengthRatio) w = scale_lengths(w, value);
    const CostModel cost = cfg.cost_model();
    const MemoryBudget budget{token_budget(w.max_length(), cfg.packing_ratio)};
    PlanResult planned = plan(Strategy::LbMicro, w, cfg.cluster.devices, cfg.minibatch_size,
                              budget, cost, cfg.seed);

    std::vector<RuntimeReport> coll;
    std::vector<RuntimeReport> odc;
    for (const BatchingSolution& sol : planned.steps) {
        coll.push_back(runtime_collective(sol, cost));
        odc.push_back(runtime_odc(sol, cost));
    }
    RuntimeReport coll_total = aggregate_reports(coll);
    RuntimeReport odc_total = aggregate_reports(odc);

    SweepRow row;
    row.value = value;
    row.collective_total = coll_total.total_time;
    row.odc_total = odc_total.total_time;
    row.acceleration = acceleration_ratio(coll_total, odc_total);
    row.collective_bubble = coll_total.bubble_rate;
    row.odc_bubble = odc_total.bubble_rate;
    return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
    spec.validate();
    if (jobs < 1) throw ParamError("jobs must be >= 1");
    std::vector<SweepRow> rows(spec.values.size());
    if (jobs == 1 || spec.values.size() <= 1) {
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            rows[i] = evaluate_point(spec, spec.values[i]);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= spec.values.size()) return;
            try {
                rows[i] = evaluate_point(spec, spec.values[i]);
            } catch (...) {
                std::lock_guard lk(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), spec.values.size());
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

namespace {

nlohmann::json runtime_to_json(const RuntimeReport& r) {
    return {{"scheme", scheme_name(r.scheme)},
            {"total_time", r.total_time},
            {"per_device_busy", r.per_device_busy},
            {"bubble_rate", r.bubble_rate},
            {"samples_per_time", r.samples_per_time},
            {"sample_count", r.sample_count},
            {"steps", r.steps}};
}

nlohmann::json volume_to_json(const VolumeReport& v) {
    return {{"intra", v.intra}, {"inter", v.inter}, {"total", v.total}};
}

}  // namespace

nlohmann::json experiment_to_json(const ExperimentReport& report) {
    nlohmann::json steps = nlohmann::json::array();
    for (const StepResult& s : report.steps) {
        steps.push_back({{"step", s.step},
                         {"partial", s.partial},
                         {"analytic", runtime_to_json(s.analytic)},
                         {"simulated", runtime_to_json(s.simulated)},
                         {"exposed_comm_max", s.exposed_comm_max}});
    }
    const WorkloadStats& ws = report.workload_stats;
    return {{"config", config_to_json(report.config)},
            {"workload",
             {{"count", ws.count},
              {"min", ws.min},
              {"max", ws.max},
              {"mean", ws.mean},
              {"p50", ws.p50},
              {"p90", ws.p90},
              {"p99", ws.p99},
              {"total_tokens", ws.total}}},
            {"steps", steps},
            {"analytic_total", runtime_to_json(report.analytic_total)},
            {"simulated_total", runtime_to_json(report.simulated_total)},
            {"gather_volume", volume_to_json(report.gather_volume)},
            {"reduce_volume", volume_to_json(report.reduce_volume)},
            {"exposed_comm_total", report.exposed_comm_total},
            {"dropped_ids", report.dropped_ids}};
}

nlohmann::json sweep_to_json(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        out.push_back({{"axis", sweep_axis_name(spec.axis)},
                       {"value", r.value},
                       {"collective_total", r.collective_total},
                       {"odc_total", r.odc_total},
                       {"acceleration", r.acceleration},
                       {"collective_bubble", r.collective_bubble},
                       {"odc_bubble", r.odc_bubble}});
    }
    return out;
}

nlohmann::json solutions_to_json(const PlanResult& plan_result) {
    nlohmann::json steps = nlohmann::json::array();
    for (const BatchingSolution& sol : plan_result.steps) {
        nlohmann::json devices = nlohmann::json::array();
        for (const auto& dev : sol.per_device) {
            nlohmann::json mbs = nlohmann::json::array();
            for (const Microbatch& mb : dev) {
                mbs.push_back({{"sample_ids", mb.sample_ids}, {"token_sum", mb.token_sum}});
            }
            devices.push_back(std::move(mbs));
        }
        steps.push_back({{"step", sol.step_index},
                         {"partial", sol.partial},
                         {"mode", sol.mode == BatchingMode::EqualMicro ? "equal-micro" : "variable-micro"},
                         {"minibatch_size_per_device", sol.minibatch_size_per_device},
                         {"per_device", std::move(devices)}});
    }
    return {{"steps", std::move(steps)}, {"dropped_ids", plan_result.dropped_ids}};
}

}  // namespace odcsim
