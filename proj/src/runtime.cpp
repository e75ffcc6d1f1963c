#include "odcsim/runtime.hpp"

#include <algorithm>

namespace odcsim {

Scheme parse_scheme(const std::string& name) {
    if (name == "collective") return Scheme::Collective;
    if (name == "odc") return Scheme::Odc;
    throw ParamError("unknown scheme '" + name + "' (expected collective|odc)");
}

std::string scheme_name(Scheme s) {
    return s == Scheme::Collective ? "collective" : "odc";
}

namespace {

double mb_cost(const CostModel& cost, const Microbatch& mb) {
    return mb.empty() ? 0.0 : microbatch_cost(cost, mb.lengths);
}

std::vector<double> busy_per_device(const BatchingSolution& sol, const CostModel& cost) {
    std::vector<double> busy;
    busy.reserve(sol.per_device.size());
    for (const auto& dev : sol.per_device) {
        double sum = 0.0;
        for (const Microbatch& mb : dev) sum += mb_cost(cost, mb);
        busy.push_back(sum * static_cast<double>(cost.layers));
    }
    return busy;
}

RuntimeReport finish_report(Scheme scheme, const BatchingSolution& sol, double total,
                            std::vector<double> busy) {
    if (!(total > 0.0)) throw ParamError("degenerate solution: zero total runtime");
    RuntimeReport r;
    r.scheme = scheme;
    r.total_time = total;
    r.per_device_busy = std::move(busy);
    double busy_sum = 0.0;
    for (double b : r.per_device_busy) busy_sum += b;
    r.bubble_rate = 1.0 - busy_sum / (static_cast<double>(r.per_device_busy.size()) * total);
    r.sample_count = sol.sample_count();
    r.samples_per_time = static_cast<double>(r.sample_count) / total;
    r.steps = 1;
    return r;
}

}  // namespace

RuntimeReport runtime_collective(const BatchingSolution& sol, const CostModel& cost) {
    cost.validate();
    if (sol.mode != BatchingMode::EqualMicro)
        throw ModeError("per-layer collectives require a uniform microbatch count; "
                        "minibatch-level balancing applies only to ODC");
    if (sol.per_device.empty()) throw ParamError("empty solution");
    const std::size_t m_count = sol.per_device.front().size();
    for (const auto& dev : sol.per_device) {
        if (dev.size() != m_count)
            throw ModeError("EqualMicro solution has differing per-device microbatch counts");
    }
    double total = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        double worst = 0.0;
        for (const auto& dev : sol.per_device) worst = std::max(worst, mb_cost(cost, dev[m]));
        total += worst;
    }
    total *= static_cast<double>(cost.layers);
    return finish_report(Scheme::Collective, sol, total, busy_per_device(sol, cost));
}

RuntimeReport runtime_odc(const BatchingSolution& sol, const CostModel& cost) {
    cost.validate();
    if (sol.per_device.empty()) throw ParamError("empty solution");
    std::vector<double> busy = busy_per_device(sol, cost);
    double total = *std::max_element(busy.begin(), busy.end());
    return finish_report(Scheme::Odc, sol, total, std::move(busy));
}

double bubble_rate(const RuntimeReport& report) {
    if (!(report.total_time > 0.0)) throw ParamError("bubble rate undefined for zero total time");
    double busy_sum = 0.0;
    for (double b : report.per_device_busy) busy_sum += b;
    return 1.0 - busy_sum / (static_cast<double>(report.per_device_busy.size()) * report.total_time);
}

double acceleration_ratio(const RuntimeReport& coll, const RuntimeReport& odc) {
    if (!(odc.total_time > 0.0)) throw ParamError("acceleration ratio undefined for zero ODC time");
    return coll.total_time / odc.total_time;
}

RuntimeReport aggregate_reports(std::span<const RuntimeReport> reports) {
    if (reports.empty()) throw ParamError("nothing to aggregate");
    RuntimeReport agg;
    agg.scheme = reports.front().scheme;
    agg.per_device_busy.assign(reports.front().per_device_busy.size(), 0.0);
    agg.steps = 0;
    for (const RuntimeReport& r : reports) {
        if (r.per_device_busy.size() != agg.per_device_busy.size())
            throw ParamError("cannot aggregate reports over differing device counts");
        agg.total_time += r.total_time;
        for (std::size_t d = 0; d < agg.per_device_busy.size(); ++d)
            agg.per_device_busy[d] += r.per_device_busy[d];
        agg.sample_count += r.sample_count;
        agg.steps += r.steps;
    }
    double busy_sum = 0.0;
    for (double b : agg.per_device_busy) busy_sum += b;
    agg.bubble_rate =
        1.0 - busy_sum / (static_cast<double>(agg.per_device_busy.size()) * agg.total_time);
    agg.samples_per_time = static_cast<double>(agg.sample_count) / agg.total_time;
    return agg;
}

}  // namespace odcsim
