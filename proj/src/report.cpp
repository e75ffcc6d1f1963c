#include "odcsim/report.hpp"

#include <charconv>
#include <sstream>

namespace odcsim {

ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "md") return ReportFormat::Markdown;
    throw ParamError("unknown format '" + name + "' (expected json|csv|md)");
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw InvariantError("number formatting failed");
    return std::string(buf, ptr);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string emit_json(const ReportTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj;
        for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = row[i];
        rows.push_back(std::move(obj));
    }
    return rows.dump(2) + "\n";
}

std::string emit_csv(const ReportTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string emit_markdown(const ReportTable& table) {
    std::ostringstream out;
    out << '|';
    for (const auto& c : table.columns) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& row : table.rows) {
        out << '|';
        for (const auto& cell : row) out << ' ' << cell << " |";
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string emit_report(const ReportTable& table, ReportFormat format) {
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw InvariantError("report row width does not match the column set");
    }
    switch (format) {
        case ReportFormat::Json: return emit_json(table);
        case ReportFormat::Csv: return emit_csv(table);
        case ReportFormat::Markdown: return emit_markdown(table);
    }
    throw InvariantError("unreachable format");
}

ReportTable experiment_table(const ExperimentReport& report) {
    ReportTable t;
    t.columns = {"strategy",        "scheme",          "minibs",       "step",
                 "total_time",      "bubble_rate",     "samples_per_time",
                 "sim_total_time",  "sim_bubble_rate", "exposed_comm", "intra_elems",
                 "inter_elems"};
    const std::string strategy = strategy_name(report.config.strategy);
    const std::string scheme = scheme_name(report.config.scheme);
    const std::string minibs = std::to_string(report.config.minibatch_size);
    const std::string intra = format_number(report.gather_volume.intra);
    const std::string inter = format_number(report.gather_volume.inter);
    auto add_row = [&](const std::string& step, const RuntimeReport& a, const RuntimeReport& s,
                       double exposed) {
        t.rows.push_back({strategy, scheme, minibs, step, format_number(a.total_time),
                          format_number(a.bubble_rate), format_number(a.samples_per_time),
                          format_number(s.total_time), format_number(s.bubble_rate),
                          format_number(exposed), intra, inter});
    };
    for (const StepResult& s : report.steps)
        add_row(std::to_string(s.step), s.analytic, s.simulated, s.exposed_comm_max);
    add_row("total", report.analytic_total, report.simulated_total, report.exposed_comm_total);
    return t;
}

ReportTable sweep_table(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    ReportTable t;
    t.columns = {"axis",         "value",      "collective_total", "odc_total",
                 "acceleration", "collective_bubble", "odc_bubble"};
    for (const SweepRow& r : rows) {
        t.rows.push_back({sweep_axis_name(spec.axis), format_number(r.value),
                          format_number(r.collective_total), format_number(r.odc_total),
                          format_number(r.acceleration), format_number(r.collective_bubble),
                          format_number(r.odc_bubble)});
    }
    return t;
}

ReportTable volume_table(const ClusterSpec& cluster) {
    ReportTable t;
    t.columns = {"scheme", "op", "intra", "inter", "total"};
    auto add = [&](const std::string& scheme, const std::string& op, const VolumeReport& v) {
        t.rows.push_back({scheme, op, format_number(v.intra), format_number(v.inter),
                          format_number(v.total)});
    };
    add("collective", "param-gather", comm_volume(CommScheme::CollectiveRing, CommOp::ParamGather, cluster));
    add("collective", "grad-reduce", comm_volume(CommScheme::CollectiveRing, CommOp::GradReduce, cluster));
    add("odc", "param-gather", comm_volume(CommScheme::Odc, CommOp::ParamGather, cluster));
    add("odc", "grad-reduce", comm_volume(CommScheme::Odc, CommOp::GradReduce, cluster));
    if (cluster.devices > cluster.per_node) {
        add("hybrid", "param-gather", hybrid_volume(CommOp::ParamGather, cluster));
        add("hybrid", "grad-reduce", hybrid_volume(CommOp::GradReduce, cluster));
    }
    return t;
}

}  // namespace odcsim
