#ifndef ODCSIM_REPORT_HPP
#define ODCSIM_REPORT_HPP

#include <string>
#include <vector>

#include "odcsim/experiment.hpp"

namespace odcsim {

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat parse_format(const std::string& name);

// A flat table with a fixed, documented column set.
struct ReportTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

// Shortest round-trip decimal form, locale-independent.
std::string format_number(double v);

// json: array of row objects; csv: header + rows; md: pipe table.
std::string emit_report(const ReportTable& table, ReportFormat format);

// Timing-table layout: strategy, scheme, minibs first, metrics after.
// Columns: strategy, scheme, minibs, step, total_time, bubble_rate,
// samples_per_time, sim_total_time, sim_bubble_rate, exposed_comm,
// intra_elems, inter_elems.
ReportTable experiment_table(const ExperimentReport& report);

// Columns: axis, value, collective_total, odc_total, acceleration,
// collective_bubble, odc_bubble.
ReportTable sweep_table(const SweepSpec& spec, const std::vector<SweepRow>& rows);

// Columns: scheme, op, intra, inter, total.
ReportTable volume_table(const ClusterSpec& cluster);

}  // namespace odcsim

#endif  // ODCSIM_REPORT_HPP
