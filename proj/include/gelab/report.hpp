#ifndef GELAB_REPORT_HPP
#define GELAB_REPORT_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gelab {

/// One measurement of one run.
struct RawRecord {
    std::string dataset;
    std::string model;
    int run = 0;
    std::string task;
    std::string probe;   // "-" when not applicable
    std::string target;  // feature name, "labels", or "-"
    std::string metric;
    double value = 0.0;
};

/// CSV: dataset,model,run,task,probe,target,metric,value (%.17g values).
void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records);
std::vector<RawRecord> read_raw_csv(std::istream& in);

/// Deterministic ordering used for the raw CSV.
void sort_records(std::vector<RawRecord>& records);

struct CellKey {
    std::string dataset, model, task, probe, target, metric;
    auto operator<=>(const CellKey&) const = default;
};

struct CellValue {
    double mean = 0.0;
    double stddev = 0.0;  // sample std over runs
    int count = 0;
    bool complete = true;  // count == expected runs
};

using ReportTable = std::map<CellKey, CellValue>;

/// Mean and sample standard deviation per cell; cells with fewer than
/// `expected_runs` values are marked incomplete.
ReportTable aggregate_runs(const std::vector<RawRecord>& records, int expected_runs);

void write_aggregated_csv(std::ostream& out, const ReportTable& table);

/// True for error-like metrics where smaller wins (mse, mae, db).
bool lower_is_better(const std::string& metric);

/// One file per (task, dataset) pair under `out_dir`, as CSV and markdown.
/// Markdown bolds the best complete score per metric column.
std::vector<std::string> emit_reports(const ReportTable& table, const std::string& out_dir);

}  // namespace gelab

#endif
