#include "gelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace gelab {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void sort_records(std::vector<RawRecord>& records) {
    std::sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
        return std::tie(a.dataset, a.model, a.run, a.task, a.probe, a.target, a.metric) <
               std::tie(b.dataset, b.model, b.run, b.task, b.probe, b.target, b.metric);
    });
}

void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records) {
    out << "dataset,model,run,task,probe,target,metric,value\n";
    for (const auto& r : records) {
        out << r.dataset << ',' << r.model << ',' << r.run << ',' << r.task << ',' << r.probe
            << ',' << r.target << ',' << r.metric << ',' << fmt17(r.value) << '\n';
    }
}

std::vector<RawRecord> read_raw_csv(std::istream& in) {
    std::vector<RawRecord> records;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("raw record csv: empty file");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 8) throw std::runtime_error("raw record csv: malformed row: " + line);
        RawRecord r;
        r.dataset = f[0];
        r.model = f[1];
        r.run = std::stoi(f[2]);
        r.task = f[3];
        r.probe = f[4];
        r.target = f[5];
        r.metric = f[6];
        r.value = std::stod(f[7]);
        records.push_back(std::move(r));
    }
    return records;
}

ReportTable aggregate_runs(const std::vector<RawRecord>& records, int expected_runs) {
    std::map<CellKey, std::vector<double>> buckets;
    for (const auto& r : records) {
        buckets[CellKey{r.dataset, r.model, r.task, r.probe, r.target, r.metric}].push_back(r.value);
    }
    ReportTable table;
    for (auto& [key, values] : buckets) {
        CellValue cell;
        cell.count = static_cast<int>(values.size());
        cell.complete = cell.count == expected_runs;
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        if (values.size() > 1) {
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size() - 1);
        }
        cell.mean = mean;
        cell.stddev = std::sqrt(var);
        table.emplace(key, cell);
    }
    return table;
}

void write_aggregated_csv(std::ostream& out, const ReportTable& table) {
    out << "dataset,model,task,probe,target,metric,mean,std,runs,complete\n";
    for (const auto& [k, v] : table) {
        out << k.dataset << ',' << k.model << ',' << k.task << ',' << k.probe << ',' << k.target
            << ',' << k.metric << ',' << fmt17(v.mean) << ',' << fmt17(v.stddev) << ',' << v.count
            << ',' << (v.complete ? 1 : 0) << '\n';
    }
}

bool lower_is_better(const std::string& metric) {
    return metric == "mse" || metric == "mae" || metric == "db";
}

namespace {

struct Column {
    std::string probe, metric;
    auto operator<=>(const Column&) const = default;
};

std::string column_title(const Column& c) {
    if (c.probe == "-") return c.metric;
    return c.probe + " " + c.metric;
}

}  // namespace

std::vector<std::string> emit_reports(const ReportTable& table, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::set<std::pair<std::string, std::string>> groups;  // (task, dataset)
    for (const auto& [k, v] : table) groups.emplace(k.task, k.dataset);

    std::vector<std::string> written;
    for (const auto& [task, dataset] : groups) {
        std::set<std::string> targets, models;
        std::set<Column> columns;
        for (const auto& [k, v] : table) {
            if (k.task != task || k.dataset != dataset) continue;
            targets.insert(k.target);
            models.insert(k.model);
            columns.insert(Column{k.probe, k.metric});
        }

        const std::string base = out_dir + "/" + task + "_" + dataset;
        std::ofstream csv(base + ".csv");
        std::ofstream md(base + ".md");
        csv << "target,model";
        for (const auto& c : columns) {
            csv << ',' << column_title(c) << " mean," << column_title(c) << " std";
        }
        csv << '\n';
        md << "# " << task << " - " << dataset << "\n";

        for (const auto& target : targets) {
            md << "\n## " << target << "\n\n|model|";
            for (const auto& c : columns) md << column_title(c) << '|';
            md << "\n|---|";
            for (std::size_t i = 0; i < columns.size(); ++i) md << "---|";
            md << '\n';

            // best complete value per column
            std::map<Column, std::pair<std::string, double>> best;  // model, value
            for (const auto& c : columns) {
                for (const auto& model : models) {
                    auto it = table.find(CellKey{dataset, model, task, c.probe, target, c.metric});
                    if (it == table.end() || !it->second.complete) continue;
                    const double v = it->second.mean;
                    auto bit = best.find(c);
                    const bool better =
                        bit == best.end() ||
                        (lower_is_better(c.metric) ? v < bit->second.second : v > bit->second.second);
                    if (better) best[c] = {model, v};
                }
            }

            for (const auto& model : models) {
                bool any = false;
                std::ostringstream csv_row, md_row;
                csv_row << target << ',' << model;
                md_row << '|' << model << '|';
                for (const auto& c : columns) {
                    auto it = table.find(CellKey{dataset, model, task, c.probe, target, c.metric});
                    if (it == table.end()) {
                        csv_row << ",,";
                        md_row << '|';
                        continue;
                    }
                    any = true;
                    const auto& cell = it->second;
                    csv_row << ',' << fmt17(cell.mean) << ',' << fmt17(cell.stddev);
                    std::string text = fmt4(cell.mean) + " ±" + fmt4(cell.stddev);
                    if (!cell.complete) text += " (incomplete:" + std::to_string(cell.count) + ")";
                    auto bit = best.find(c);
                    if (bit != best.end() && bit->second.first == model && cell.complete) {
                        text = "**" + text + "**";
                    }
                    md_row << text << '|';
                }
                if (any) {
                    csv << csv_row.str() << '\n';
                    md << md_row.str() << '\n';
                }
            }
        }
        written.push_back(base + ".csv");
        written.push_back(base + ".md");
    }
    return written;
}

}  // namespace gelab
