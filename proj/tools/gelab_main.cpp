#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gelab/dataset.hpp"
#include "gelab/report.hpp"
#include "gelab/runner.hpp"
#include "gelab/topo.hpp"

namespace fs = std::filesystem;

namespace {

int finish(const gelab::RunSummary& summary) {
    for (const auto& w : summary.warnings) std::cerr << "[warn] " << w << '\n';
    for (const auto& e : summary.errors) std::cerr << "[error] " << e << '\n';
    std::cout << summary.jobs_total - summary.jobs_failed << "/" << summary.jobs_total
              << " jobs completed; records: " << summary.raw_csv_path
              << "; manifest: " << summary.manifest_path << '\n';
    return summary.jobs_failed > 0 ? 2 : 0;
}

int run_tasks(const std::string& config_path, const std::vector<std::string>& tasks) {
    auto config = gelab::ExperimentConfig::from_file(config_path);
    return finish(gelab::run_experiment(config, tasks));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph embedding laboratory"};
    app.require_subcommand(1);

    std::string config_path = "configs/experiment.json";
    std::vector<std::string> dataset_filter;

    auto add_config_flag = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")
            ->capture_default_str();
    };

    auto* fetch = app.add_subcommand("fetch", "verify dataset files and checksums");
    add_config_flag(fetch);
    fetch->add_option("--datasets", dataset_filter, "restrict to these datasets");

    auto* topo = app.add_subcommand("topo", "compute topological feature tables");
    auto* embed = app.add_subcommand("embed", "train/generate and cache embeddings");
    auto* probe = app.add_subcommand("probe", "regression + classification feature probes");
    auto* homog = app.add_subcommand("cluster-homogeneity", "DB/CH/SC of label groups");
    auto* cluster = app.add_subcommand("cluster", "k-means and FINCH node clustering");
    auto* classify = app.add_subcommand("classify", "node classification from embeddings");
    auto* tsne = app.add_subcommand("tsne", "2-D t-SNE projections for figures");
    auto* report = app.add_subcommand("report", "re-aggregate raw records into tables");
    auto* runall = app.add_subcommand("run-all", "full experimental protocol");
    for (auto* cmd : {topo, embed, probe, homog, cluster, classify, tsne, report, runall}) {
        add_config_flag(cmd);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (fetch->parsed()) {
            auto config = gelab::ExperimentConfig::from_file(config_path);
            auto registry = gelab::load_registry(config.registry_path);
            auto result = gelab::verify_datasets(registry, dataset_filter);
            for (const auto& f : result.verified) std::cout << "[ok]      " << f << '\n';
            for (const auto& f : result.corrupt) std::cout << "[corrupt] " << f << '\n';
            for (const auto& f : result.missing) std::cout << "[missing] " << f << '\n';
            if (!result.ok()) {
                std::cerr << "place the missing files under " << registry.data_dir
                          << " (see README for sources)\n";
                return 1;
            }
            return 0;
        }
        if (topo->parsed()) {
            auto config = gelab::ExperimentConfig::from_file(config_path);
            auto registry = gelab::load_registry(config.registry_path);
            fs::create_directories(config.output_dir);
            for (const auto& name : config.datasets) {
                auto graph = gelab::load_dataset(registry, name);
                auto table = gelab::compute_topo_table(graph, config.bins);
                const std::string path = config.output_dir + "/topo_" + name + ".csv";
                std::ofstream out(path);
                gelab::write_topo_csv(out, graph, table);
                std::cout << path << '\n';
            }
            return 0;
        }
        if (embed->parsed()) return run_tasks(config_path, {"embed-only"});
        if (probe->parsed()) return run_tasks(config_path, {"features"});
        if (homog->parsed()) return run_tasks(config_path, {"homogeneity"});
        if (cluster->parsed()) return run_tasks(config_path, {"clustering"});
        if (classify->parsed()) return run_tasks(config_path, {"classification"});
        if (tsne->parsed()) return run_tasks(config_path, {"tsne"});
        if (report->parsed()) {
            auto config = gelab::ExperimentConfig::from_file(config_path);
            std::ifstream raw(config.output_dir + "/records_raw.csv");
            if (!raw) {
                std::cerr << "no raw records at " << config.output_dir
                          << "/records_raw.csv; run an experiment first\n";
                return 1;
            }
            auto records = gelab::read_raw_csv(raw);
            auto table = gelab::aggregate_runs(records, config.runs);
            std::ofstream agg(config.output_dir + "/records_aggregated.csv");
            gelab::write_aggregated_csv(agg, table);
            auto files = gelab::emit_reports(table, config.output_dir + "/reports");
            for (const auto& f : files) std::cout << f << '\n';
            return 0;
        }
        if (runall->parsed()) return run_tasks(config_path, {});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
