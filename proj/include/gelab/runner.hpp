#ifndef GELAB_RUNNER_HPP
#define GELAB_RUNNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gelab/dataset.hpp"
#include "gelab/embedding.hpp"
#include "gelab/graph.hpp"

namespace gelab {

/// Everything a full experiment needs; loaded from a JSON config file.
struct ExperimentConfig {
    std::string registry_path = "configs/datasets.json";
    std::string output_dir = "out";
    std::vector<std::string> datasets;
    std::vector<std::string> models;
    int runs = 10;
    std::uint64_t master_seed = 1;
    int bins = 6;
    int workers = 0;  // 0: hardware concurrency
    std::vector<std::string> tasks = {"features", "homogeneity", "clustering", "classification",
                                      "sum_rule"};
    std::vector<std::string> probes = {"ln_r", "lg_r", "svm_l", "mlp"};
    double tsne_perplexity = 30.0;
    int tsne_iterations = 1000;

    static ExperimentConfig from_file(const std::string& path);
    std::string config_hash() const;
};

/// All embedding models of the study.
const std::vector<std::string>& known_models();

/// Trains/derives one embedding for (graph, model, seed). GAE variants train
/// the autoencoder; laplacian_eigenmaps is deterministic; the node2vec pair
/// walks then runs skip-gram.
Embedding compute_embedding(const Graph& graph, const std::string& model, std::uint64_t seed,
                            int run);

struct RunSummary {
    int jobs_total = 0;
    int jobs_failed = 0;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::string raw_csv_path;
    std::string manifest_path;
};

/// Executes the (dataset x model x run) grid over a bounded worker pool,
/// caching embeddings on disk, appending metric records, aggregating them
/// and rendering report tables. `task_filter` restricts the configured task
/// list (empty: run all configured tasks).
RunSummary run_experiment(const ExperimentConfig& config,
                          const std::vector<std::string>& task_filter = {});

}  // namespace gelab

#endif
