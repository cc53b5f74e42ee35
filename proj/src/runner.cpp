#include "gelab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gelab/cluster.hpp"
#include "gelab/eigenmaps.hpp"
#include "gelab/gae.hpp"
#include "gelab/metrics.hpp"
#include "gelab/probe.hpp"
#include "gelab/report.hpp"
#include "gelab/rng.hpp"
#include "gelab/skipgram.hpp"
#include "gelab/topo.hpp"
#include "gelab/tsne.hpp"
#include "gelab/walks.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gelab {

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    ExperimentConfig cfg;
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).lexically_normal().string();
    };
    if (j.contains("registry")) cfg.registry_path = resolve(j["registry"].get<std::string>());
    if (j.contains("output_dir")) cfg.output_dir = resolve(j["output_dir"].get<std::string>());
    cfg.datasets = j.value("datasets", cfg.datasets);
    cfg.models = j.value("models", cfg.models);
    cfg.runs = j.value("runs", cfg.runs);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.bins = j.value("bins", cfg.bins);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.tasks = j.value("tasks", cfg.tasks);
    cfg.probes = j.value("probes", cfg.probes);
    cfg.tsne_perplexity = j.value("tsne_perplexity", cfg.tsne_perplexity);
    cfg.tsne_iterations = j.value("tsne_iterations", cfg.tsne_iterations);
    if (cfg.runs < 1) throw std::runtime_error("config: runs must be >= 1");
    if (cfg.datasets.empty()) throw std::runtime_error("config: no datasets selected");
    if (cfg.models.empty()) throw std::runtime_error("config: no models selected");
    for (const auto& m : cfg.models) {
        if (std::find(known_models().begin(), known_models().end(), m) == known_models().end()) {
            throw std::runtime_error("config: unknown model '" + m + "'");
        }
    }
    return cfg;
}

std::string ExperimentConfig::config_hash() const {
    std::ostringstream ss;
    ss << master_seed << '|' << runs << '|' << bins << '|' << tsne_perplexity << '|'
       << tsne_iterations;
    for (const auto& d : datasets) ss << '|' << d;
    for (const auto& m : models) ss << '|' << m;
    for (const auto& t : tasks) ss << '|' << t;
    for (const auto& p : probes) ss << '|' << p;
    return sha256_string(ss.str()).substr(0, 16);
}

const std::vector<std::string>& known_models() {
    static const std::vector<std::string> models = {
        "gae_l1_sum",  "gae_l2_sum",          "gae_concat",
        "gae_first",   "gae_mean",            "gae_mixed",
        "gae_spectral", "laplacian_eigenmaps", "node2vec_structural",
        "node2vec_homophily"};
    return models;
}

namespace {

bool is_gae(const std::string& model) { return model.rfind("gae_", 0) == 0; }

std::string model_params_string(const std::string& model) {
    if (model == "laplacian_eigenmaps") return "le|d=64";
    if (model == "node2vec_structural" || model == "node2vec_homophily") {
        const bool structural = model == "node2vec_structural";
        std::ostringstream ss;
        ss << "n2v|p=" << (structural ? 0.5 : 1.0) << "|q=" << (structural ? 2.0 : 0.5)
           << "|walks=10|len=80|dim=64|window=10|neg=5|epochs=5|lr=0.025";
        return ss.str();
    }
    return model;  // GAE models hash their GaeConfig instead
}

}  // namespace

Embedding compute_embedding(const Graph& graph, const std::string& model, std::uint64_t seed,
                            int run) {
    Embedding emb;
    if (is_gae(model)) {
        auto cfg = default_gae_config(variant_from_name(model), seed);
        auto gae = build_model(cfg, graph);
        train(gae);
        emb = extract_embedding(gae);
    } else if (model == "laplacian_eigenmaps") {
        emb = laplacian_eigenmaps(graph, 64);
        emb.seed = seed;
    } else if (model == "node2vec_structural" || model == "node2vec_homophily") {
        WalkConfig wcfg;
        wcfg.p = model == "node2vec_structural" ? 0.5 : 1.0;
        wcfg.q = model == "node2vec_structural" ? 2.0 : 0.5;
        wcfg.seed = mix_seed(seed, 101);
        auto corpus = biased_random_walks(graph, wcfg);
        SkipGramConfig scfg;
        scfg.seed = mix_seed(seed, 102);
        emb = skipgram_train(corpus, scfg).embedding;
        emb.seed = seed;
    } else {
        throw std::invalid_argument("unknown model: " + model);
    }
    emb.model = model;
    emb.run = run;
    return emb;
}

namespace {

struct Job {
    std::string dataset;
    std::string model;
    int run = 0;
    std::uint64_t seed = 0;
};

struct JobOutput {
    std::vector<RawRecord> records;
    std::vector<std::string> report_rows;  // probekit/evalkit schema
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::string cache_file;
    bool failed = false;
};

struct DatasetContext {
    Graph graph;
    TopoTable topo;
    std::string hash8;
};

std::string model_config_hash(const std::string& model, std::uint64_t seed) {
    if (is_gae(model)) {
        return default_gae_config(variant_from_name(model), seed).config_hash();
    }
    return sha256_string(model_params_string(model) + "|" + std::to_string(seed)).substr(0, 16);
}

std::string fmt_mean_std(double mean, double stddev) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", mean, stddev);
    return buf;
}

ProbeKind probe_kind_from_name(const std::string& name) {
    if (name == "ln_r") return ProbeKind::LinearRegression;
    if (name == "lg_r") return ProbeKind::LogisticRegression;
    if (name == "svm_l") return ProbeKind::LinearSvm;
    if (name == "mlp") return ProbeKind::Mlp;
    throw std::invalid_argument("unknown probe: " + name);
}

bool task_enabled(const ExperimentConfig& cfg, const std::vector<std::string>& filter,
                  const std::string& task) {
    auto in = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), task) != v.end();
    };
    if (!filter.empty()) return in(filter);
    return in(cfg.tasks);
}

void run_probe_tasks(const ExperimentConfig& cfg, const std::vector<std::string>& filter,
                     const Job& job, const DatasetContext& ctx, const Embedding& emb,
                     JobOutput& out) {
    const auto& graph = ctx.graph;
    auto add_record = [&](const std::string& task, const std::string& probe,
                          const std::string& target, const std::string& metric, double value) {
        out.records.push_back(
            RawRecord{job.dataset, job.model, job.run, task, probe, target, metric, value});
    };
    auto add_report_row = [&](const std::string& probe, const std::string& target,
                              const std::string& metric, double mean, double stddev) {
        std::ostringstream ss;
        ss << job.dataset << ',' << job.model << ',' << job.run << ',' << probe << ',' << target
           << ',' << metric << ',' << fmt_mean_std(mean, stddev);
        out.report_rows.push_back(ss.str());
    };
    auto probe_seed = [&](const std::string& task, const std::string& probe,
                          const std::string& target) {
        return mix_seed(job.seed, hash_string(task + "/" + probe + "/" + target));
    };

    if (task_enabled(cfg, filter, "features")) {
        for (const auto& feature : TopoTable::feature_names()) {
            for (const auto& probe : cfg.probes) {
                const auto kind = probe_kind_from_name(probe);
                try {
                    ProbeSpec spec{5, probe_seed("features", probe, feature)};
                    if (kind == ProbeKind::LinearRegression) {
                        auto res = regression_probe(emb.values, ctx.topo.feature(feature), spec);
                        add_record("feature_regression", probe, feature, "mse", res.mse.mean());
                        add_record("feature_regression", probe, feature, "mae", res.mae.mean());
                        add_report_row(probe, feature, "mse", res.mse.mean(), res.mse.stddev());
                        add_report_row(probe, feature, "mae", res.mae.mean(), res.mae.stddev());
                    } else {
                        const auto& classes = ctx.topo.feature_class(feature);
                        auto res = classification_probe(emb.values, classes, spec, kind);
                        if (res.missing_class_warning) {
                            out.warnings.push_back(job.dataset + "/" + job.model + "/" + feature +
                                                   ": class missing from a training fold");
                        }
                        add_record("feature_classification", probe, feature, "macro_f1",
                                   res.macro_f1.mean());
                        add_record("feature_classification", probe, feature, "micro_f1",
                                   res.micro_f1.mean());
                        add_report_row(probe, feature, "macro_f1", res.macro_f1.mean(),
                                       res.macro_f1.stddev());
                        add_report_row(probe, feature, "micro_f1", res.micro_f1.mean(),
                                       res.micro_f1.stddev());
                    }
                } catch (const std::exception& e) {
                    out.warnings.push_back(job.dataset + "/" + job.model + "/run" +
                                           std::to_string(job.run) + " " + probe + " on " +
                                           feature + ": " + e.what());
                }
            }
        }
    }

    const bool labeled = graph.has_labels();
    std::vector<int> labels;
    if (labeled) labels = graph.labels;

    if (labeled && task_enabled(cfg, filter, "homogeneity")) {
        auto m = internal_metrics(emb.values, labels);
        if (m.degenerate_warning) {
            out.warnings.push_back(job.dataset + "/" + job.model + ": degenerate grouping metric");
        }
        add_record("cluster_homogeneity", "-", "labels", "db", m.davies_bouldin);
        add_record("cluster_homogeneity", "-", "labels", "ch", m.calinski_harabasz);
        add_record("cluster_homogeneity", "-", "labels", "sc", m.silhouette);
        add_report_row("-", "labels", "db", m.davies_bouldin, 0.0);
        add_report_row("-", "labels", "ch", m.calinski_harabasz, 0.0);
        add_report_row("-", "labels", "sc", m.silhouette, 0.0);
    }

    if (labeled && task_enabled(cfg, filter, "clustering")) {
        auto part = kmeans(emb.values, graph.n_classes, probe_seed("clustering", "kmeans", "labels"));
        auto km = external_metrics(part.assignment, labels);
        add_record("clustering", "kmeans", "labels", "acc", km.acc);
        add_record("clustering", "kmeans", "labels", "nmi", km.nmi);
        add_record("clustering", "kmeans", "labels", "ari", km.ari);
        add_report_row("kmeans", "labels", "acc", km.acc, 0.0);
        add_report_row("kmeans", "labels", "nmi", km.nmi, 0.0);
        add_report_row("kmeans", "labels", "ari", km.ari, 0.0);

        auto hierarchy = finch(emb.values);
        // report the level whose cluster count is nearest the class count
        const Partition* chosen = &hierarchy.front();
        for (const auto& level : hierarchy) {
            if (std::abs(level.k - graph.n_classes) < std::abs(chosen->k - graph.n_classes)) {
                chosen = &level;
            }
        }
        auto fm = external_metrics(chosen->assignment, labels);
        add_record("clustering", "finch", "labels", "acc", fm.acc);
        add_record("clustering", "finch", "labels", "nmi", fm.nmi);
        add_record("clustering", "finch", "labels", "ari", fm.ari);
        add_record("clustering", "finch", "labels", "k", chosen->k);
        add_report_row("finch", "labels", "acc", fm.acc, 0.0);
        add_report_row("finch", "labels", "nmi", fm.nmi, 0.0);
        add_report_row("finch", "labels", "ari", fm.ari, 0.0);
    }

    if (labeled && task_enabled(cfg, filter, "classification")) {
        for (const auto& probe : cfg.probes) {
            if (probe == "ln_r") continue;  // regression probe has no label task
            try {
                ProbeSpec spec{5, probe_seed("classification", probe, "labels")};
                auto res = classification_probe(emb.values, labels, spec,
                                                probe_kind_from_name(probe));
                add_record("classification", probe, "labels", "macro_f1", res.macro_f1.mean());
                add_record("classification", probe, "labels", "micro_f1", res.micro_f1.mean());
                add_report_row(probe, "labels", "macro_f1", res.macro_f1.mean(),
                               res.macro_f1.stddev());
                add_report_row(probe, "labels", "micro_f1", res.micro_f1.mean(),
                               res.micro_f1.stddev());
            } catch (const std::exception& e) {
                out.warnings.push_back(job.dataset + "/" + job.model + "/run" +
                                       std::to_string(job.run) + " classification " + probe +
                                       ": " + e.what());
            }
        }
    }
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config,
                          const std::vector<std::string>& task_filter) {
    RunSummary summary;
    auto registry = load_registry(config.registry_path);

    fs::create_directories(config.output_dir);
    fs::create_directories(config.output_dir + "/cache");
    fs::create_directories(config.output_dir + "/reports");

    // datasets and their per-dataset artifacts (single-threaded prepass)
    std::map<std::string, DatasetContext> contexts;
    for (const auto& name : config.datasets) {
        DatasetContext ctx;
        ctx.graph = load_dataset(registry, name);
        ctx.topo = compute_topo_table(ctx.graph, config.bins);
        const auto& spec = registry.find(name);
        std::string h = sha256_file((fs::path(registry.data_dir) / spec.edges_file).string());
        if (spec.attributes_file) {
            h = sha256_string(h + sha256_file((fs::path(registry.data_dir) /
                                               *spec.attributes_file).string()));
        }
        if (spec.labels_file) {
            h = sha256_string(
                h + sha256_file((fs::path(registry.data_dir) / *spec.labels_file).string()));
        }
        ctx.hash8 = h.substr(0, 8);

        std::ofstream topo_csv(config.output_dir + "/topo_" + name + ".csv");
        write_topo_csv(topo_csv, ctx.graph, ctx.topo);
        contexts.emplace(name, std::move(ctx));
    }

    std::vector<Job> jobs;
    for (const auto& dataset : config.datasets) {
        for (const auto& model : config.models) {
            for (int run = 0; run < config.runs; ++run) {
                jobs.push_back(Job{dataset, model, run,
                                   derive_seed(config.master_seed, dataset, model, run)});
            }
        }
    }
    summary.jobs_total = static_cast<int>(jobs.size());

    std::vector<JobOutput> outputs(jobs.size());
    std::atomic<std::size_t> next{0};
    const bool want_tsne = task_enabled(config, task_filter, "tsne");
    if (want_tsne) fs::create_directories(config.output_dir + "/tsne");

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            JobOutput& out = outputs[i];
            try {
                const auto& ctx = contexts.at(job.dataset);
                const std::string cache_dir = config.output_dir + "/cache/" + job.dataset + "-" +
                                              ctx.hash8 + "/" + job.model;
                fs::create_directories(cache_dir);
                char seed_hex[32];
                std::snprintf(seed_hex, sizeof(seed_hex), "%016llx",
                              static_cast<unsigned long long>(job.seed));
                const std::string stem = "run" + std::to_string(job.run) + "_" + seed_hex + "_" +
                                         model_config_hash(job.model, job.seed);
                const std::string cache_file = cache_dir + "/" + stem + ".csv";
                out.cache_file = cache_file;

                const std::string sidecar_file = cache_dir + "/" + stem + ".json";
                Embedding emb;
                std::optional<SumRuleDiagnostic> diag;
                if (fs::exists(cache_file)) {
                    std::ifstream in(cache_file);
                    emb = read_embedding_csv(in);
                    if (fs::exists(sidecar_file)) {
                        std::ifstream side(sidecar_file);
                        json sj = json::parse(side, nullptr, false);
                        if (!sj.is_discarded() && sj.contains("sum_rule_spearman")) {
                            SumRuleDiagnostic d;
                            d.norm_degree_spearman = sj["sum_rule_spearman"].get<double>();
                            if (sj.contains("sum_rule_dispersion")) {
                                d.within_label_weight_dispersion =
                                    sj["sum_rule_dispersion"].get<double>();
                            }
                            diag = d;
                        }
                    }
                } else {
                    json side;
                    side["dataset"] = job.dataset;
                    side["model"] = job.model;
                    side["run"] = job.run;
                    side["seed"] = job.seed;
                    if (is_gae(job.model)) {
                        auto cfg = default_gae_config(variant_from_name(job.model), job.seed);
                        auto model = build_model(cfg, ctx.graph);
                        train(model);
                        emb = extract_embedding(model);
                        emb.run = job.run;
                        side["variant"] = variant_name(cfg.variant);
                        side["epochs_run"] = model.epochs_run;
                        side["best_epoch"] = model.best_epoch;
                        side["final_loss"] = model.best_loss;
                        side["config_hash"] = cfg.config_hash();
                        const bool sum_family = cfg.variant == GaeVariant::L1Sum ||
                                                cfg.variant == GaeVariant::L2Sum ||
                                                cfg.variant == GaeVariant::Concat ||
                                                cfg.variant == GaeVariant::First;
                        if (sum_family) {
                            diag = sum_rule_diagnostic(model, ctx.graph);
                            side["sum_rule_spearman"] = diag->norm_degree_spearman;
                            if (diag->within_label_weight_dispersion) {
                                side["sum_rule_dispersion"] = *diag->within_label_weight_dispersion;
                            }
                        }
                    } else {
                        emb = compute_embedding(ctx.graph, job.model, job.seed, job.run);
                        side["params"] = model_params_string(job.model);
                        side["config_hash"] = model_config_hash(job.model, job.seed);
                    }
                    std::ostringstream buffer;
                    write_embedding_csv(buffer, emb, ctx.graph.node_ids);
                    {
                        std::ofstream file(cache_file);
                        file << buffer.str();
                    }
                    {
                        std::ofstream sf(sidecar_file);
                        sf << side.dump(2) << '\n';
                    }
                    // probes always consume the serialized form so cached and
                    // fresh runs agree bitwise
                    std::istringstream reread(buffer.str());
                    emb = read_embedding_csv(reread);
                }
                emb.model = job.model;
                emb.seed = job.seed;
                emb.run = job.run;

                run_probe_tasks(config, task_filter, job, ctx, emb, out);

                if (diag && task_enabled(config, task_filter, "sum_rule")) {
                    out.records.push_back(RawRecord{job.dataset, job.model, job.run, "sum_rule",
                                                    "-", "degree", "spearman",
                                                    diag->norm_degree_spearman});
                    if (diag->within_label_weight_dispersion) {
                        out.records.push_back(RawRecord{job.dataset, job.model, job.run,
                                                        "sum_rule", "-", "labels", "dispersion",
                                                        *diag->within_label_weight_dispersion});
                    }
                }

                if (want_tsne) {
                    TsneConfig tcfg;
                    tcfg.perplexity = config.tsne_perplexity;
                    tcfg.iterations = config.tsne_iterations;
                    tcfg.seed = mix_seed(job.seed, hash_string("tsne"));
                    auto xy = tsne_project(emb.values, tcfg);
                    std::ofstream f(config.output_dir + "/tsne/" + job.dataset + "_" + job.model +
                                    "_run" + std::to_string(job.run) + ".csv");
                    f << "node_id,x,y,ground_truth,deg_class,tri_class,lc_class,ec_class,bc_class\n";
                    const auto& topo = ctx.topo;
                    for (std::size_t v = 0; v < ctx.graph.n_nodes; ++v) {
                        f << ctx.graph.node_ids[v] << ',' << xy(static_cast<Eigen::Index>(v), 0)
                          << ',' << xy(static_cast<Eigen::Index>(v), 1) << ','
                          << (ctx.graph.has_labels() ? ctx.graph.labels[v] : -1) << ','
                          << topo.degree_class[v] << ',' << topo.triangles_class[v] << ','
                          << topo.lc_class[v] << ',' << topo.ec_class[v] << ','
                          << topo.bc_class[v] << '\n';
                    }
                }
            } catch (const std::exception& e) {
                out.failed = true;
                out.errors.push_back(job.dataset + "/" + job.model + "/run" +
                                     std::to_string(job.run) + ": " + e.what());
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                            : (hw > 0 ? hw : 1);
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // deterministic reduce in job order
    std::vector<RawRecord> records;
    std::vector<std::string> report_rows;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& out = outputs[i];
        if (out.failed) ++summary.jobs_failed;
        records.insert(records.end(), out.records.begin(), out.records.end());
        report_rows.insert(report_rows.end(), out.report_rows.begin(), out.report_rows.end());
        summary.errors.insert(summary.errors.end(), out.errors.begin(), out.errors.end());
        summary.warnings.insert(summary.warnings.end(), out.warnings.begin(), out.warnings.end());
    }
    sort_records(records);

    // filtered invocations write suffixed files so a later full run does not
    // clobber them (and vice versa)
    std::string suffix;
    for (const auto& t : task_filter) suffix += "_" + t;

    summary.raw_csv_path = config.output_dir + "/records_raw" + suffix + ".csv";
    if (!records.empty() || task_filter.empty()) {
        std::ofstream raw(summary.raw_csv_path);
        write_raw_csv(raw, records);
        std::ofstream rows(config.output_dir + "/report_rows" + suffix + ".csv");
        rows << "dataset,model,run,probe,target,metric,mean,std\n";
        for (const auto& r : report_rows) rows << r << '\n';

        auto table = aggregate_runs(records, config.runs);
        std::ofstream agg(config.output_dir + "/records_aggregated" + suffix + ".csv");
        write_aggregated_csv(agg, table);
        emit_reports(table, config.output_dir + "/reports");
    }

    // manifest: enough to re-run any single cell
    summary.manifest_path = config.output_dir + "/manifest" + suffix + ".json";
    json manifest;
    manifest["config_hash"] = config.config_hash();
    manifest["master_seed"] = config.master_seed;
    manifest["runs"] = config.runs;
    manifest["bins"] = config.bins;
    manifest["registry"] = config.registry_path;
    for (const auto& name : config.datasets) {
        manifest["dataset_hashes"][name] = contexts.at(name).hash8;
    }
    json job_list = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        json j;
        j["dataset"] = jobs[i].dataset;
        j["model"] = jobs[i].model;
        j["run"] = jobs[i].run;
        j["seed"] = jobs[i].seed;
        j["cache"] = outputs[i].cache_file;
        j["status"] = outputs[i].failed ? "failed" : "ok";
        job_list.push_back(std::move(j));
    }
    manifest["jobs"] = std::move(job_list);
    manifest["errors"] = summary.errors;
    manifest["warnings"] = summary.warnings;
    {
        std::ofstream mf(summary.manifest_path);
        mf << manifest.dump(2) << '\n';
    }
    return summary;
}

}  // namespace gelab
