#include "gelab/gae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gelab/dataset.hpp"
#include "gelab/rng.hpp"

namespace gelab {

const char* variant_name(GaeVariant v) {
    switch (v) {
        case GaeVariant::L1Sum: return "gae_l1_sum";
        case GaeVariant::L2Sum: return "gae_l2_sum";
        case GaeVariant::Concat: return "gae_concat";
        case GaeVariant::First: return "gae_first";
        case GaeVariant::Mean: return "gae_mean";
        case GaeVariant::Mixed: return "gae_mixed";
        case GaeVariant::Spectral: return "gae_spectral";
    }
    throw std::invalid_argument("unknown GAE variant");
}

GaeVariant variant_from_name(const std::string& name) {
    for (GaeVariant v : {GaeVariant::L1Sum, GaeVariant::L2Sum, GaeVariant::Concat,
                         GaeVariant::First, GaeVariant::Mean, GaeVariant::Mixed,
                         GaeVariant::Spectral}) {
        if (name == variant_name(v)) return v;
    }
    throw std::invalid_argument("unknown GAE variant: " + name);
}

void GaeConfig::validate() const {
    if (hidden_dim <= 0 || out_dim <= 0) throw std::invalid_argument("GaeConfig: layer widths must be positive");
    if (variant == GaeVariant::Concat && hidden_dim + out_dim != 64) {
        throw std::invalid_argument("GaeConfig: Concat layer widths must sum to 64");
    }
    if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("GaeConfig: alpha must be in (0,1]");
    if (patience >= max_epochs) throw std::invalid_argument("GaeConfig: patience must be < max_epochs");
    if (proximity_k < 1) throw std::invalid_argument("GaeConfig: proximity_k must be >= 1");
}

std::string GaeConfig::config_hash() const {
    std::ostringstream ss;
    ss << variant_name(variant) << '|' << hidden_dim << '|' << out_dim << '|' << lr << '|'
       << max_epochs << '|' << patience << '|' << min_delta << '|' << alpha << '|' << proximity_k
       << '|' << seed;
    return sha256_string(ss.str()).substr(0, 16);
}

GaeConfig default_gae_config(GaeVariant variant, std::uint64_t seed) {
    GaeConfig cfg;
    cfg.variant = variant;
    cfg.seed = seed;
    if (variant == GaeVariant::Concat) {
        cfg.hidden_dim = 32;
        cfg.out_dim = 32;
    }
    return cfg;
}

std::vector<nk::TensorPtr> GaeModel::parameters() const {
    std::vector<nk::TensorPtr> params{w1, bn1->gamma, bn1->beta};
    if (two_layers) {
        params.push_back(w2);
        params.push_back(bn2->gamma);
        params.push_back(bn2->beta);
    }
    return params;
}

GaeModel build_model(const GaeConfig& config, const Graph& graph) {
    config.validate();
    GaeModel model;
    model.config = config;

    SparseMatrix ahat = augmented_adjacency(graph);
    switch (config.variant) {
        case GaeVariant::L1Sum:
        case GaeVariant::L2Sum:
        case GaeVariant::Concat:
        case GaeVariant::First:
            model.op = std::move(ahat);
            break;
        case GaeVariant::Mean:
        case GaeVariant::Mixed:
            model.op = normalize_adjacency(ahat, NormalizeMode::Mean);
            break;
        case GaeVariant::Spectral:
            model.op = normalize_adjacency(ahat, NormalizeMode::Spectral);
            break;
    }
    model.input = graph.has_attributes() ? attribute_matrix(graph) : one_hot_features(graph);
    model.adj = adjacency_matrix(graph);
    if (config.variant == GaeVariant::Mixed) {
        model.prox = proximity_power(graph, config.proximity_k);
    }
    model.two_layers = config.variant != GaeVariant::L1Sum;

    const auto in_dim = static_cast<Eigen::Index>(model.input.cols);
    model.w1 = nk::tensor(nk::glorot_uniform(in_dim, config.hidden_dim, mix_seed(config.seed, 1)),
                          true);
    model.bn1.emplace(config.hidden_dim);
    if (model.two_layers) {
        model.w2 = nk::tensor(
            nk::glorot_uniform(config.hidden_dim, config.out_dim, mix_seed(config.seed, 2)), true);
        model.bn2.emplace(config.out_dim);
    }
    return model;
}

GaeForward gae_forward(GaeModel& model, nk::Tape& tape) {
    GaeForward fwd;
    auto xw = tape.matmul(model.input, model.w1);
    auto pre1 = tape.matmul(model.op, xw);
    fwd.h1 = tape.tanh(tape.batch_norm(pre1, *model.bn1));
    if (model.two_layers) {
        auto pre2 = tape.matmul(model.op, tape.matmul(fwd.h1, model.w2));
        fwd.h2 = tape.tanh(tape.batch_norm(pre2, *model.bn2));
    }
    return fwd;
}

nk::TensorPtr decoder_loss(GaeModel& model, nk::Tape& tape, const GaeForward& fwd) {
    if (model.config.variant == GaeVariant::Mixed) {
        auto first = tape.sigmoid_recon_loss(fwd.h1, model.adj);
        auto second = tape.sigmoid_recon_loss(fwd.h2, model.prox);
        return tape.add(first, tape.scale(second, model.config.alpha));
    }
    const auto& last = model.two_layers ? fwd.h2 : fwd.h1;
    return tape.sigmoid_recon_loss(last, model.adj);
}

void train(GaeModel& model) {
    auto params = model.parameters();
    nk::AdamState adam(model.config.lr);

    double best = std::numeric_limits<double>::infinity();
    std::vector<nk::Matrix> best_params;
    int stall = 0;

    for (int epoch = 0; epoch < model.config.max_epochs; ++epoch) {
        nk::Tape tape;
        for (auto& p : params) tape.watch(p);
        auto fwd = gae_forward(model, tape);
        auto loss = decoder_loss(model, tape, fwd);
        const double value = loss->value(0, 0);
        if (!std::isfinite(value)) {
            throw std::runtime_error(std::string("GAE training diverged (non-finite loss) for ") +
                                     variant_name(model.config.variant) +
                                     "; check learning rate / initialization");
        }
        if (epoch == 0) model.initial_loss = value;
        if (value < best - model.config.min_delta) {
            best = value;
            model.best_epoch = epoch;
            stall = 0;
            best_params.clear();
            for (auto& p : params) best_params.push_back(p->value);
        } else {
            ++stall;
        }
        model.epochs_run = epoch + 1;
        if (stall >= model.config.patience) break;

        tape.backward(loss);
        adam.step(params);
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
    model.best_loss = best;

    nk::Tape tape;  // cache layer outputs at the restored weights
    auto fwd = gae_forward(model, tape);
    model.h1 = fwd.h1->value;
    if (model.two_layers) model.h2 = fwd.h2->value;
    model.trained = true;
}

Embedding extract_embedding(const GaeModel& model) {
    if (!model.trained) throw std::logic_error("extract_embedding: model is not trained");
    Embedding emb;
    emb.model = variant_name(model.config.variant);
    emb.seed = model.config.seed;
    switch (model.config.variant) {
        case GaeVariant::L1Sum:
        case GaeVariant::First:
            emb.values = model.h1;
            break;
        case GaeVariant::Concat:
            emb.values.resize(model.h1.rows(), model.h1.cols() + model.h2.cols());
            emb.values << model.h1, model.h2;
            break;
        default:
            emb.values = model.h2;
            break;
    }
    return emb;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // constant input: 0 by convention
    return sab / std::sqrt(saa * sbb);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

double mean_pairwise_distance(const nk::Matrix& rows, const std::vector<std::uint32_t>& idx) {
    if (idx.size() < 2) return 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            total += (rows.row(idx[i]) - rows.row(idx[j])).norm();
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace

double preactivation_degree_spearman(const GaeModel& model, const Graph& graph) {
    nk::Tape tape;
    auto pre = tape.matmul(model.op, tape.matmul(model.input, model.w1));
    std::vector<double> norms(graph.n_nodes), degree(graph.n_nodes);
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        norms[v] = pre->value.row(static_cast<Eigen::Index>(v)).norm();
        degree[v] = static_cast<double>(graph.neighbors[v].size());
    }
    return spearman(norms, degree);
}

SumRuleDiagnostic sum_rule_diagnostic(const GaeModel& model, const Graph& graph) {
    switch (model.config.variant) {
        case GaeVariant::Mean:
        case GaeVariant::Mixed:
        case GaeVariant::Spectral:
            throw std::invalid_argument(
                "sum_rule_diagnostic is defined for the SUM-family variants");
        default:
            break;
    }
    SumRuleDiagnostic diag;
    diag.norm_degree_spearman = preactivation_degree_spearman(model, graph);

    if (graph.has_labels()) {
        // effective first-layer weight row per node: (X W1)_v
        nk::Tape tape;
        nk::Matrix eff = tape.matmul(model.input, model.w1)->value;

        std::vector<std::uint32_t> all(graph.n_nodes);
        std::iota(all.begin(), all.end(), 0);
        const double global = mean_pairwise_distance(eff, all);
        if (global > 0.0) {
            double within = 0.0;
            int groups = 0;
            for (int label = 0; label < graph.n_classes; ++label) {
                std::vector<char> in_set(graph.n_nodes, 0);
                std::vector<std::uint32_t> members;
                for (std::uint32_t v = 0; v < graph.n_nodes; ++v) {
                    if (graph.labels[v] != label) continue;
                    if (!in_set[v]) in_set[v] = 1, members.push_back(v);
                    for (auto u : graph.neighbors[v]) {
                        if (!in_set[u]) in_set[u] = 1, members.push_back(u);
                    }
                }
                if (members.size() < 2) continue;
                std::sort(members.begin(), members.end());
                within += mean_pairwise_distance(eff, members);
                ++groups;
            }
            if (groups > 0) diag.within_label_weight_dispersion = within / groups / global;
        }
    }
    return diag;
}

std::string run_sidecar_json(const GaeModel& model) {
    std::ostringstream ss;
    ss << "{\n"
       << "  \"variant\": \"" << variant_name(model.config.variant) << "\",\n"
       << "  \"seed\": " << model.config.seed << ",\n"
       << "  \"epochs_run\": " << model.epochs_run << ",\n"
       << "  \"best_epoch\": " << model.best_epoch << ",\n"
       << "  \"final_loss\": " << model.best_loss << ",\n"
       << "  \"config_hash\": \"" << model.config.config_hash() << "\"\n"
       << "}\n";
    return ss.str();
}

}  // namespace gelab
