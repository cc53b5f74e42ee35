#ifndef GELAB_GAE_HPP
#define GELAB_GAE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "gelab/embedding.hpp"
#include "gelab/graph.hpp"
#include "gelab/tensor.hpp"

namespace gelab {

enum class GaeVariant { L1Sum, L2Sum, Concat, First, Mean, Mixed, Spectral };

const char* variant_name(GaeVariant v);
GaeVariant variant_from_name(const std::string& name);

struct GaeConfig {
    GaeVariant variant = GaeVariant::First;
    int hidden_dim = 64;
    int out_dim = 64;
    double lr = 0.01;
    int max_epochs = 250;
    int patience = 10;
    double min_delta = 1e-6;
    double alpha = 0.5;    // Mixed: attenuation of the second reconstruction
    int proximity_k = 3;   // Mixed: order of the second target
    std::uint64_t seed = 0;

    void validate() const;
    std::string config_hash() const;
};

/// Defaults per variant: 64/64 layers except Concat, whose two 32-wide
/// layers concatenate back to a 64-dimensional embedding.
GaeConfig default_gae_config(GaeVariant variant, std::uint64_t seed);

/// Graph autoencoder state: the variant's propagation operator, the input
/// features, weights and batch-norm parameters, plus cached layer outputs of
/// the best epoch once trained.
struct GaeModel {
    GaeConfig config;
    SparseMatrix op;      // Ahat, D^-1 Ahat, or D^-1/2 Ahat D^-1/2
    SparseMatrix input;   // attributes if present, identity otherwise
    SparseMatrix adj;     // reconstruction target A (no self loops)
    SparseMatrix prox;    // Mixed only: binarized A^k
    bool two_layers = true;

    nk::TensorPtr w1, w2;
    std::optional<nk::BatchNormState> bn1, bn2;

    bool trained = false;
    int epochs_run = 0;
    int best_epoch = -1;
    double initial_loss = 0.0;
    double best_loss = 0.0;

    nk::Matrix h1, h2;  // cached layer outputs at the best weights

    std::vector<nk::TensorPtr> parameters() const;
};

GaeModel build_model(const GaeConfig& config, const Graph& graph);

struct GaeForward {
    nk::TensorPtr h1;
    nk::TensorPtr h2;  // null for one-layer models
};

/// One encoder pass on the given tape: layer = operator * input * W ->
/// batch norm -> tanh.
GaeForward gae_forward(GaeModel& model, nk::Tape& tape);

/// Reconstruction loss. Single-target variants: mean squared residual of
/// sigmoid(H_last H_last^T) against A. Mixed: loss(H1,A) + alpha *
/// loss(H2, A^k binarized).
nk::TensorPtr decoder_loss(GaeModel& model, nk::Tape& tape, const GaeForward& fwd);

/// Full-batch Adam with patience-based early stopping on the training loss;
/// the best-loss weights are restored and their layer outputs cached.
void train(GaeModel& model);

/// Z per variant rule; always 64 columns. Requires a trained model.
Embedding extract_embedding(const GaeModel& model);

struct SumRuleDiagnostic {
    double norm_degree_spearman = 0.0;
    std::optional<double> within_label_weight_dispersion;
};

/// Spearman correlation between the first-layer pre-activation row norms and
/// node degree, plus (when labels exist) the mean within-label pairwise
/// distance of the effective first-layer weight rows normalized by the
/// global mean pairwise distance. Defined for the SUM-family variants only.
SumRuleDiagnostic sum_rule_diagnostic(const GaeModel& model, const Graph& graph);

/// The Spearman statistic above without the SUM-family guard; lets any
/// variant be measured for comparison.
double preactivation_degree_spearman(const GaeModel& model, const Graph& graph);

/// Structured sidecar describing a trained run.
std::string run_sidecar_json(const GaeModel& model);

}  // namespace gelab

#endif
