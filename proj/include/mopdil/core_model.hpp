#pragma once

// Shared domain types and distance kernels.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mopdil/error.hpp"

namespace mopdil {

using Embedding = std::vector<double>;
using EmbeddingView = std::span<const double>;

struct LabeledSample {
    std::string id;
    Embedding embedding;
    int domain_id = 0;  // -1 marks a sample from an unknown domain
    int class_id = 0;   // -1 marks an unlabeled sample
};

// How mixture weights are derived from per-domain distances when ensembling.
enum class DistanceMode {
    L2Gmm,            // Gaussian pdf of the nearest-prototype L2 distance (default)
    L1,
    L2,
    MahalanobisDiag,
    Uniform,
};

enum class EnsembleMode {
    Hybrid,          // gate decides between single-domain and ensembled posterior
    AlwaysSingle,
    AlwaysEnsemble,
};

struct InferenceConfig {
    double q = 0.94;
    DistanceMode distance_mode = DistanceMode::L2Gmm;
    EnsembleMode ensemble_mode = EnsembleMode::Hybrid;
    double temperature = 1.0;
    bool normalize_embeddings = false;
    double sigma_floor = 1e-6;

    // Throws InvalidArgument unless 0 < q < 1, temperature > 0, sigma_floor > 0.
    void validate() const;
};

std::string_view to_string(DistanceMode mode) noexcept;
std::string_view to_string(EnsembleMode mode) noexcept;
DistanceMode parse_distance_mode(std::string_view name);
EnsembleMode parse_ensemble_mode(std::string_view name);

// Throws NonFiniteValue on NaN/Inf and InvalidArgument on an empty vector.
void validate_embedding(EmbeddingView v);

double dot(EmbeddingView a, EmbeddingView b);
double l2_norm(EmbeddingView v);

// Unit-L2 projection; ZeroNormVector if the norm is below 1e-12.
Embedding normalized(EmbeddingView v);

// Applies the ingestion-time projection selected by the config.
Embedding ingest(EmbeddingView v, const InferenceConfig& config);

double cosine_similarity(EmbeddingView a, EmbeddingView b);
double l2_distance(EmbeddingView a, EmbeddingView b);
double l1_distance(EmbeddingView a, EmbeddingView b);

// sqrt(sum_d (a_d - mean_d)^2 / var_d) with a diagonal covariance.
double mahalanobis_diag_distance(EmbeddingView a, EmbeddingView mean, EmbeddingView var_diag);

inline constexpr double kZeroNormThreshold = 1e-12;

}  // namespace mopdil
