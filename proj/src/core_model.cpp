#include "mopdil/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mopdil {

namespace {

void require_same_length(EmbeddingView a, EmbeddingView b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
}

}  // namespace

void InferenceConfig::validate() const {
    if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "q must lie in (0, 1), got " + std::to_string(q));
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
    }
    if (!(sigma_floor > 0.0) || !std::isfinite(sigma_floor)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_floor must be positive");
    }
}

std::string_view to_string(DistanceMode mode) noexcept {
    switch (mode) {
        case DistanceMode::L2Gmm: return "l2gmm";
        case DistanceMode::L1: return "l1";
        case DistanceMode::L2: return "l2";
        case DistanceMode::MahalanobisDiag: return "maha";
        case DistanceMode::Uniform: return "uniform";
    }
    return "l2gmm";
}

std::string_view to_string(EnsembleMode mode) noexcept {
    switch (mode) {
        case EnsembleMode::Hybrid: return "hybrid";
        case EnsembleMode::AlwaysSingle: return "single";
        case EnsembleMode::AlwaysEnsemble: return "ensemble";
    }
    return "hybrid";
}

DistanceMode parse_distance_mode(std::string_view name) {
    if (name == "l2gmm") return DistanceMode::L2Gmm;
    if (name == "l1") return DistanceMode::L1;
    if (name == "l2") return DistanceMode::L2;
    if (name == "maha") return DistanceMode::MahalanobisDiag;
    if (name == "uniform") return DistanceMode::Uniform;
    throw Error(ErrorCode::InvalidArgument, "unknown distance mode '" + std::string(name) + "'");
}

EnsembleMode parse_ensemble_mode(std::string_view name) {
    if (name == "hybrid") return EnsembleMode::Hybrid;
    if (name == "single") return EnsembleMode::AlwaysSingle;
    if (name == "ensemble") return EnsembleMode::AlwaysEnsemble;
    throw Error(ErrorCode::InvalidArgument, "unknown ensemble mode '" + std::string(name) + "'");
}

void validate_embedding(EmbeddingView v) {
    if (v.empty()) {
        throw Error(ErrorCode::InvalidArgument, "embedding has zero length");
    }
    for (std::size_t d = 0; d < v.size(); ++d) {
        if (!std::isfinite(v[d])) {
            throw Error(ErrorCode::NonFiniteValue, "element " + std::to_string(d) + " is not finite");
        }
    }
}

double dot(EmbeddingView a, EmbeddingView b) {
    require_same_length(a, b);
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) acc += a[d] * b[d];
    return acc;
}

double l2_norm(EmbeddingView v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

Embedding normalized(EmbeddingView v) {
    const double norm = l2_norm(v);
    if (norm < kZeroNormThreshold) {
        throw Error(ErrorCode::ZeroNormVector, "cannot normalize a zero-norm vector");
    }
    Embedding out(v.begin(), v.end());
    for (double& x : out) x /= norm;
    return out;
}

Embedding ingest(EmbeddingView v, const InferenceConfig& config) {
    if (config.normalize_embeddings) return normalized(v);
    return Embedding(v.begin(), v.end());
}

double cosine_similarity(EmbeddingView a, EmbeddingView b) {
    require_same_length(a, b);
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na < kZeroNormThreshold || nb < kZeroNormThreshold) {
        throw Error(ErrorCode::ZeroNormVector, "cosine similarity of a zero-norm vector");
    }
    const double c = dot(a, b) / (na * nb);
    // rounding can push |c| a hair past 1
    return std::clamp(c, -1.0, 1.0);
}

double l2_distance(EmbeddingView a, EmbeddingView b) {
    require_same_length(a, b);
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

double l1_distance(EmbeddingView a, EmbeddingView b) {
    require_same_length(a, b);
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) acc += std::abs(a[d] - b[d]);
    return acc;
}

double mahalanobis_diag_distance(EmbeddingView a, EmbeddingView mean, EmbeddingView var_diag) {
    require_same_length(a, mean);
    require_same_length(a, var_diag);
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        if (!(var_diag[d] > 0.0)) {
            throw Error(ErrorCode::NonPositiveVariance, "variance at coordinate " + std::to_string(d));
        }
        const double diff = a[d] - mean[d];
        acc += diff * diff / var_diag[d];
    }
    return std::sqrt(acc);
}

}  // namespace mopdil
