#pragma once

// Per-domain fitting: class prototypes, distance Gaussians, class heads, and
// the K-Means centroid alternative.

#include <cstdint>
#include <optional>
#include <vector>

#include "mopdil/core_model.hpp"

namespace mopdil {

// Gaussian over the L2 distances of a class's samples to its prototype.
struct ClassGaussian {
    double mu = 0.0;
    double sigma = 1.0;
    std::int64_t n = 1;
};

enum class PrototypeKind {
    ClassMeans,
    KMeans,  // centroids carry synthetic class ids and the domain has no heads
};

struct DomainModel {
    int domain_id = 0;
    PrototypeKind kind = PrototypeKind::ClassMeans;
    // All four are indexed by class id (or centroid id for K-Means domains).
    std::vector<Embedding> prototypes;
    std::vector<ClassGaussian> gaussians;
    std::vector<Embedding> class_heads;  // empty for K-Means domains
    std::vector<Embedding> diag_variance;

    std::size_t num_prototypes() const noexcept { return prototypes.size(); }
    std::size_t dimension() const noexcept { return prototypes.empty() ? 0 : prototypes.front().size(); }
    bool has_heads() const noexcept { return !class_heads.empty(); }

    // Checks key-set agreement, vector lengths, sigma floor and head norms.
    void validate(std::size_t dimension, double sigma_floor) const;
};

// Append-only ordered collection of domain models sharing L and K.
class FittedMixture {
public:
    FittedMixture() = default;
    FittedMixture(std::size_t dimension, std::size_t num_classes, InferenceConfig config);

    InferenceConfig config;

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t size() const noexcept { return domains_.size(); }
    bool empty() const noexcept { return domains_.empty(); }
    const std::vector<DomainModel>& domains() const noexcept { return domains_; }
    const DomainModel& domain(std::size_t s) const { return domains_.at(s); }

    // Requires model.domain_id == size(); DuplicateDomain if it is already present,
    // OutOfOrderDomain if it skips ahead.
    void append(DomainModel model);

    // Mixture as it stood after the first n adaptation steps.
    FittedMixture prefix(std::size_t n) const;

private:
    std::size_t dimension_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<DomainModel> domains_;
};

Embedding compute_class_prototype(const std::vector<Embedding>& samples);

// Bessel-corrected std, floored; n == 1 yields sigma_floor.
ClassGaussian fit_class_gaussian(std::span<const double> distances, double sigma_floor);

struct FitOptions {
    // Externally computed head vectors (e.g. text-encoder outputs), one per class.
    std::optional<std::vector<Embedding>> class_heads;
};

// Every class in [0, num_classes) must be present; MissingClass otherwise.
DomainModel fit_domain(const std::vector<LabeledSample>& samples, std::size_t num_classes,
                       const InferenceConfig& config, const FitOptions& options = {});

// Lloyd's algorithm with k-means++ seeding. Deterministic for a fixed seed.
std::vector<Embedding> kmeans_prototypes(const std::vector<Embedding>& samples, std::size_t k,
                                         std::uint64_t seed, std::size_t max_iters);

// K-Means ablation: centroids replace class prototypes; per-centroid distance
// Gaussians and variances come from the samples assigned to each centroid.
DomainModel fit_domain_kmeans(const std::vector<LabeledSample>& samples, std::size_t k,
                              std::uint64_t seed, const InferenceConfig& config,
                              std::size_t max_iters = 100);

// Index of the nearest centroid under L2, ties to the lowest index.
std::size_t nearest_index(EmbeddingView point, const std::vector<Embedding>& centroids);

}  // namespace mopdil
