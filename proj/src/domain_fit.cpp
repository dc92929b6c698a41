#include "mopdil/domain_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace mopdil {

namespace {

std::size_t common_dimension(const std::vector<LabeledSample>& samples) {
    const std::size_t dim = samples.front().embedding.size();
    for (const auto& s : samples) {
        if (s.embedding.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "sample '" + s.id + "' has length " + std::to_string(s.embedding.size()) +
                            ", expected " + std::to_string(dim));
        }
    }
    return dim;
}

int common_domain(const std::vector<LabeledSample>& samples) {
    const int domain = samples.front().domain_id;
    for (const auto& s : samples) {
        if (s.domain_id != domain) {
            throw Error(ErrorCode::InvalidArgument,
                        "samples span domains " + std::to_string(domain) + " and " + std::to_string(s.domain_id));
        }
    }
    if (domain < 0) throw Error(ErrorCode::IndexOutOfRange, "cannot fit samples of an unknown domain");
    return domain;
}

Embedding diag_sample_variance(const std::vector<Embedding>& members, EmbeddingView mean, double var_floor) {
    Embedding var(mean.size(), 0.0);
    if (members.size() > 1) {
        for (const auto& m : members) {
            for (std::size_t d = 0; d < mean.size(); ++d) {
                const double diff = m[d] - mean[d];
                var[d] += diff * diff;
            }
        }
        for (double& v : var) v /= static_cast<double>(members.size() - 1);
    }
    for (double& v : var) v = std::max(v, var_floor);
    return var;
}

std::vector<double> distances_to(const std::vector<Embedding>& members, EmbeddingView prototype) {
    std::vector<double> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(l2_distance(m, prototype));
    return out;
}

}  // namespace

void DomainModel::validate(std::size_t dim, double sigma_floor) const {
    const std::size_t n = prototypes.size();
    if (n == 0) throw Error(ErrorCode::EmptyClass, "domain " + std::to_string(domain_id) + " has no prototypes");
    if (gaussians.size() != n || diag_variance.size() != n || (has_heads() && class_heads.size() != n)) {
        throw Error(ErrorCode::InvalidArgument,
                    "domain " + std::to_string(domain_id) + " has inconsistent per-class tables");
    }
    if (kind == PrototypeKind::ClassMeans && !has_heads()) {
        throw Error(ErrorCode::MissingHeads, "class-mean domain " + std::to_string(domain_id) + " has no heads");
    }
    auto check_len = [&](const Embedding& v, const char* what) {
        if (v.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, std::string(what) + " of domain " +
                                                          std::to_string(domain_id) + " has length " +
                                                          std::to_string(v.size()));
        }
        validate_embedding(v);
    };
    for (std::size_t k = 0; k < n; ++k) {
        check_len(prototypes[k], "prototype");
        check_len(diag_variance[k], "diag_variance");
        for (double v : diag_variance[k]) {
            if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveVariance, "diag_variance entry");
        }
        if (has_heads()) {
            check_len(class_heads[k], "class head");
            if (l2_norm(class_heads[k]) < kZeroNormThreshold) {
                throw Error(ErrorCode::ZeroNormVector, "class head " + std::to_string(k));
            }
        }
        const auto& g = gaussians[k];
        if (!(g.sigma >= sigma_floor) || !std::isfinite(g.mu) || g.mu < 0.0 || g.n < 1) {
            throw Error(ErrorCode::NonPositiveSigma, "gaussian for class " + std::to_string(k) +
                                                         " of domain " + std::to_string(domain_id));
        }
    }
}

FittedMixture::FittedMixture(std::size_t dimension, std::size_t num_classes, InferenceConfig cfg)
    : config(cfg), dimension_(dimension), num_classes_(num_classes) {
    if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
    if (num_classes == 0) throw Error(ErrorCode::InvalidArgument, "num_classes must be at least 1");
    config.validate();
}

void FittedMixture::append(DomainModel model) {
    const auto expected = static_cast<int>(domains_.size());
    if (model.domain_id < expected) {
        throw Error(ErrorCode::DuplicateDomain, "domain " + std::to_string(model.domain_id) + " is already fitted");
    }
    if (model.domain_id > expected) {
        throw Error(ErrorCode::OutOfOrderDomain,
                    "next domain must be " + std::to_string(expected) + ", got " + std::to_string(model.domain_id));
    }
    model.validate(dimension_, config.sigma_floor);
    if (model.kind == PrototypeKind::ClassMeans && model.num_prototypes() != num_classes_) {
        throw Error(ErrorCode::MissingClass, "domain has " + std::to_string(model.num_prototypes()) +
                                                 " classes, mixture expects " + std::to_string(num_classes_));
    }
    domains_.push_back(std::move(model));
}

FittedMixture FittedMixture::prefix(std::size_t n) const {
    if (n > domains_.size()) throw Error(ErrorCode::IndexOutOfRange, "prefix longer than mixture");
    FittedMixture out = *this;
    out.domains_.resize(n);
    return out;
}

Embedding compute_class_prototype(const std::vector<Embedding>& samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyClass, "no samples for prototype");
    const std::size_t dim = samples.front().size();
    Embedding mean(dim, 0.0);
    for (const auto& s : samples) {
        if (s.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged prototype samples");
        for (std::size_t d = 0; d < dim; ++d) mean[d] += s[d];
    }
    for (double& m : mean) m /= static_cast<double>(samples.size());
    return mean;
}

ClassGaussian fit_class_gaussian(std::span<const double> distances, double sigma_floor) {
    if (distances.empty()) throw Error(ErrorCode::EmptyClass, "no distances for gaussian");
    if (!(sigma_floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_floor must be positive");
    const auto n = static_cast<double>(distances.size());
    double mean = 0.0;
    for (double d : distances) mean += d;
    mean /= n;

    double sigma = sigma_floor;
    if (distances.size() > 1) {
        double ss = 0.0;
        for (double d : distances) ss += (d - mean) * (d - mean);
        sigma = std::max(std::sqrt(ss / (n - 1.0)), sigma_floor);
    }
    return ClassGaussian{mean, sigma, static_cast<std::int64_t>(distances.size())};
}

DomainModel fit_domain(const std::vector<LabeledSample>& samples, std::size_t num_classes,
                       const InferenceConfig& config, const FitOptions& options) {
    if (samples.empty()) throw Error(ErrorCode::MissingClass, "class 0 has no samples");
    const std::size_t dim = common_dimension(samples);
    const int domain = common_domain(samples);

    std::vector<std::vector<Embedding>> by_class(num_classes);
    for (const auto& s : samples) {
        if (s.class_id < 0 || static_cast<std::size_t>(s.class_id) >= num_classes) {
            throw Error(ErrorCode::IndexOutOfRange, "sample '" + s.id + "' has class " + std::to_string(s.class_id));
        }
        validate_embedding(s.embedding);
        by_class[static_cast<std::size_t>(s.class_id)].push_back(ingest(s.embedding, config));
    }

    DomainModel model;
    model.domain_id = domain;
    model.kind = PrototypeKind::ClassMeans;
    const double var_floor = config.sigma_floor * config.sigma_floor;
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (by_class[k].empty()) {
            throw Error(ErrorCode::MissingClass, "class " + std::to_string(k) + " has no samples in domain " +
                                                     std::to_string(domain));
        }
        Embedding proto = compute_class_prototype(by_class[k]);
        const auto psi = distances_to(by_class[k], proto);
        model.gaussians.push_back(fit_class_gaussian(psi, config.sigma_floor));
        model.diag_variance.push_back(diag_sample_variance(by_class[k], proto, var_floor));
        model.prototypes.push_back(std::move(proto));
    }

    if (options.class_heads) {
        if (options.class_heads->size() != num_classes) {
            throw Error(ErrorCode::MissingClass, "head override must supply one vector per class");
        }
        model.class_heads = *options.class_heads;
    } else {
        for (const auto& p : model.prototypes) model.class_heads.push_back(normalized(p));
    }
    model.validate(dim, config.sigma_floor);
    return model;
}

std::size_t nearest_index(EmbeddingView point, const std::vector<Embedding>& centroids) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double dist = l2_distance(point, centroids[c]);
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

std::vector<Embedding> kmeans_prototypes(const std::vector<Embedding>& samples, std::size_t k,
                                         std::uint64_t seed, std::size_t max_iters) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
    if (max_iters == 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
    if (samples.size() < k) {
        throw Error(ErrorCode::TooFewSamples,
                    std::to_string(samples.size()) + " samples for " + std::to_string(k) + " clusters");
    }
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged k-means input");
    }

    std::mt19937_64 rng(seed);
    std::vector<Embedding> centroids;
    centroids.reserve(k);
    centroids.push_back(samples[std::uniform_int_distribution<std::size_t>(0, samples.size() - 1)(rng)]);

    // k-means++: sample proportional to squared distance to the nearest chosen centroid.
    std::vector<double> d2(samples.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = l2_distance(samples[i], centroids[nearest_index(samples[i], centroids)]);
            d2[i] = d * d;
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = samples.size() - 1;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (r < d2[i]) {
                    pick = i;
                    break;
                }
                r -= d2[i];
            }
        } else {
            pick = std::uniform_int_distribution<std::size_t>(0, samples.size() - 1)(rng);
        }
        centroids.push_back(samples[pick]);
    }

    auto assign_all = [&](const std::vector<Embedding>& cents) {
        std::vector<std::size_t> a(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) a[i] = nearest_index(samples[i], cents);
        return a;
    };

    std::vector<std::size_t> assignment = assign_all(centroids);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::vector<Embedding> sums(k, Embedding(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto& sum = sums[assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) sum[d] += samples[i][d];
            ++counts[assignment[i]];
        }
        // empty clusters keep their previous centroid
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        auto next = assign_all(centroids);
        if (next == assignment) break;
        assignment = std::move(next);
    }
    return centroids;
}

DomainModel fit_domain_kmeans(const std::vector<LabeledSample>& samples, std::size_t k, std::uint64_t seed,
                              const InferenceConfig& config, std::size_t max_iters) {
    if (samples.empty()) throw Error(ErrorCode::TooFewSamples, "no samples for k-means domain");
    const std::size_t dim = common_dimension(samples);
    const int domain = common_domain(samples);

    std::vector<Embedding> points;
    points.reserve(samples.size());
    for (const auto& s : samples) {
        validate_embedding(s.embedding);
        points.push_back(ingest(s.embedding, config));
    }

    DomainModel model;
    model.domain_id = domain;
    model.kind = PrototypeKind::KMeans;
    model.prototypes = kmeans_prototypes(points, k, seed, max_iters);

    std::vector<std::vector<Embedding>> members(k);
    for (const auto& p : points) members[nearest_index(p, model.prototypes)].push_back(p);

    const double var_floor = config.sigma_floor * config.sigma_floor;
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) {
            // a centroid no sample claims gets a floor-width gaussian at zero distance
            model.gaussians.push_back(ClassGaussian{0.0, config.sigma_floor, 1});
            model.diag_variance.emplace_back(dim, var_floor);
            continue;
        }
        const auto psi = distances_to(members[c], model.prototypes[c]);
        model.gaussians.push_back(fit_class_gaussian(psi, config.sigma_floor));
        model.diag_variance.push_back(diag_sample_variance(members[c], model.prototypes[c], var_floor));
    }
    model.validate(dim, config.sigma_floor);
    return model;
}

}  // namespace mopdil
