#include "mopdil/ensembler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mopdil {

namespace {

void require_populated(const RoutingDecision& routing, const FittedMixture& mixture) {
    if (mixture.empty()) throw Error(ErrorCode::EmptyMixture, "no fitted domains");
    if (routing.per_domain_delta.size() != mixture.size() ||
        routing.per_domain_nearest_class.size() != mixture.size()) {
        throw Error(ErrorCode::DimensionMismatch, "routing decision does not cover every domain");
    }
}

}  // namespace

double gaussian_log_pdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive");
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

MixtureWeights normalize_log_weights(std::span<const double> log_weights, DistanceMode mode) {
    if (log_weights.empty()) throw Error(ErrorCode::EmptyMixture, "no components to weight");
    MixtureWeights out;
    out.mode = mode;
    const double peak = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(peak)) {
        out.weights.assign(log_weights.size(), 1.0 / static_cast<double>(log_weights.size()));
        out.fallback_uniform = true;
        return out;
    }
    out.weights.resize(log_weights.size());
    double total = 0.0;
    for (std::size_t s = 0; s < log_weights.size(); ++s) {
        out.weights[s] = std::exp(log_weights[s] - peak);
        total += out.weights[s];
    }
    for (double& w : out.weights) w /= total;
    return out;
}

MixtureWeights mixture_weights_l2gmm(const RoutingDecision& routing, const FittedMixture& mixture) {
    require_populated(routing, mixture);
    std::vector<double> log_w(mixture.size());
    for (std::size_t s = 0; s < mixture.size(); ++s) {
        const auto& g = mixture.domain(s).gaussians.at(routing.per_domain_nearest_class[s]);
        log_w[s] = gaussian_log_pdf(routing.per_domain_delta[s], g.mu, g.sigma);
    }
    return normalize_log_weights(log_w, DistanceMode::L2Gmm);
}

MixtureWeights mixture_weights_kernel(EmbeddingView embedding, const RoutingDecision& routing,
                                      const FittedMixture& mixture, DistanceMode mode) {
    require_populated(routing, mixture);
    const std::size_t n = mixture.size();
    switch (mode) {
        case DistanceMode::L2Gmm:
            return mixture_weights_l2gmm(routing, mixture);
        case DistanceMode::Uniform: {
            MixtureWeights out;
            out.mode = mode;
            out.weights.assign(n, 1.0 / static_cast<double>(n));
            return out;
        }
        case DistanceMode::L2: {
            std::vector<double> log_w(n);
            for (std::size_t s = 0; s < n; ++s) log_w[s] = -routing.per_domain_delta[s];
            return normalize_log_weights(log_w, mode);
        }
        case DistanceMode::L1:
        case DistanceMode::MahalanobisDiag: {
            const Embedding z = ingest(embedding, mixture.config);
            std::vector<double> log_w(n);
            for (std::size_t s = 0; s < n; ++s) {
                const auto& domain = mixture.domain(s);
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < domain.num_prototypes(); ++k) {
                    const double d = mode == DistanceMode::L1
                                         ? l1_distance(z, domain.prototypes[k])
                                         : mahalanobis_diag_distance(z, domain.prototypes[k], domain.diag_variance[k]);
                    best = std::min(best, d);
                }
                log_w[s] = mode == DistanceMode::L1 ? -best : -0.5 * best * best;
            }
            return normalize_log_weights(log_w, mode);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown distance mode");
}

Posterior ensemble_posterior(const MixtureWeights& weights, const std::vector<Posterior>& per_domain) {
    if (weights.weights.size() != per_domain.size() || per_domain.empty()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(weights.weights.size()) + " weights for " +
                                                      std::to_string(per_domain.size()) + " posteriors");
    }
    const std::size_t k = per_domain.front().num_classes();
    Posterior out{std::vector<double>(k, 0.0)};
    for (std::size_t s = 0; s < per_domain.size(); ++s) {
        if (per_domain[s].num_classes() != k) {
            throw Error(ErrorCode::DimensionMismatch, "posteriors disagree on the number of classes");
        }
        for (std::size_t c = 0; c < k; ++c) out.probs[c] += weights.weights[s] * per_domain[s].probs[c];
    }
    return out;
}

Prediction infer(EmbeddingView embedding, const FittedMixture& mixture) {
    Prediction out;
    out.routing = route(embedding, mixture);

    bool ensemble = false;
    switch (mixture.config.ensemble_mode) {
        case EnsembleMode::Hybrid: ensemble = !out.routing.is_in_distribution; break;
        case EnsembleMode::AlwaysSingle: ensemble = false; break;
        case EnsembleMode::AlwaysEnsemble: ensemble = true; break;
    }

    const double temperature = mixture.config.temperature;
    if (!ensemble) {
        out.posterior = per_domain_posterior(embedding, mixture.domain(out.routing.selected_domain), temperature);
        return out;
    }

    std::vector<Posterior> per_domain;
    per_domain.reserve(mixture.size());
    for (const auto& domain : mixture.domains()) per_domain.push_back(per_domain_posterior(embedding, domain, temperature));
    out.weights = mixture_weights_kernel(embedding, out.routing, mixture, mixture.config.distance_mode);
    out.posterior = ensemble_posterior(*out.weights, per_domain);
    return out;
}

}  // namespace mopdil
