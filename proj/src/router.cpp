#include "mopdil/router.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mopdil {

NearestPrototype delta(EmbeddingView embedding, const DomainModel& domain) {
    if (domain.prototypes.empty()) throw Error(ErrorCode::EmptyClass, "domain has no prototypes");
    NearestPrototype best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t k = 0; k < domain.prototypes.size(); ++k) {
        const double d = l2_distance(embedding, domain.prototypes[k]);
        if (d < best.distance) best = {d, k};
    }
    return best;
}

RoutingDecision select_domain(EmbeddingView embedding, const FittedMixture& mixture) {
    if (mixture.empty()) throw Error(ErrorCode::EmptyMixture, "no fitted domains");
    if (embedding.size() != mixture.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding length " + std::to_string(embedding.size()) +
                                                      ", mixture dimension " + std::to_string(mixture.dimension()));
    }
    const Embedding z = ingest(embedding, mixture.config);

    RoutingDecision out;
    out.per_domain_delta.reserve(mixture.size());
    out.per_domain_nearest_class.reserve(mixture.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < mixture.size(); ++s) {
        const auto nearest = delta(z, mixture.domain(s));
        out.per_domain_delta.push_back(nearest.distance);
        out.per_domain_nearest_class.push_back(nearest.class_id);
        if (nearest.distance < best) {
            best = nearest.distance;
            out.selected_domain = s;
        }
    }
    return out;
}

double gaussian_cdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive");
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

RoutingDecision route(EmbeddingView embedding, const FittedMixture& mixture) {
    RoutingDecision out = select_domain(embedding, mixture);
    const std::size_t s = out.selected_domain;
    const auto& g = mixture.domain(s).gaussians[out.per_domain_nearest_class[s]];
    out.cdf_value = gaussian_cdf(out.per_domain_delta[s], g.mu, g.sigma);
    out.is_in_distribution = out.cdf_value <= mixture.config.q;
    return out;
}

}  // namespace mopdil
