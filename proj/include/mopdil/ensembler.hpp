#pragma once

// Mixture-of-prompts inference: distance-based mixture weights, the weighted
// posterior, and the hybrid single/ensemble procedure.

#include <optional>
#include <vector>

#include "mopdil/classifier.hpp"
#include "mopdil/router.hpp"

namespace mopdil {

struct MixtureWeights {
    std::vector<double> weights;
    DistanceMode mode = DistanceMode::L2Gmm;
    // Set only when every log-weight was -inf and uniform weights were substituted.
    bool fallback_uniform = false;

    bool operator==(const MixtureWeights&) const = default;
};

struct Prediction {
    Posterior posterior;
    RoutingDecision routing;
    std::optional<MixtureWeights> weights;  // present iff the ensembling branch ran

    std::size_t argmax() const { return posterior.argmax(); }
};

// log N(x; mu, sigma)
double gaussian_log_pdf(double x, double mu, double sigma);

// Normalizes exp(log_weights) with max-subtraction. Falls back to uniform weights
// (flagged) when no entry is finite.
MixtureWeights normalize_log_weights(std::span<const double> log_weights, DistanceMode mode);

// w_s proportional to N(delta_s; mu_s^{t*}, sigma_s^{t*}), t* the nearest class of domain s.
MixtureWeights mixture_weights_l2gmm(const RoutingDecision& routing, const FittedMixture& mixture);

// Ablation kernels. L1/L2: w_s ~ exp(-d_s), d_s the nearest-prototype distance under
// that norm. MahalanobisDiag: w_s ~ exp(-d_s^2 / 2). Uniform: 1/N. L2Gmm forwards
// to mixture_weights_l2gmm.
MixtureWeights mixture_weights_kernel(EmbeddingView embedding, const RoutingDecision& routing,
                                      const FittedMixture& mixture, DistanceMode mode);

Posterior ensemble_posterior(const MixtureWeights& weights, const std::vector<Posterior>& per_domain);

Prediction infer(EmbeddingView embedding, const FittedMixture& mixture);

}  // namespace mopdil
