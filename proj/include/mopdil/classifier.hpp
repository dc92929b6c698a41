#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mopdil/domain_fit.hpp"

namespace mopdil {

struct Posterior {
    std::vector<double> probs;

    std::size_t num_classes() const noexcept { return probs.size(); }
    // Ties break to the lowest class id.
    std::size_t argmax() const;

    bool operator==(const Posterior&) const = default;
};

// Max-subtracted softmax; the returned probabilities sum to one.
std::vector<double> softmax(std::span<const double> logits);

// Cosine-softmax over the domain's class heads, scaled by 1/temperature.
Posterior per_domain_posterior(EmbeddingView embedding, const DomainModel& domain, double temperature);

}  // namespace mopdil
