#include "mopdil/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace mopdil {

std::size_t Posterior::argmax() const {
    if (probs.empty()) throw Error(ErrorCode::InvalidArgument, "empty posterior");
    return static_cast<std::size_t>(std::distance(probs.begin(), std::max_element(probs.begin(), probs.end())));
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw Error(ErrorCode::InvalidArgument, "softmax of an empty vector");
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& p : out) p /= total;
    return out;
}

Posterior per_domain_posterior(EmbeddingView embedding, const DomainModel& domain, double temperature) {
    if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
    if (!domain.has_heads()) {
        throw Error(ErrorCode::MissingHeads, "domain " + std::to_string(domain.domain_id) + " has no class heads");
    }
    std::vector<double> logits;
    logits.reserve(domain.class_heads.size());
    for (const auto& head : domain.class_heads) logits.push_back(cosine_similarity(embedding, head) / temperature);
    return Posterior{softmax(logits)};
}

}  // namespace mopdil
