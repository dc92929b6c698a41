#pragma once

// Nearest-prototype domain selection and the CDF out-of-distribution gate.

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "mopdil/domain_fit.hpp"

namespace mopdil {

struct RoutingDecision {
    std::vector<double> per_domain_delta;
    std::vector<std::size_t> per_domain_nearest_class;
    std::size_t selected_domain = 0;
    // Gate fields; NaN / false until route() fills them.
    double cdf_value = std::numeric_limits<double>::quiet_NaN();
    bool is_in_distribution = false;

    bool operator==(const RoutingDecision&) const = default;
};

struct NearestPrototype {
    double distance = 0.0;
    std::size_t class_id = 0;
};

// Minimum L2 distance to any prototype of the domain; ties go to the lowest class id.
NearestPrototype delta(EmbeddingView embedding, const DomainModel& domain);

// Fills deltas and nearest classes; leaves the gate fields unset.
RoutingDecision select_domain(EmbeddingView embedding, const FittedMixture& mixture);

double gaussian_cdf(double x, double mu, double sigma);

// select_domain plus the gate: in-distribution iff F(delta_{s*}) <= q.
RoutingDecision route(EmbeddingView embedding, const FittedMixture& mixture);

}  // namespace mopdil
