#pragma once

// Seeded generators shared by the unit and acceptance suites.

#include <random>
#include <vector>

#include "mopdil/domain_fit.hpp"

namespace mopdil::testing {

inline Embedding random_vector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Embedding v(dim);
    for (double& x : v) x = normal(rng);
    return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Domain with random prototypes and statistics, bypassing the fitting path.
inline DomainModel random_domain(std::mt19937_64& rng, int id, std::size_t dim, std::size_t classes) {
    DomainModel d;
    d.domain_id = id;
    for (std::size_t k = 0; k < classes; ++k) {
        d.prototypes.push_back(random_vector(rng, dim, 2.0));
        d.class_heads.push_back(normalized(random_vector(rng, dim)));
        Embedding var(dim);
        for (double& v : var) v = uniform(rng, 0.05, 2.0);
        d.diag_variance.push_back(std::move(var));
        d.gaussians.push_back(ClassGaussian{uniform(rng, 0.0, 4.0), uniform(rng, 0.1, 2.0), 10});
    }
    return d;
}

inline FittedMixture random_mixture(std::mt19937_64& rng, std::size_t dim, std::size_t domains,
                                    std::size_t classes, InferenceConfig config = {}) {
    FittedMixture m(dim, classes, config);
    for (std::size_t s = 0; s < domains; ++s) m.append(random_domain(rng, static_cast<int>(s), dim, classes));
    return m;
}

// Samples drawn around given class means, all in one domain.
inline std::vector<LabeledSample> cluster_samples(std::mt19937_64& rng, int domain,
                                                  const std::vector<Embedding>& means, std::size_t per_class,
                                                  double sigma) {
    std::vector<LabeledSample> out;
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t k = 0; k < means.size(); ++k) {
        for (std::size_t i = 0; i < per_class; ++i) {
            LabeledSample s;
            s.id = std::to_string(out.size());
            s.domain_id = domain;
            s.class_id = static_cast<int>(k);
            s.embedding = means[k];
            for (double& x : s.embedding) x += normal(rng);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace mopdil::testing
