#include <doctest.h>

#include <cmath>
#include <random>

#include "mopdil/core_model.hpp"
#include "support.hpp"

using namespace mopdil;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("cosine similarity examples") {
    CHECK(cosine_similarity(Embedding{1, 0}, Embedding{1, 0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity(Embedding{1, 0}, Embedding{0, 1}) == doctest::Approx(0.0));
    // oracle: 32 / sqrt(14 * 77)
    const double oracle = 32.0 / std::sqrt(14.0 * 77.0);
    CHECK(std::abs(oracle - 0.974632) < 1e-6);
    CHECK(std::abs(cosine_similarity(Embedding{1, 2, 3}, Embedding{4, 5, 6}) - oracle) < 1e-12);
}

TEST_CASE("cosine similarity errors") {
    CHECK(code_of([] { cosine_similarity(Embedding{0, 0}, Embedding{1, 0}); }) == ErrorCode::ZeroNormVector);
    CHECK(code_of([] { cosine_similarity(Embedding{1, 0}, Embedding{1e-13, 0}); }) == ErrorCode::ZeroNormVector);
    CHECK(code_of([] { cosine_similarity(Embedding{1, 0}, Embedding{1, 0, 0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("l2 and l1 distance examples") {
    CHECK(l2_distance(Embedding{0, 0}, Embedding{0, 0}) == 0.0);
    CHECK(l2_distance(Embedding{0, 0}, Embedding{3, 4}) == doctest::Approx(5.0));
    CHECK(std::abs(l2_distance(Embedding{1, 1, 1}, Embedding{2, 3, 4}) - std::sqrt(14.0)) < 1e-12);
    CHECK(std::abs(std::sqrt(14.0) - 3.741657) < 1e-6);

    CHECK(l1_distance(Embedding{0, 0}, Embedding{0, 0}) == 0.0);
    CHECK(l1_distance(Embedding{1, 2}, Embedding{3, 1}) == 3.0);
    CHECK(l1_distance(Embedding{1, 1, 1}, Embedding{2, 3, 4}) == 6.0);

    CHECK(code_of([] { l2_distance(Embedding{1}, Embedding{1, 2}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { l1_distance(Embedding{1}, Embedding{1, 2}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("diagonal mahalanobis examples") {
    CHECK(mahalanobis_diag_distance(Embedding{3, -1}, Embedding{3, -1}, Embedding{0.5, 7}) == 0.0);
    CHECK(mahalanobis_diag_distance(Embedding{2, 0}, Embedding{0, 0}, Embedding{1, 1}) == doctest::Approx(2.0));
    CHECK(mahalanobis_diag_distance(Embedding{2, 0}, Embedding{0, 0}, Embedding{4, 1}) == doctest::Approx(1.0));
    CHECK(code_of([] { mahalanobis_diag_distance(Embedding{1, 0}, Embedding{0, 0}, Embedding{0, 1}); }) ==
          ErrorCode::NonPositiveVariance);
    CHECK(code_of([] { mahalanobis_diag_distance(Embedding{1, 0}, Embedding{0, 0}, Embedding{1}); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("kernel properties on seeded random vectors") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = testing::uniform_index(rng, 1, 16);
        const auto a = testing::random_vector(rng, dim);
        const auto b = testing::random_vector(rng, dim);
        const auto c = testing::random_vector(rng, dim);

        CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(b, a)) <= 1e-12);
        CHECK(std::abs(l2_distance(a, b) - l2_distance(b, a)) <= 1e-12);
        CHECK(std::abs(l1_distance(a, b) - l1_distance(b, a)) <= 1e-12);

        const double scale = testing::uniform(rng, 1e-3, 1e3);
        Embedding scaled = a;
        for (double& x : scaled) x *= scale;
        CHECK(std::abs(cosine_similarity(scaled, b) - cosine_similarity(a, b)) <= 1e-9);

        CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-9);
        CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-9);

        CHECK(l2_distance(a, a) == 0.0);
        CHECK(l1_distance(a, a) == 0.0);
        Embedding var(dim, 0.3);
        CHECK(mahalanobis_diag_distance(a, a, var) == 0.0);
    }
}

TEST_CASE("config validation and mode names") {
    InferenceConfig c;
    CHECK_NOTHROW(c.validate());
    c.q = 1.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    c.q = 0.5;
    c.temperature = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    c.temperature = 1.0;
    c.sigma_floor = -1.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);

    for (auto m : {DistanceMode::L1, DistanceMode::L2, DistanceMode::L2Gmm, DistanceMode::MahalanobisDiag,
                   DistanceMode::Uniform}) {
        CHECK(parse_distance_mode(to_string(m)) == m);
    }
    for (auto m : {EnsembleMode::Hybrid, EnsembleMode::AlwaysSingle, EnsembleMode::AlwaysEnsemble}) {
        CHECK(parse_ensemble_mode(to_string(m)) == m);
    }
    CHECK(code_of([] { parse_distance_mode("cosine"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("embedding validation and ingestion") {
    CHECK(code_of([] { validate_embedding(Embedding{1.0, std::nan("")}); }) == ErrorCode::NonFiniteValue);
    CHECK(code_of([] { validate_embedding(Embedding{}); }) == ErrorCode::InvalidArgument);
    InferenceConfig c;
    CHECK(ingest(Embedding{3, 4}, c) == Embedding{3, 4});
    c.normalize_embeddings = true;
    const auto n = ingest(Embedding{3, 4}, c);
    CHECK(n[0] == doctest::Approx(0.6));
    CHECK(n[1] == doctest::Approx(0.8));
}
