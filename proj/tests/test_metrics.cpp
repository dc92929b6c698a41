#include <doctest.h>

#include <cmath>
#include <random>

#include "mopdil/error.hpp"
#include "mopdil/metrics.hpp"

using namespace mopdil;

namespace {

AccuracyMatrix filled(std::size_t n, double v) {
    AccuracyMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m.set(i, j, v);
    }
    return m;
}

}  // namespace

TEST_CASE("average accuracy") {
    AccuracyMatrix m(2);
    m.set(0, 1, 0.8);
    m.set(1, 1, 0.9);
    CHECK(average_accuracy(m) == doctest::Approx(0.85));
    CHECK(average_accuracy(filled(4, 1.0)) == 1.0);

    AccuracyMatrix three(3);
    three.set(0, 2, 0.5);
    three.set(1, 2, 0.7);
    three.set(2, 2, 0.9);
    CHECK(std::abs(average_accuracy(three) - 0.7) < 1e-12);

    AccuracyMatrix partial(2);
    partial.set(0, 1, 0.5);
    CHECK_THROWS_AS(average_accuracy(partial), Error);
}

TEST_CASE("average forgetting") {
    CHECK(average_forgetting(filled(3, 0.7)) == 0.0);

    AccuracyMatrix two(2);
    two.set(0, 0, 0.9);
    two.set(0, 1, 0.8);
    two.set(1, 1, 0.5);
    CHECK(std::abs(average_forgetting(two) - (-0.1)) < 1e-12);

    // BWT_1 = ((0.8-0.9) + (0.7-0.9))/2 = -0.15, BWT_2 = 0; AF = -0.075
    AccuracyMatrix three(3);
    three.set(0, 0, 0.9);
    three.set(0, 1, 0.8);
    three.set(0, 2, 0.7);
    three.set(1, 1, 0.8);
    three.set(1, 2, 0.8);
    three.set(2, 2, 0.6);
    CHECK(std::abs(average_forgetting(three) - (-0.075)) <= 1e-12);

    CHECK_THROWS_AS(average_forgetting(filled(1, 0.5)), Error);
    AccuracyMatrix holes(3);
    holes.set(0, 0, 0.5);
    CHECK_THROWS_AS(average_forgetting(holes), Error);
}

TEST_CASE("cumulative unseen accuracy") {
    CHECK(cumulative_unseen_accuracy(filled(4, 0.5)) == 0.5);

    AccuracyMatrix two(2);
    two.set(1, 0, 0.6);
    CHECK(cumulative_unseen_accuracy(two) == 0.6);

    AccuracyMatrix three(3);
    three.set(1, 0, 0.4);
    three.set(2, 0, 0.6);
    three.set(2, 1, 0.8);
    CHECK(std::abs(cumulative_unseen_accuracy(three) - 0.65) <= 1e-12);

    CHECK_THROWS_AS(cumulative_unseen_accuracy(AccuracyMatrix(1)), Error);
}

TEST_CASE("forgetting vanishes exactly for row-constant matrices and respects bounds") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 5;
        AccuracyMatrix constant(n), random(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double row = u(rng);
            for (std::size_t j = 0; j < n; ++j) {
                constant.set(i, j, row);
                random.set(i, j, u(rng));
            }
        }
        CHECK(average_forgetting(constant) == 0.0);
        const double af = average_forgetting(random);
        CHECK((af >= -1.0 && af <= 1.0));
        const double aa = average_accuracy(random);
        const double ca = cumulative_unseen_accuracy(random);
        CHECK((aa >= 0.0 && aa <= 1.0));
        CHECK((ca >= 0.0 && ca <= 1.0));
    }
}

TEST_CASE("entries outside [0, 1] are rejected") {
    AccuracyMatrix m(2);
    CHECK_THROWS_AS(m.set(0, 0, 1.5), Error);
    CHECK_THROWS_AS(m.set(2, 0, 0.5), Error);
    CHECK_FALSE(m.populated(0, 0));
}
