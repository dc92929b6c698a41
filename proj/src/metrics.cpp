#include "mopdil/metrics.hpp"

#include <cmath>
#include <string>

#include "mopdil/error.hpp"

namespace mopdil {

namespace {

void require_two(const AccuracyMatrix& m) {
    if (m.size() < 2) throw Error(ErrorCode::TooFewDomains, "metric needs at least two domains");
}

}  // namespace

AccuracyMatrix::AccuracyMatrix(std::size_t num_domains) : n_(num_domains), values_(num_domains * num_domains) {}

void AccuracyMatrix::set(std::size_t domain, std::size_t step, double accuracy) {
    if (domain >= n_ || step >= n_) throw Error(ErrorCode::IndexOutOfRange, "accuracy matrix index");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "accuracy " + std::to_string(accuracy) + " outside [0, 1]");
    }
    values_[domain * n_ + step] = accuracy;
}

bool AccuracyMatrix::populated(std::size_t domain, std::size_t step) const {
    return domain < n_ && step < n_ && values_[domain * n_ + step].has_value();
}

std::optional<double> AccuracyMatrix::get(std::size_t domain, std::size_t step) const {
    if (domain >= n_ || step >= n_) return std::nullopt;
    return values_[domain * n_ + step];
}

double AccuracyMatrix::at(std::size_t domain, std::size_t step) const {
    if (!populated(domain, step)) {
        throw Error(ErrorCode::IncompleteMatrix,
                    "A[" + std::to_string(domain) + "][" + std::to_string(step) + "] is not populated");
    }
    return *values_[domain * n_ + step];
}

double average_accuracy(const AccuracyMatrix& m) {
    if (m.size() == 0) throw Error(ErrorCode::IncompleteMatrix, "empty accuracy matrix");
    const std::size_t last = m.size() - 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) sum += m.at(i, last);
    return sum / static_cast<double>(m.size());
}

double average_forgetting(const AccuracyMatrix& m) {
    require_two(m);
    const std::size_t n = m.size();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double base = m.at(i, i);
        double bwt = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) bwt += m.at(i, j) - base;
        sum += bwt / static_cast<double>(n - 1 - i);
    }
    return sum / static_cast<double>(n - 1);
}

double cumulative_unseen_accuracy(const AccuracyMatrix& m) {
    require_two(m);
    const std::size_t n = m.size();
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double unseen = 0.0;
        for (std::size_t i = j + 1; i < n; ++i) unseen += m.at(i, j);
        sum += unseen / static_cast<double>(n - 1 - j);
    }
    return sum / static_cast<double>(n - 1);
}

}  // namespace mopdil
