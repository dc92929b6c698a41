#pragma once

// Continual-learning metrics over an accuracy matrix.
//
// Indices are zero-based: at(i, j) is the accuracy on domain i after adapting on
// domains 0..j. Entries with i > j are evaluations on not-yet-seen domains.

#include <cstddef>
#include <optional>
#include <vector>

namespace mopdil {

class AccuracyMatrix {
public:
    AccuracyMatrix() = default;
    explicit AccuracyMatrix(std::size_t num_domains);

    std::size_t size() const noexcept { return n_; }

    // Value must lie in [0, 1].
    void set(std::size_t domain, std::size_t step, double accuracy);
    bool populated(std::size_t domain, std::size_t step) const;
    // IncompleteMatrix if the entry was never set.
    double at(std::size_t domain, std::size_t step) const;
    std::optional<double> get(std::size_t domain, std::size_t step) const;

private:
    std::size_t n_ = 0;
    std::vector<std::optional<double>> values_;
};

// Mean of the final column.
double average_accuracy(const AccuracyMatrix& m);

// Mean over i < N-1 of BWT_i, with BWT_i the mean of (A[i][j] - A[i][i]) over j > i.
// Each BWT_i is normalized by its own term count (N-1-i in zero-based indices).
double average_forgetting(const AccuracyMatrix& m);

// Mean over steps j < N-1 of the mean accuracy on unseen domains i > j.
double cumulative_unseen_accuracy(const AccuracyMatrix& m);

}  // namespace mopdil
