#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace powvar {

/// Neumaier-compensated accumulator. Cancellation-heavy sums (planar
/// increments of delta^2, Riemann sums of signed powers) go through this.
class Accumulator {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double neumaierSum(const std::vector<double>& xs) {
    Accumulator acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

/// Fixed-shape pairwise reduction over [0, n). The tree depends only on n,
/// never on scheduling, so ensemble statistics are reproducible bit-for-bit.
inline double pairwiseSum(const std::function<double(std::size_t)>& term,
                          std::size_t begin, std::size_t end) {
    std::size_t n = end - begin;
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        return s;
    }
    std::size_t mid = begin + n / 2;
    return pairwiseSum(term, begin, mid) + pairwiseSum(term, mid, end);
}

inline double pairwiseSum(const std::vector<double>& xs) {
    return pairwiseSum([&](std::size_t i) { return xs[i]; }, 0, xs.size());
}

}  // namespace powvar
