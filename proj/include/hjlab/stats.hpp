#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace hjlab {

// Pairwise summation over a fixed index order. Deterministic for a given
// input vector regardless of how the entries were produced.
inline double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;  // standard error of the mean
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    r.mean = pairwise_sum(xs) / static_cast<double>(r.n);
    if (r.n < 2) return r;
    std::vector<double> sq(r.n);
    for (std::size_t i = 0; i < r.n; ++i) {
        const double d = xs[i] - r.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

// Two-sided 95% Student t quantile. Table for small df, asymptote beyond.
inline double t_quantile_975(std::size_t df) {
    static constexpr double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return 12.706;
    if (df <= 30) return table[df - 1];
    if (df <= 60) return 2.042 - (2.042 - 2.000) * static_cast<double>(df - 30) / 30.0;
    return 1.96;
}

// Half-width of the 95% confidence interval for the mean.
inline double ci_halfwidth(const MeanStderr& m) {
    if (m.n < 2) return std::numeric_limits<double>::infinity();
    return t_quantile_975(m.n - 1) * m.stderr_;
}

}  // namespace hjlab
