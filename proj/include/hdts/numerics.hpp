#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"

namespace hdts {

// Lower-triangular Cholesky factor; entries above the diagonal stay zero.
struct LowerTriangular {
    std::size_t dim = 0;
    Matrix entries;

    // y = L * x
    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            const double* r = entries.row(i);
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k) acc += r[k] * x[k];
            y[i] = acc;
        }
        return y;
    }
};

// Cholesky factorization of a symmetric positive definite matrix.
// A pivot at or below 1e-12 times the largest diagonal entry fails.
inline LowerTriangular cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix not square");
    const std::size_t p = a.rows();
    double max_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, a(j, j));
    const double threshold = 1e-12 * max_diag;

    LowerTriangular lt{p, Matrix(p, p)};
    Matrix& l = lt.entries;
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        const double* lj = l.row(j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > threshold)) throw NotPositiveDefinite("cholesky: pivot underflow");
        const double root = std::sqrt(d);
        l(j, j) = root;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            const double* li = l.row(i);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            l(i, j) = s / root;
        }
    }
    return lt;
}

// In-place rank-one update: on exit, L L' equals the old L L' + x x'.
// Consumes x as workspace.
inline void cholesky_rank1_update(LowerTriangular& lt, std::vector<double>& x) {
    Matrix& l = lt.entries;
    const std::size_t p = lt.dim;
    for (std::size_t k = 0; k < p; ++k) {
        const double lkk = l(k, k);
        const double r = std::hypot(lkk, x[k]);
        const double inv_c = lkk / r;
        const double s = x[k] / lkk;
        l(k, k) = r;
        // c^2 - s^2 = 1, so both updates can use the pre-update values
        double* col = &l(k, k);  // walk column k downward, stride = row length
        for (std::size_t i = k + 1; i < p; ++i) {
            col += p;
            const double old = *col;
            *col = (old + s * x[i]) * inv_c;
            x[i] = (x[i] - s * old) * inv_c;
        }
    }
}

// Upper quantile of an ascending-sorted bootstrap sample: the k-th order
// statistic with k = ceil((1-alpha)(B+1)) clipped to [1, B]. The small nudge
// keeps ceil() exact when (1-alpha)(B+1) is an integer up to binary rounding.
inline double empirical_upper_quantile(std::span<const double> sorted_draws, double alpha) {
    const std::size_t b = sorted_draws.size();
    if (b == 0) throw EmptyDistribution("empirical_upper_quantile: no draws");
    const double pos = (1.0 - alpha) * static_cast<double>(b + 1);
    auto k = static_cast<std::ptrdiff_t>(std::ceil(pos - 1e-9));
    k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(b));
    return sorted_draws[static_cast<std::size_t>(k - 1)];
}

// Lower quantile with the same (B+1) order-statistic convention.
inline double empirical_quantile(std::span<const double> sorted_draws, double prob) {
    return empirical_upper_quantile(sorted_draws, 1.0 - prob);
}

// Exact-test p-value: (1 + #{draws >= observed}) / (B + 1).
inline double bootstrap_p_value(std::span<const double> sorted_draws, double observed) {
    if (sorted_draws.empty()) throw EmptyDistribution("bootstrap_p_value: no draws");
    const auto it = std::lower_bound(sorted_draws.begin(), sorted_draws.end(), observed);
    const auto ge = static_cast<std::size_t>(sorted_draws.end() - it);
    return static_cast<double>(1 + ge) / static_cast<double>(sorted_draws.size() + 1);
}

}  // namespace hdts
