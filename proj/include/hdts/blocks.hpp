#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"
#include "hdts/numerics.hpp"
#include "hdts/rng.hpp"

namespace hdts {

// Single-size block decomposition: l_n whole blocks of length b_n; any tail
// shorter than b_n is truncated but still counts toward full-sample means.
struct SingleScheme {
    std::size_t n = 0;
    std::size_t block_len = 0;   // b_n
    std::size_t num_blocks = 0;  // l_n
    std::size_t truncated = 0;
};

// Alternating big/small decomposition: r pairs of a big block (length `big`)
// followed by a small block (length `small`).
struct BigSmallScheme {
    std::size_t n = 0;
    std::size_t big = 0;    // N
    std::size_t small = 0;  // M
    std::size_t pairs = 0;  // r
    std::size_t truncated = 0;
};

using BlockScheme = std::variant<SingleScheme, BigSmallScheme>;

inline SingleScheme make_scheme_single(std::size_t n, std::size_t block_len) {
    if (block_len < 1 || block_len > n)
        throw InvalidBlockSize("block size must satisfy 1 <= b_n <= n");
    const std::size_t num_blocks = n / block_len;
    return {n, block_len, num_blocks, n - block_len * num_blocks};
}

inline BigSmallScheme make_scheme_bigsmall(std::size_t n, std::size_t big, std::size_t small) {
    if (small < 1 || big < small) throw InvalidBlockSize("need N >= M >= 1");
    if (big + small > n) throw InvalidBlockSize("block pair longer than the sample");
    const std::size_t pairs = n / (big + small);
    return {n, big, small, pairs, n - pairs * (big + small)};
}

// Per-block, per-coordinate sums. `a` holds one row per block (single-size)
// or per big block; `b` holds small-block sums when the scheme has them.
struct BlockSums {
    BlockScheme scheme;
    Matrix a;
    std::optional<Matrix> b;
};

// Block sums of the column-centered panel: row i of `a` is the sum of
// x_l - colmean(x) over block i. The mean runs over all n rows, including a
// truncated tail.
inline BlockSums block_sums_centered(const Matrix& x, const SingleScheme& scheme) {
    if (scheme.n != x.rows()) throw DimensionMismatch("block_sums_centered: scheme/panel n");
    const std::size_t p = x.cols();
    const std::vector<double> mean = x.col_means();
    Matrix sums(scheme.num_blocks, p);
    for (std::size_t i = 0; i < scheme.num_blocks; ++i) {
        double* out = sums.row(i);
        for (std::size_t l = i * scheme.block_len; l < (i + 1) * scheme.block_len; ++l) {
            const double* r = x.row(l);
            for (std::size_t j = 0; j < p; ++j) out[j] += r[j] - mean[j];
        }
    }
    return {scheme, std::move(sums), std::nullopt};
}

// Uncentered single-size block sums.
inline Matrix block_sums_raw(const Matrix& x, const SingleScheme& scheme) {
    if (scheme.n != x.rows()) throw DimensionMismatch("block_sums_raw: scheme/panel n");
    const std::size_t p = x.cols();
    Matrix sums(scheme.num_blocks, p);
    for (std::size_t i = 0; i < scheme.num_blocks; ++i) {
        double* out = sums.row(i);
        for (std::size_t l = i * scheme.block_len; l < (i + 1) * scheme.block_len; ++l) {
            const double* r = x.row(l);
            for (std::size_t j = 0; j < p; ++j) out[j] += r[j];
        }
    }
    return sums;
}

// Big/small block sums laid out N,M,N,M,...; optional centering at the
// full-sample column means.
inline BlockSums block_sums_bigsmall(const Matrix& x, const BigSmallScheme& scheme,
                                     bool center = false) {
    if (scheme.n != x.rows()) throw DimensionMismatch("block_sums_bigsmall: scheme/panel n");
    const std::size_t p = x.cols();
    std::vector<double> mean(p, 0.0);
    if (center) mean = x.col_means();

    Matrix big_sums(scheme.pairs, p);
    Matrix small_sums(scheme.pairs, p);
    const std::size_t period = scheme.big + scheme.small;
    for (std::size_t i = 0; i < scheme.pairs; ++i) {
        double* a = big_sums.row(i);
        double* b = small_sums.row(i);
        const std::size_t start = i * period;
        for (std::size_t l = start; l < start + scheme.big; ++l) {
            const double* r = x.row(l);
            for (std::size_t j = 0; j < p; ++j) a[j] += r[j] - mean[j];
        }
        for (std::size_t l = start + scheme.big; l < start + period; ++l) {
            const double* r = x.row(l);
            for (std::size_t j = 0; j < p; ++j) b[j] += r[j] - mean[j];
        }
    }
    return {scheme, std::move(big_sums), std::move(small_sums)};
}

// Signed max keeps max_j of the weighted sums; Absolute takes max_j of their
// magnitudes, which equals the signed max after appending negated coordinates.
enum class StatKind { Signed, Absolute };

struct BootstrapDistribution {
    std::vector<double> draws;  // sorted ascending
    StatKind kind = StatKind::Absolute;

    double critical_value(double alpha) const { return empirical_upper_quantile(draws, alpha); }
    double p_value(double observed) const { return bootstrap_p_value(draws, observed); }
};

namespace detail {

inline double reduce_max(std::span<const double> acc, StatKind kind) {
    double best = -std::numeric_limits<double>::infinity();
    if (kind == StatKind::Absolute) {
        for (double v : acc) best = std::max(best, std::abs(v));
    } else {
        for (double v : acc) best = std::max(best, v);
    }
    return best;
}

}  // namespace detail

// Multiplier bootstrap on precomputed block sums: every draw multiplies each
// block sum by a fresh standard normal and records the max statistic scaled
// by 1/scale. Draw b runs on stream.at(b), so draws are reproducible under
// any parallel schedule. For big/small sums the big and small weights for
// pair i are consumed in that order, which makes a big/small split with
// N = M = b_n reproduce the single-size engine draw for draw.
inline BootstrapDistribution multiplier_bootstrap(const BlockSums& sums, double scale,
                                                  std::size_t b_reps, StatKind kind,
                                                  RngStream stream) {
    if (b_reps < 1) throw EmptyDistribution("multiplier_bootstrap: b_reps >= 1");
    const std::size_t p = sums.a.cols();
    const std::size_t blocks = sums.a.rows();

    BootstrapDistribution dist;
    dist.kind = kind;
    dist.draws.resize(b_reps);
    std::vector<double> acc(p);
    for (std::size_t b = 0; b < b_reps; ++b) {
        RngStream rep = stream.at(b);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < blocks; ++i) {
            const double e = rep.next_normal();
            const double* row = sums.a.row(i);
            for (std::size_t j = 0; j < p; ++j) acc[j] += e * row[j];
            if (sums.b) {
                const double et = rep.next_normal();
                const double* srow = sums.b->row(i);
                for (std::size_t j = 0; j < p; ++j) acc[j] += et * srow[j];
            }
        }
        for (double& v : acc) v /= scale;
        dist.draws[b] = detail::reduce_max(acc, kind);
    }
    std::sort(dist.draws.begin(), dist.draws.end());
    return dist;
}

// Non-overlapping block bootstrap via block sums: a resample concatenates
// l_n uniformly drawn blocks, and its max statistic only depends on the
// drawn block sums relative to their across-block mean.
inline BootstrapDistribution nonoverlap_block_bootstrap(const Matrix& x, std::size_t block_len,
                                                        std::size_t b_reps, StatKind kind,
                                                        RngStream stream) {
    if (b_reps < 1) throw EmptyDistribution("nonoverlap_block_bootstrap: b_reps >= 1");
    const SingleScheme scheme = make_scheme_single(x.rows(), block_len);
    const Matrix sums = block_sums_raw(x, scheme);
    const std::size_t p = x.cols();
    const std::size_t blocks = scheme.num_blocks;

    std::vector<double> mean(p, 0.0);
    for (std::size_t i = 0; i < blocks; ++i) {
        const double* row = sums.row(i);
        for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(blocks);

    const double scale = std::sqrt(static_cast<double>(x.rows()));
    BootstrapDistribution dist;
    dist.kind = kind;
    dist.draws.resize(b_reps);
    std::vector<double> acc(p);
    for (std::size_t b = 0; b < b_reps; ++b) {
        RngStream rep = stream.at(b);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < blocks; ++i) {
            const auto pick = static_cast<std::size_t>(rep.next_below(blocks));
            const double* row = sums.row(pick);
            for (std::size_t j = 0; j < p; ++j) acc[j] += row[j] - mean[j];
        }
        for (double& v : acc) v /= scale;
        dist.draws[b] = detail::reduce_max(acc, kind);
    }
    std::sort(dist.draws.begin(), dist.draws.end());
    return dist;
}

// Materialized non-overlapping block resample of the first l_n * b_n rows.
inline Matrix nonoverlap_resample(const Matrix& x, std::size_t block_len, RngStream& stream) {
    const SingleScheme scheme = make_scheme_single(x.rows(), block_len);
    Matrix out(scheme.num_blocks * block_len, x.cols());
    for (std::size_t i = 0; i < scheme.num_blocks; ++i) {
        const auto pick = static_cast<std::size_t>(stream.next_below(scheme.num_blocks));
        for (std::size_t l = 0; l < block_len; ++l) {
            const double* src = x.row(pick * block_len + l);
            double* dst = out.row(i * block_len + l);
            std::copy(src, src + x.cols(), dst);
        }
    }
    return out;
}

// Sample autocovariance at a lag: (1/n) sum_{i<=n-lag} x_i x_{i+lag}', no
// mean correction and divisor n, both as in the testing procedures.
inline Matrix sample_autocov(const Matrix& x, std::size_t lag) {
    const std::size_t n = x.rows();
    if (lag >= n) throw LagTooLarge("sample_autocov: lag must be below n");
    const std::size_t p = x.cols();
    Matrix gamma(p, p);
    for (std::size_t i = 0; i + lag < n; ++i) {
        const double* xi = x.row(i);
        const double* xl = x.row(i + lag);
        for (std::size_t j = 0; j < p; ++j) {
            double* out = gamma.row(j);
            const double v = xi[j];
            for (std::size_t k = 0; k < p; ++k) out[k] += v * xl[k];
        }
    }
    const auto dn = static_cast<double>(n);
    for (auto& v : gamma.data()) v /= dn;
    return gamma;
}

// Deviations of the blockwise long-run covariance estimates from a reference
// matrix, max over entries: big blocks alone, small blocks alone, and the
// combined estimator that drives the multiplier bootstrap.
struct LongRunCovDiag {
    double e_a = 0.0;
    double e_b = 0.0;
    double e_ab = 0.0;
};

inline LongRunCovDiag longrun_cov_diag(const Matrix& x, const BigSmallScheme& scheme,
                                       const Matrix& reference) {
    if (reference.rows() != x.cols() || reference.cols() != x.cols())
        throw DimensionMismatch("longrun_cov_diag: reference must be p x p");
    const BlockSums sums = block_sums_bigsmall(x, scheme, /*center=*/false);
    const std::size_t p = x.cols();
    const auto r = static_cast<double>(scheme.pairs);
    const auto n = static_cast<double>(scheme.n);

    LongRunCovDiag diag;
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) {
            double aa = 0.0, bb = 0.0;
            for (std::size_t i = 0; i < scheme.pairs; ++i) {
                aa += sums.a(i, j) * sums.a(i, k);
                bb += (*sums.b)(i, j) * (*sums.b)(i, k);
            }
            const double ref = reference(j, k);
            diag.e_a = std::max(diag.e_a, std::abs(aa / (r * static_cast<double>(scheme.big)) - ref));
            diag.e_b = std::max(diag.e_b, std::abs(bb / (r * static_cast<double>(scheme.small)) - ref));
            diag.e_ab = std::max(diag.e_ab, std::abs((aa + bb) / n - ref));
        }
    }
    return diag;
}

// Triangular-weighted long-run covariance sum_{|l|<n} (n-|l|) gamma(l) / n
// for a known autocovariance sequence gamma(0..max_lag), zero beyond.
inline Matrix longrun_cov_reference(const std::vector<Matrix>& gammas, std::size_t n) {
    if (gammas.empty()) throw DimensionMismatch("longrun_cov_reference: need gamma(0)");
    const std::size_t p = gammas[0].rows();
    Matrix ref(p, p);
    for (std::size_t l = 0; l < gammas.size() && l < n; ++l) {
        const double w = static_cast<double>(n - l) / static_cast<double>(n);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < p; ++k) {
                // gamma(-l) = gamma(l)'
                ref(j, k) += l == 0 ? w * gammas[0](j, k)
                                    : w * (gammas[l](j, k) + gammas[l](k, j));
            }
    }
    return ref;
}

}  // namespace hdts
