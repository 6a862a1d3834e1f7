#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "hdts/blocks.hpp"
#include "hdts/errors.hpp"
#include "hdts/inference.hpp"
#include "hdts/matrix.hpp"
#include "hdts/rng.hpp"

namespace hdts {

// A statistic with an approximately linear expansion. Both callbacks act on
// the window panel (one row per length-d0 window, flattened), so they also
// apply unchanged to block-resampled pseudo panels:
//   estimate:  window panel -> q0 parameter estimates
//   influence: window panel -> N0 x q0 panel of estimated influence rows
struct InfluenceSpec {
    std::size_t d0 = 1;
    std::size_t q0 = 1;
    std::function<std::vector<double>(const Matrix&)> estimate;
    std::function<Matrix(const Matrix&)> influence;
};

// Sliding windows of length d0, flattened row-wise: row i = (u_i, ..., u_{i+d0-1}).
inline Matrix window_panel(const Matrix& u, std::size_t d0) {
    if (d0 < 1 || d0 > u.rows()) throw DimensionMismatch("window_panel: need 1 <= d0 <= n");
    const std::size_t p = u.cols();
    const std::size_t n0 = u.rows() - d0 + 1;
    Matrix panel(n0, d0 * p);
    for (std::size_t i = 0; i < n0; ++i) {
        double* out = panel.row(i);
        for (std::size_t d = 0; d < d0; ++d) {
            const double* r = u.row(i + d);
            std::copy(r, r + p, out + d * p);
        }
    }
    return panel;
}

// Rebuild the underlying series from a window panel (inverse of window_panel).
inline Matrix series_from_windows(const Matrix& windows, std::size_t p) {
    if (windows.cols() % p != 0) throw DimensionMismatch("series_from_windows: cols % p");
    const std::size_t d0 = windows.cols() / p;
    const std::size_t n = windows.rows() + d0 - 1;
    Matrix u(n, p);
    for (std::size_t i = 0; i < windows.rows(); ++i)
        std::copy(windows.row(i), windows.row(i) + p, u.row(i));
    const double* last = windows.row(windows.rows() - 1);
    for (std::size_t d = 1; d < d0; ++d)
        std::copy(last + d * p, last + (d + 1) * p, u.row(windows.rows() - 1 + d));
    return u;
}

namespace detail {

inline std::vector<double> checked_estimate(const InfluenceSpec& spec, const Matrix& windows) {
    std::vector<double> theta = spec.estimate(windows);
    if (theta.size() != spec.q0) throw DimensionMismatch("estimate: wrong q0");
    return theta;
}

inline double max_abs_gap(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("target dimension");
    double dev = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) dev = std::max(dev, std::abs(a[j] - b[j]));
    return dev;
}

}  // namespace detail

// Max-statistic test of H0: theta = target via the big/small multiplier
// bootstrap on the estimated influence panel. The absolute max realizes the
// signed max over coordinates doubled with their negations.
inline TestResult linstat_test(const Matrix& u, const InfluenceSpec& spec,
                               std::span<const double> target, const BigSmallScheme& scheme,
                               std::size_t b_reps, double alpha, RngStream stream) {
    const Matrix windows = window_panel(u, spec.d0);
    if (scheme.n != windows.rows()) throw DimensionMismatch("linstat: scheme n must be N0");

    const std::vector<double> theta = detail::checked_estimate(spec, windows);
    const double root_n0 = std::sqrt(static_cast<double>(windows.rows()));
    const double statistic = root_n0 * detail::max_abs_gap(theta, target);

    Matrix infl = spec.influence(windows);
    if (infl.rows() != windows.rows() || infl.cols() != spec.q0)
        throw DimensionMismatch("influence: panel must be N0 x q0");

    const BlockSums sums = block_sums_bigsmall(infl, scheme, /*center=*/false);
    const double scale = std::sqrt(static_cast<double>(u.rows()));
    const BootstrapDistribution dist =
        multiplier_bootstrap(sums, scale, b_reps, StatKind::Absolute, stream);

    TestResult res;
    res.statistic = statistic;
    res.critical_value = dist.critical_value(alpha);
    res.p_value = dist.p_value(statistic);
    res.reject = statistic > res.critical_value;
    res.alpha = alpha;
    res.b_reps = b_reps;
    res.scheme = scheme;
    res.draws = dist.draws;
    return res;
}

// Non-overlapping block bootstrap alternative: re-estimates the functional on
// block-resampled window panels, so no influence estimate is needed.
inline TestResult linstat_test_blockboot(const Matrix& u, const InfluenceSpec& spec,
                                         std::span<const double> target, std::size_t block_len,
                                         std::size_t b_reps, double alpha, RngStream stream) {
    if (b_reps < 1) throw EmptyDistribution("linstat blockboot: b_reps >= 1");
    const Matrix windows = window_panel(u, spec.d0);
    const SingleScheme scheme = make_scheme_single(windows.rows(), block_len);

    const std::vector<double> theta = detail::checked_estimate(spec, windows);
    const double root_n0 = std::sqrt(static_cast<double>(windows.rows()));
    const double statistic = root_n0 * detail::max_abs_gap(theta, target);

    BootstrapDistribution dist;
    dist.kind = StatKind::Absolute;
    dist.draws.resize(b_reps);
    for (std::size_t b = 0; b < b_reps; ++b) {
        RngStream rep = stream.at(b);
        const Matrix resampled = nonoverlap_resample(windows, block_len, rep);
        const std::vector<double> theta_star = detail::checked_estimate(spec, resampled);
        dist.draws[b] = root_n0 * detail::max_abs_gap(theta_star, theta);
    }
    std::sort(dist.draws.begin(), dist.draws.end());

    TestResult res;
    res.statistic = statistic;
    res.critical_value = dist.critical_value(alpha);
    res.p_value = dist.p_value(statistic);
    res.reject = statistic > res.critical_value;
    res.alpha = alpha;
    res.b_reps = b_reps;
    res.scheme = scheme;
    res.draws = dist.draws;
    return res;
}

// Studentized variant: both the statistic and every bootstrap coordinate are
// divided by the blockwise standard deviation estimate
// sigma_j^2 = (1/n) sum_i (A_ij^2 + B_ij^2).
inline TestResult studentized_variant(const Matrix& u, const InfluenceSpec& spec,
                                      std::span<const double> target,
                                      const BigSmallScheme& scheme, std::size_t b_reps,
                                      double alpha, RngStream stream) {
    const Matrix windows = window_panel(u, spec.d0);
    if (scheme.n != windows.rows()) throw DimensionMismatch("linstat: scheme n must be N0");

    const std::vector<double> theta = detail::checked_estimate(spec, windows);
    Matrix infl = spec.influence(windows);
    if (infl.rows() != windows.rows() || infl.cols() != spec.q0)
        throw DimensionMismatch("influence: panel must be N0 x q0");

    BlockSums sums = block_sums_bigsmall(infl, scheme, /*center=*/false);
    const auto n = static_cast<double>(u.rows());
    std::vector<double> sigma(spec.q0, 0.0);
    for (std::size_t i = 0; i < scheme.pairs; ++i)
        for (std::size_t j = 0; j < spec.q0; ++j)
            sigma[j] += sums.a(i, j) * sums.a(i, j) + (*sums.b)(i, j) * (*sums.b)(i, j);
    for (double& s : sigma) {
        if (!(s > 0.0)) throw DegenerateVariance("studentized: zero variance coordinate");
        s = std::sqrt(s / n);
    }

    for (std::size_t i = 0; i < scheme.pairs; ++i)
        for (std::size_t j = 0; j < spec.q0; ++j) {
            sums.a(i, j) /= sigma[j];
            (*sums.b)(i, j) /= sigma[j];
        }

    const double root_n0 = std::sqrt(static_cast<double>(windows.rows()));
    double dev = 0.0;
    for (std::size_t j = 0; j < spec.q0; ++j)
        dev = std::max(dev, std::abs(theta[j] - target[j]) / sigma[j]);

    const BootstrapDistribution dist =
        multiplier_bootstrap(sums, std::sqrt(n), b_reps, StatKind::Absolute, stream);

    TestResult res;
    res.statistic = root_n0 * dev;
    res.critical_value = dist.critical_value(alpha);
    res.p_value = dist.p_value(res.statistic);
    res.reject = res.statistic > res.critical_value;
    res.alpha = alpha;
    res.b_reps = b_reps;
    res.scheme = scheme;
    res.draws = dist.draws;
    return res;
}

// ---- built-in specs ----

// Mean functional: d0 = 1, exactly linear, influence row i is x_i - xbar.
inline InfluenceSpec mean_influence_spec(std::size_t p) {
    InfluenceSpec spec;
    spec.d0 = 1;
    spec.q0 = p;
    spec.estimate = [](const Matrix& windows) { return windows.col_means(); };
    spec.influence = [](const Matrix& windows) {
        const std::vector<double> mean = windows.col_means();
        Matrix out(windows.rows(), windows.cols());
        for (std::size_t i = 0; i < windows.rows(); ++i) {
            const double* r = windows.row(i);
            double* o = out.row(i);
            for (std::size_t j = 0; j < windows.cols(); ++j) o[j] = r[j] - mean[j];
        }
        return out;
    };
    return spec;
}

// Autocovariance functional over lags 1..L, aligned with the white noise
// test: sqrt(N0) * estimate equals sqrt(n) * gamma_hat entrywise, so both
// routes produce the same max statistic. Influence rows are the lag products
// centered at their panel means.
inline InfluenceSpec autocov_influence_spec(std::size_t p, std::size_t num_lags) {
    if (num_lags < 1) throw LagTooLarge("autocov spec: need L >= 1");
    InfluenceSpec spec;
    spec.d0 = num_lags + 1;
    spec.q0 = p * p * num_lags;
    spec.estimate = [p, num_lags](const Matrix& windows) {
        const Matrix u = series_from_windows(windows, p);
        const double rescale = std::sqrt(static_cast<double>(u.rows()) /
                                         static_cast<double>(windows.rows()));
        std::vector<double> theta(p * p * num_lags);
        for (std::size_t l = 1; l <= num_lags; ++l) {
            const Matrix gamma = sample_autocov(u, l);
            double* slot = theta.data() + (l - 1) * p * p;
            for (std::size_t k = 0; k < p; ++k)
                for (std::size_t j = 0; j < p; ++j) slot[k * p + j] = rescale * gamma(j, k);
        }
        return theta;
    };
    spec.influence = [p, num_lags](const Matrix& windows) {
        Matrix out(windows.rows(), p * p * num_lags);
        for (std::size_t i = 0; i < windows.rows(); ++i) {
            const double* w = windows.row(i);
            double* o = out.row(i);
            for (std::size_t l = 1; l <= num_lags; ++l)
                for (std::size_t k = 0; k < p; ++k)
                    for (std::size_t j = 0; j < p; ++j)
                        o[(l - 1) * p * p + k * p + j] = w[j] * w[l * p + k];
        }
        const std::vector<double> mean = out.col_means();
        for (std::size_t i = 0; i < out.rows(); ++i) {
            double* o = out.row(i);
            for (std::size_t j = 0; j < out.cols(); ++j) o[j] -= mean[j];
        }
        return out;
    };
    return spec;
}

// ---- spectral means ----

// Spectral mean directions given by their Fourier coefficient matrices.
// coeffs[k] maps lag h (any sign) to the p x p coefficient; lags absent from
// the map are zero. For a real-valued spectral mean coeff(-h) = coeff(h)',
// and a lag stored only with one sign implies its mirror by that symmetry.
// truncation == 0 requests the default ceil(n^{1/3}) at evaluation time.
struct SpectralMeanSpec {
    std::size_t truncation = 0;
    std::vector<std::map<int, Matrix>> coeffs;
};

namespace detail {

inline std::size_t spectral_truncation(const SpectralMeanSpec& spec, std::size_t n) {
    std::size_t trunc = spec.truncation;
    if (trunc == 0)
        trunc = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    if (trunc > n - 1) throw TruncationTooLarge("spectral: truncation must be <= n-1");
    return trunc;
}

// Coefficient at lag h for direction k, materializing the mirror coeff(h)'
// when only -h is stored. Returns nullptr for an all-zero lag.
inline const Matrix* spectral_coeff(const std::map<int, Matrix>& dir, int h, Matrix& scratch) {
    if (const auto it = dir.find(h); it != dir.end()) return &it->second;
    const auto mirror = dir.find(-h);
    if (mirror == dir.end()) return nullptr;
    const Matrix& m = mirror->second;
    scratch = Matrix(m.cols(), m.rows());
    for (std::size_t a = 0; a < m.rows(); ++a)
        for (std::size_t b = 0; b < m.cols(); ++b) scratch(b, a) = m(a, b);
    return &scratch;
}

}  // namespace detail

// Truncated spectral mean per direction: sum over |h| < truncation of
// tr(coeff(h) Gamma_hat(h)) with Gamma_hat(h) = (1/n) sum u_{j+h} u_j' and
// Gamma_hat(-h) = Gamma_hat(h)'.
inline std::vector<double> spectral_mean_estimate(const Matrix& u, const SpectralMeanSpec& spec) {
    const std::size_t trunc = detail::spectral_truncation(spec, u.rows());
    const std::size_t p = u.cols();

    // sample_autocov(u, h)(j, k) = (1/n) sum_i u_{i,j} u_{i+h,k} = Gamma_hat(h)(k, j)
    std::map<std::size_t, Matrix> gamma;
    for (const auto& dir : spec.coeffs)
        for (const auto& [h, coeff] : dir) {
            const auto lag = static_cast<std::size_t>(std::abs(h));
            if (lag < trunc && !gamma.count(lag)) gamma.emplace(lag, sample_autocov(u, lag));
        }

    std::vector<double> theta(spec.coeffs.size(), 0.0);
    Matrix scratch;
    for (std::size_t k = 0; k < spec.coeffs.size(); ++k) {
        for (int h = -static_cast<int>(trunc) + 1; h < static_cast<int>(trunc); ++h) {
            const Matrix* coeff = detail::spectral_coeff(spec.coeffs[k], h, scratch);
            if (!coeff) continue;
            if (coeff->rows() != p || coeff->cols() != p)
                throw DimensionMismatch("spectral: coefficient must be p x p");
            const Matrix& g = gamma.at(static_cast<std::size_t>(std::abs(h)));
            // tr(coeff * Gamma(h)): Gamma(h)(b,a) = g(a,b) for h >= 0, g(b,a) below
            double acc = 0.0;
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    acc += (*coeff)(a, b) * (h >= 0 ? g(a, b) : g(b, a));
            theta[k] += acc;
        }
    }
    return theta;
}

// InfluenceSpec realizing the spectral-mean test: windows of length
// truncation, influence rows from within-window lag products against the
// plug-in autocovariances of the original sample. Lags below zero enter
// through the transposed pair inside the same window.
inline InfluenceSpec spectral_mean_influence(const Matrix& u, const SpectralMeanSpec& spec) {
    const std::size_t trunc = detail::spectral_truncation(spec, u.rows());
    const std::size_t p = u.cols();
    const std::size_t q0 = spec.coeffs.size();

    SpectralMeanSpec pinned = spec;
    pinned.truncation = trunc;

    // plug-in centering terms tr(coeff(h) Gamma_hat(h)), fixed at the original sample
    std::vector<double> center(q0, 0.0);
    {
        const std::vector<double> theta = spectral_mean_estimate(u, pinned);
        for (std::size_t k = 0; k < q0; ++k) center[k] = theta[k];
    }

    InfluenceSpec out;
    out.d0 = trunc;
    out.q0 = q0;
    out.estimate = [pinned, p](const Matrix& windows) {
        return spectral_mean_estimate(series_from_windows(windows, p), pinned);
    };
    out.influence = [pinned, p, q0, center, trunc](const Matrix& windows) {
        Matrix scratch;
        Matrix panel(windows.rows(), q0);
        for (std::size_t k = 0; k < q0; ++k) {
            for (int h = -static_cast<int>(trunc) + 1; h < static_cast<int>(trunc); ++h) {
                const Matrix* coeff = detail::spectral_coeff(pinned.coeffs[k], h, scratch);
                if (!coeff) continue;
                const auto lag = static_cast<std::size_t>(std::abs(h));
                for (std::size_t i = 0; i < windows.rows(); ++i) {
                    const double* w = windows.row(i);
                    double acc = 0.0;
                    if (h >= 0) {
                        // tr(C M) = sum C(a,b) M(b,a); here M(b,a) = u_{i+h,b} u_{i,a}
                        for (std::size_t a = 0; a < p; ++a)
                            for (std::size_t b = 0; b < p; ++b)
                                acc += (*coeff)(a, b) * w[lag * p + b] * w[a];
                    } else {
                        // mirrored pair (u_i u_{i+|h|}')(b,a) = u_{i,b} u_{i+|h|,a}
                        for (std::size_t a = 0; a < p; ++a)
                            for (std::size_t b = 0; b < p; ++b)
                                acc += (*coeff)(a, b) * w[b] * w[lag * p + a];
                    }
                    panel(i, k) += acc;
                }
            }
            for (std::size_t i = 0; i < windows.rows(); ++i) panel(i, k) -= center[k];
        }
        return panel;
    };
    return out;
}

}  // namespace hdts
