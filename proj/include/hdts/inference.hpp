#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "hdts/blocks.hpp"
#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"
#include "hdts/rng.hpp"

namespace hdts {

struct TestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.0;
    std::size_t b_reps = 0;
    BlockScheme scheme;
    std::vector<double> draws;  // sorted bootstrap draws behind critical_value
};

// Simultaneous band for the mean vector: all coordinates within half_width of
// the sample mean. Containment compares on the sqrt(n)-statistic scale so the
// decision matches the max-statistic tests bit for bit.
struct ConfidenceBand {
    std::vector<double> center;
    double half_width = 0.0;
    double critical_value = 0.0;
    double scale = 1.0;  // sqrt(n)
    double alpha = 0.0;

    bool contains(std::span<const double> mu) const {
        if (mu.size() != center.size()) throw DimensionMismatch("band: mu dimension");
        double dev = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j)
            dev = std::max(dev, std::abs(mu[j] - center[j]));
        return scale * dev <= critical_value;
    }
};

// Uniform confidence band via the single-size multiplier bootstrap on
// centered block sums.
inline ConfidenceBand uniform_confidence_band(const Matrix& x, std::size_t block_len,
                                              std::size_t b_reps, double alpha,
                                              RngStream stream) {
    const SingleScheme scheme = make_scheme_single(x.rows(), block_len);
    const BlockSums sums = block_sums_centered(x, scheme);
    const double scale = std::sqrt(static_cast<double>(x.rows()));
    const BootstrapDistribution dist =
        multiplier_bootstrap(sums, scale, b_reps, StatKind::Absolute, stream);

    ConfidenceBand band;
    band.center = x.col_means();
    band.critical_value = dist.critical_value(alpha);
    band.scale = scale;
    band.half_width = band.critical_value / scale;
    band.alpha = alpha;
    return band;
}

namespace detail {

// Stacked lag products: row i holds vec(x_i x_{i+l}') for each requested lag,
// i = 0..N-1 with N = n - max(lags). Column of (lag a, row j, col k) is
// a*p^2 + k*p + j, matching the column-stacking vec convention.
inline Matrix lag_product_panel(const Matrix& x, const std::vector<std::size_t>& lags) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t max_lag = *std::max_element(lags.begin(), lags.end());
    if (max_lag >= n) throw LagTooLarge("lag products: max lag must be below n");
    const std::size_t rows = n - max_lag;

    Matrix panel(rows, lags.size() * p * p);
    for (std::size_t i = 0; i < rows; ++i) {
        double* out = panel.row(i);
        const double* xi = x.row(i);
        for (std::size_t a = 0; a < lags.size(); ++a) {
            const double* xl = x.row(i + lags[a]);
            double* slot = out + a * p * p;
            for (std::size_t k = 0; k < p; ++k) {
                const double v = xl[k];
                for (std::size_t j = 0; j < p; ++j) slot[k * p + j] = xi[j] * v;
            }
        }
    }
    return panel;
}

}  // namespace detail

// Tests H0: gamma(l) = target(l) for every requested lag, using the max
// absolute deviation of the sample autocovariances and a multiplier bootstrap
// on the stacked lag products (centered at their sample means, block size
// b_n over the N = n - max(lag) product rows).
inline TestResult autocov_structure_test(const Matrix& x, std::vector<std::size_t> lags,
                                         const std::map<std::size_t, Matrix>& target,
                                         std::size_t block_len, std::size_t b_reps,
                                         double alpha, RngStream stream) {
    if (lags.empty()) throw MissingTarget("autocov test: need at least one lag");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    const std::size_t p = x.cols();
    const double scale = std::sqrt(static_cast<double>(x.rows()));

    double dev = 0.0;
    for (const std::size_t lag : lags) {
        const auto it = target.find(lag);
        if (it == target.end()) throw MissingTarget("autocov test: no target for a lag");
        if (it->second.rows() != p || it->second.cols() != p)
            throw DimensionMismatch("autocov test: target must be p x p");
        const Matrix gamma = sample_autocov(x, lag);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < p; ++k)
                dev = std::max(dev, std::abs(gamma(j, k) - it->second(j, k)));
    }

    const Matrix panel = detail::lag_product_panel(x, lags);
    const SingleScheme scheme = make_scheme_single(panel.rows(), block_len);
    const BlockSums sums = block_sums_centered(panel, scheme);
    const BootstrapDistribution dist =
        multiplier_bootstrap(sums, scale, b_reps, StatKind::Absolute, stream);

    TestResult res;
    res.statistic = scale * dev;
    res.critical_value = dist.critical_value(alpha);
    res.p_value = dist.p_value(res.statistic);
    res.reject = res.statistic > res.critical_value;
    res.alpha = alpha;
    res.b_reps = b_reps;
    res.scheme = scheme;
    res.draws = dist.draws;
    return res;
}

// White noise test: all autocovariances at lags 1..L vanish.
inline TestResult white_noise_test(const Matrix& x, std::size_t num_lags,
                                   std::size_t block_len, std::size_t b_reps, double alpha,
                                   RngStream stream) {
    if (num_lags < 1 || num_lags >= x.rows())
        throw LagTooLarge("white noise test: need 1 <= L < n");
    std::vector<std::size_t> lags(num_lags);
    std::map<std::size_t, Matrix> target;
    for (std::size_t l = 1; l <= num_lags; ++l) {
        lags[l - 1] = l;
        target.emplace(l, Matrix(x.cols(), x.cols()));
    }
    return autocov_structure_test(x, std::move(lags), target, block_len, b_reps, alpha,
                                  std::move(stream));
}

// Bandedness test: correlations vanish beyond bandwidth iota. The statistic
// is the max absolute sample correlation over pairs |j-k| >= iota; the
// bootstrap runs on the correlation-normalized product panel.
inline TestResult bandedness_test(const Matrix& x, std::size_t iota, std::size_t block_len,
                                  std::size_t b_reps, double alpha, RngStream stream) {
    const std::size_t p = x.cols();
    if (p < 2 || iota < 1 || iota >= p)
        throw InvalidBandwidth("bandedness test: need 1 <= iota < p");

    const Matrix gamma0 = sample_autocov(x, 0);
    for (std::size_t j = 0; j < p; ++j)
        if (!(gamma0(j, j) > 0.0))
            throw DegenerateVariance("bandedness test: zero-variance coordinate");

    std::vector<std::pair<std::size_t, std::size_t>> bandpairs;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = j + iota; k < p; ++k) bandpairs.emplace_back(j, k);

    const std::size_t n = x.rows();
    const double scale = std::sqrt(static_cast<double>(n));
    double dev = 0.0;
    std::vector<double> denom(bandpairs.size());
    for (std::size_t c = 0; c < bandpairs.size(); ++c) {
        const auto [j, k] = bandpairs[c];
        denom[c] = std::sqrt(gamma0(j, j) * gamma0(k, k));
        dev = std::max(dev, std::abs(gamma0(j, k)) / denom[c]);
    }

    Matrix panel(n, bandpairs.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = x.row(i);
        double* out = panel.row(i);
        for (std::size_t c = 0; c < bandpairs.size(); ++c)
            out[c] = r[bandpairs[c].first] * r[bandpairs[c].second] / denom[c];
    }

    const SingleScheme scheme = make_scheme_single(n, block_len);
    const BlockSums sums = block_sums_centered(panel, scheme);
    const BootstrapDistribution dist =
        multiplier_bootstrap(sums, scale, b_reps, StatKind::Absolute, stream);

    TestResult res;
    res.statistic = scale * dev;
    res.critical_value = dist.critical_value(alpha);
    res.p_value = dist.p_value(res.statistic);
    res.reject = res.statistic > res.critical_value;
    res.alpha = alpha;
    res.b_reps = b_reps;
    res.scheme = scheme;
    res.draws = dist.draws;
    return res;
}

}  // namespace hdts
