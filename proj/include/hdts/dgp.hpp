#pragma once

#include <cmath>
#include <cstddef>

#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"
#include "hdts/numerics.hpp"
#include "hdts/rng.hpp"

namespace hdts {

enum class DgpModel { Var1, MArch, ArchFig1, IidMaCov };

// Error-process family for the VAR(1) recursion and the IidMaCov model.
//   CommonFactor: coordinates share a common N(0,1) factor, (z_j + z_0)/sqrt(2)
//   MaUnif:       moving average over coordinates, Unif(2,3) weights, N(0,1) noise
//   MaGamma:      same moving average with centered Gamma(4,1) noise
enum class ErrorCase { CommonFactor, MaUnif, MaGamma };

struct DgpConfig {
    DgpModel model = DgpModel::Var1;
    std::size_t n = 0;
    std::size_t p = 0;
    double rho = 0.0;
    ErrorCase error_case = ErrorCase::CommonFactor;
    double beta0 = 0.0;
    std::size_t burn_in = 200;

    void validate() const {
        if (n < 1 || p < 1) throw ConfigError("dgp: n and p must be positive");
        if (rho < 0.0 || rho >= 1.0) throw ConfigError("dgp: rho must lie in [0,1)");
        if (beta0 < 0.0 || beta0 >= 1.0) throw ConfigError("dgp: beta0 must lie in [0,1)");
    }
};

// One row of the innovation process, written into out[0..p).
namespace detail {

inline void error_row_common_factor(RngStream& stream, std::span<double> out) {
    const double factor = stream.next_normal();
    for (double& v : out) v = (stream.next_normal() + factor) / std::numbers::sqrt2;
}

inline void error_row_ma(RngStream& stream, std::span<const double> weights,
                         std::span<double> noise, std::span<double> out, bool gamma_noise) {
    // noise has 2p-1 entries so index j+m-1 never wraps
    for (double& z : noise)
        z = gamma_noise ? next_centered_gamma41(stream) : stream.next_normal();
    const std::size_t p = out.size();
    for (std::size_t j = 0; j < p; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < p; ++m) acc += weights[m] * noise[j + m];
        out[j] = acc;
    }
}

}  // namespace detail

// Innovations for the three error cases of the mean-band study. The moving
// average weights are redrawn once per call, ahead of the noise panel.
inline Matrix gen_error_process(ErrorCase error_case, std::size_t n, std::size_t p,
                                RngStream stream) {
    Matrix eps(n, p);
    if (error_case == ErrorCase::CommonFactor) {
        for (std::size_t t = 0; t < n; ++t)
            detail::error_row_common_factor(stream, eps.row_span(t));
        return eps;
    }
    std::vector<double> weights(p);
    for (double& w : weights) w = 2.0 + stream.next_uniform();
    std::vector<double> noise(2 * p - 1);
    const bool gamma_noise = (error_case == ErrorCase::MaGamma);
    for (std::size_t t = 0; t < n; ++t)
        detail::error_row_ma(stream, weights, noise, eps.row_span(t), gamma_noise);
    return eps;
}

// VAR(1) recursion x_t = rho x_{t-1} + sqrt(1-rho^2) eps_t started at zero;
// the scaling keeps the marginal variance equal to that of the innovations.
inline Matrix gen_var1(const DgpConfig& config, RngStream stream) {
    config.validate();
    const std::size_t total = config.n + config.burn_in;
    const Matrix eps = gen_error_process(config.error_case, total, config.p, stream);
    const double scale = std::sqrt(1.0 - config.rho * config.rho);

    Matrix out(config.n, config.p);
    std::vector<double> state(config.p, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        const double* e = eps.row(t);
        for (std::size_t j = 0; j < config.p; ++j)
            state[j] = config.rho * state[j] + scale * e[j];
        if (t >= config.burn_in) {
            double* r = out.row(t - config.burn_in);
            for (std::size_t j = 0; j < config.p; ++j) r[j] = state[j];
        }
    }
    return out;
}

// Multivariate ARCH of the white-noise study: x_i = chol(Sigma_i) eps_i with
// Sigma_i = 0.1 I + 0.9 x_{i-1} x_{i-1}' and x_0 = 0.
inline Matrix gen_march(std::size_t n, std::size_t p, RngStream stream,
                        std::size_t burn_in = 200) {
    const double sqrt01 = std::sqrt(0.1);
    const double sqrt09 = std::sqrt(0.9);

    Matrix out(n, p);
    std::vector<double> state(p, 0.0), eps(p), scaled(p);
    LowerTriangular factor{p, Matrix(p, p)};
    const std::size_t total = n + burn_in;
    for (std::size_t t = 0; t < total; ++t) {
        std::fill(factor.entries.data().begin(), factor.entries.data().end(), 0.0);
        for (std::size_t j = 0; j < p; ++j) factor.entries(j, j) = sqrt01;
        for (std::size_t j = 0; j < p; ++j) scaled[j] = sqrt09 * state[j];
        cholesky_rank1_update(factor, scaled);

        for (double& v : eps) v = stream.next_normal();
        state = factor.apply(eps);
        if (t >= burn_in) {
            double* r = out.row(t - burn_in);
            for (std::size_t j = 0; j < p; ++j) r[j] = state[j];
        }
    }
    return out;
}

// Equicorrelated target covariance: unit diagonal, 0.5 off-diagonal.
inline Matrix equicorrelated_cov(std::size_t p) {
    Matrix dp(p, p, 0.5);
    for (std::size_t j = 0; j < p; ++j) dp(j, j) = 1.0;
    return dp;
}

// ARCH model of the Gaussian-approximation study: scaled-t(4) innovations,
// Sigma_i = (1-beta0) D_p + beta0 x_{i-1} x_{i-1}', x_0 ~ N(0, D_p). The
// covariance of every x_i is exactly D_p, so no burn-in is involved.
inline Matrix gen_arch_fig1(std::size_t n, std::size_t p, double beta0,
                            const LowerTriangular& dp_factor, RngStream stream) {
    if (beta0 < 0.0 || beta0 >= 1.0) throw ConfigError("gen_arch_fig1: beta0 in [0,1)");
    const double sqrt_1mb = std::sqrt(1.0 - beta0);
    const double sqrt_b = std::sqrt(beta0);

    Matrix out(n, p);
    std::vector<double> eps(p), scaled(p);
    for (double& v : eps) v = stream.next_normal();
    std::vector<double> state = dp_factor.apply(eps);

    LowerTriangular factor{p, Matrix(p, p)};
    for (std::size_t t = 0; t < n; ++t) {
        const LowerTriangular* sigma_root = &dp_factor;
        if (beta0 > 0.0) {
            factor.entries = dp_factor.entries;
            for (auto& v : factor.entries.data()) v *= sqrt_1mb;
            for (std::size_t j = 0; j < p; ++j) scaled[j] = sqrt_b * state[j];
            cholesky_rank1_update(factor, scaled);
            sigma_root = &factor;
        }
        for (double& v : eps) v = next_scaled_t4(stream);
        state = sigma_root->apply(eps);
        double* r = out.row(t);
        for (std::size_t j = 0; j < p; ++j) r[j] = state[j];
    }
    return out;
}

inline Matrix gen_arch_fig1(std::size_t n, std::size_t p, double beta0, RngStream stream) {
    return gen_arch_fig1(n, p, beta0, cholesky(equicorrelated_cov(p)), stream);
}

// I.i.d. rows from N(0, cov).
inline Matrix gen_gaussian_analog(std::size_t n, std::size_t p,
                                  const LowerTriangular& cov_factor, RngStream stream) {
    Matrix out(n, p);
    std::vector<double> z(p);
    for (std::size_t t = 0; t < n; ++t) {
        for (double& v : z) v = stream.next_normal();
        const auto row = cov_factor.apply(z);
        double* r = out.row(t);
        for (std::size_t j = 0; j < p; ++j) r[j] = row[j];
    }
    return out;
}

inline Matrix gen_gaussian_analog(std::size_t n, std::size_t p, const Matrix& cov,
                                  RngStream stream) {
    return gen_gaussian_analog(n, p, cholesky(cov), stream);
}

// Dispatcher used by the experiment harness.
inline Matrix generate(const DgpConfig& config, RngStream stream) {
    config.validate();
    switch (config.model) {
        case DgpModel::Var1:
            return gen_var1(config, stream);
        case DgpModel::MArch:
            return gen_march(config.n, config.p, stream, config.burn_in);
        case DgpModel::ArchFig1:
            return gen_arch_fig1(config.n, config.p, config.beta0, stream);
        case DgpModel::IidMaCov:
            return gen_error_process(config.error_case == ErrorCase::MaGamma
                                         ? ErrorCase::MaGamma
                                         : ErrorCase::MaUnif,
                                     config.n, config.p, stream);
    }
    throw ConfigError("dgp: unknown model");
}

}  // namespace hdts
