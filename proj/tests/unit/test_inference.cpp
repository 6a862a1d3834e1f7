#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <map>
#include <vector>

#include "hdts/dgp.hpp"
#include "hdts/inference.hpp"
#include "hdts/parallel.hpp"

using namespace hdts;

namespace {

Matrix iid_normal(std::size_t n, std::size_t p, RngStream stream) {
    Matrix m(n, p);
    for (auto& v : m.data()) v = stream.next_normal();
    return m;
}

template <typename Fn>
double mc_rate(std::size_t reps, Fn&& hit) {
    std::vector<std::uint8_t> flags(reps);
    parallel_for(reps, 2, [&](std::size_t r) { flags[r] = hit(r) ? 1 : 0; });
    double total = 0.0;
    for (const auto f : flags) total += f;
    return total / static_cast<double>(reps);
}

}  // namespace

TEST_CASE("band on all-zero data degenerates to the point {0}") {
    const Matrix zeros(30, 4);
    const ConfidenceBand band = uniform_confidence_band(zeros, 3, 99, 0.05, RngStream(1));
    CHECK(band.half_width == 0.0);
    const std::vector<double> origin(4, 0.0);
    CHECK(band.contains(origin));
    std::vector<double> off(4, 0.0);
    off[2] = 1e-6;
    CHECK_FALSE(band.contains(off));
}

TEST_CASE("scalar i.i.d. band reduces to the wild bootstrap and covers") {
    const double rate = mc_rate(300, [](std::size_t r) {
        RngStream base = RngStream(2024).at(static_cast<std::uint64_t>(r) << 32);
        const Matrix x = iid_normal(10000, 1, base.at(0));
        const ConfidenceBand band = uniform_confidence_band(x, 1, 99, 0.05, base.at(1));
        return band.contains(std::vector<double>{0.0});
    });
    CHECK(std::abs(100.0 * rate - 95.0) < 1.5);
}

TEST_CASE("white noise test on perfectly correlated constants rejects") {
    Matrix x(50, 3, 2.0);  // every entry c = 2
    const TestResult res = white_noise_test(x, 2, 5, 99, 0.05, RngStream(3));
    // gamma_hat at lag l sums n-l products over divisor n
    CHECK(res.statistic == Catch::Approx(std::sqrt(50.0) * 4.0 * 49.0 / 50.0));
    CHECK(res.critical_value == 0.0);
    CHECK(res.reject);
}

TEST_CASE("autocov test with zero targets specializes to the white noise test") {
    DgpConfig cfg;
    cfg.model = DgpModel::Var1;
    cfg.n = 80;
    cfg.p = 4;
    cfg.rho = 0.3;
    const Matrix x = gen_var1(cfg, RngStream(4));

    std::map<std::size_t, Matrix> zeros;
    for (std::size_t l = 1; l <= 2; ++l) zeros.emplace(l, Matrix(4, 4));
    const TestResult a = autocov_structure_test(x, {1, 2}, zeros, 4, 199, 0.10, RngStream(5));
    const TestResult b = white_noise_test(x, 2, 4, 199, 0.10, RngStream(5));
    CHECK(a.statistic == b.statistic);
    CHECK(a.critical_value == b.critical_value);
    CHECK(a.p_value == b.p_value);
    CHECK(a.reject == b.reject);
}

TEST_CASE("covariance test holds its size under a true null") {
    std::map<std::size_t, Matrix> target;
    target.emplace(0, Matrix::identity(5));
    const double rate = mc_rate(300, [&](std::size_t r) {
        RngStream base = RngStream(9090).at(static_cast<std::uint64_t>(r) << 32);
        const Matrix x = iid_normal(10000, 5, base.at(0));
        const TestResult res = autocov_structure_test(x, {0}, target, 1, 99, 0.05, base.at(1));
        return res.reject;
    });
    CHECK(std::abs(100.0 * rate - 5.0) < 2.0);
}

TEST_CASE("covariance test has power against a doubled covariance") {
    std::map<std::size_t, Matrix> target;
    target.emplace(0, Matrix::identity(3));
    const double rate = mc_rate(20, [&](std::size_t r) {
        RngStream base = RngStream(777).at(static_cast<std::uint64_t>(r) << 32);
        Matrix x = iid_normal(10000, 3, base.at(0));
        for (auto& v : x.data()) v *= std::numbers::sqrt2;  // covariance 2I
        const TestResult res = autocov_structure_test(x, {0}, target, 1, 99, 0.05, base.at(1));
        return res.reject;
    });
    CHECK(rate == 1.0);
}

TEST_CASE("bandedness test holds its size on independent coordinates") {
    const double rate = mc_rate(250, [](std::size_t r) {
        RngStream base = RngStream(5150).at(static_cast<std::uint64_t>(r) << 32);
        const Matrix x = iid_normal(10000, 10, base.at(0));
        const TestResult res = bandedness_test(x, 1, 1, 99, 0.05, base.at(1));
        return res.reject;
    });
    CHECK(std::abs(100.0 * rate - 5.0) < 2.0);
}

TEST_CASE("bandedness test pins a duplicated column pair") {
    Matrix x(64, 4);
    RngStream s(6);
    for (std::size_t i = 0; i < 64; ++i) {
        x(i, 0) = s.next_normal();
        x(i, 1) = s.next_normal();
        x(i, 2) = s.next_normal();
        x(i, 3) = x(i, 0);  // |j-k| = 3 violates any bandwidth up to 3
    }
    const TestResult res = bandedness_test(x, 3, 4, 199, 0.05, RngStream(7));
    CHECK(res.statistic == Catch::Approx(std::sqrt(64.0)).epsilon(1e-12));
    CHECK(res.reject);
}

TEST_CASE("bandedness statistic is exactly scale invariant") {
    const Matrix x = iid_normal(48, 5, RngStream(8));
    Matrix scaled = x;
    const double diag[5] = {0.25, 4.0, 1.0, 2.0, 0.5};  // powers of two: exact in floats
    for (std::size_t i = 0; i < 48; ++i)
        for (std::size_t j = 0; j < 5; ++j) scaled(i, j) *= diag[j];

    const TestResult a = bandedness_test(x, 2, 4, 99, 0.05, RngStream(9));
    const TestResult b = bandedness_test(scaled, 2, 4, 99, 0.05, RngStream(9));
    CHECK(a.statistic == b.statistic);
    CHECK(a.critical_value == b.critical_value);

    Matrix odd = x;
    for (std::size_t i = 0; i < 48; ++i)
        for (std::size_t j = 0; j < 5; ++j) odd(i, j) *= (j + 1) * 0.3;
    const TestResult c = bandedness_test(odd, 2, 4, 99, 0.05, RngStream(9));
    CHECK(c.statistic == Catch::Approx(a.statistic).epsilon(1e-12));
}

TEST_CASE("critical values are monotone in alpha") {
    const Matrix x = iid_normal(60, 3, RngStream(10));
    double prev = -1.0;
    for (const double alpha : {0.4, 0.2, 0.1, 0.05, 0.01}) {
        const TestResult res = white_noise_test(x, 1, 3, 199, alpha, RngStream(11));
        CHECK(res.critical_value >= prev);
        prev = res.critical_value;
    }
}

TEST_CASE("band membership matches the max-statistic comparison") {
    const Matrix x = iid_normal(50, 4, RngStream(12));
    const ConfidenceBand band = uniform_confidence_band(x, 5, 199, 0.10, RngStream(13));
    RngStream mu_stream(14);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> mu(4);
        for (auto& v : mu) v = 0.3 * mu_stream.next_normal();
        double dev = 0.0;
        for (std::size_t j = 0; j < 4; ++j)
            dev = std::max(dev, std::abs(mu[j] - band.center[j]));
        CHECK(band.contains(mu) == (std::sqrt(50.0) * dev <= band.critical_value));
    }
}

TEST_CASE("procedure input validation") {
    const Matrix x = iid_normal(20, 3, RngStream(15));
    CHECK_THROWS_AS(white_noise_test(x, 0, 2, 50, 0.05, RngStream(16)), LagTooLarge);
    CHECK_THROWS_AS(white_noise_test(x, 20, 2, 50, 0.05, RngStream(16)), LagTooLarge);
    CHECK_THROWS_AS(bandedness_test(x, 0, 2, 50, 0.05, RngStream(16)), InvalidBandwidth);
    CHECK_THROWS_AS(bandedness_test(x, 3, 2, 50, 0.05, RngStream(16)), InvalidBandwidth);
    CHECK_THROWS_AS(uniform_confidence_band(x, 21, 50, 0.05, RngStream(16)), InvalidBlockSize);

    std::map<std::size_t, Matrix> missing;
    missing.emplace(1, Matrix(3, 3));
    CHECK_THROWS_AS(autocov_structure_test(x, {1, 2}, missing, 2, 50, 0.05, RngStream(16)),
                    MissingTarget);

    Matrix degenerate = x;
    for (std::size_t i = 0; i < 20; ++i) degenerate(i, 1) = 0.0;
    CHECK_THROWS_AS(bandedness_test(degenerate, 1, 2, 50, 0.05, RngStream(16)),
                    DegenerateVariance);
}
