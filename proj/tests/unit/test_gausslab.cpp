#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hdts/gausslab.hpp"

using namespace hdts;

namespace {

Matrix iid_normal_panel(std::size_t n, std::size_t p, RngStream stream) {
    Matrix m(n, p);
    for (auto& v : m.data()) v = stream.next_normal();
    return m;
}

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("zero generator gives a point mass at zero") {
    const DgpSampler zero = [](std::size_t n, std::size_t p, RngStream) {
        return Matrix(n, p);
    };
    const MaxStatSample s = sample_max_stat(zero, 10, 3, 64, StatKind::Signed, RngStream(1));
    for (const double d : s.draws) CHECK(d == 0.0);
}

TEST_CASE("scalar i.i.d. max statistic is exactly standard normal") {
    const DgpSampler gen = [](std::size_t n, std::size_t p, RngStream stream) {
        return iid_normal_panel(n, p, stream);
    };
    const std::size_t reps = 10000;
    const MaxStatSample s = sample_max_stat(gen, 5, 1, reps, StatKind::Signed, RngStream(2));

    // one-sample Kolmogorov check against Phi inside the 1% DKW band
    double worst = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        const double f = std_normal_cdf(s.draws[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(reps);
        const double lo = static_cast<double>(i) / static_cast<double>(reps);
        worst = std::max(worst, std::max(std::abs(hi - f), std::abs(f - lo)));
    }
    CHECK(worst < std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(reps))));
}

TEST_CASE("duplicated coordinates keep the max statistic distribution") {
    const DgpSampler dup = [](std::size_t n, std::size_t p, RngStream stream) {
        Matrix m(n, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = stream.next_normal();
            for (std::size_t j = 0; j < p; ++j) m(i, j) = v;
        }
        return m;
    };
    const MaxStatSample p1 = sample_max_stat(dup, 8, 1, 500, StatKind::Signed, RngStream(3));
    const MaxStatSample p2 = sample_max_stat(dup, 8, 2, 500, StatKind::Signed, RngStream(3));
    CHECK(p1.draws == p2.draws);
}

TEST_CASE("kolmogorov distance basics") {
    MaxStatSample a, b;
    a.draws = {1.0, 2.0, 3.0, 4.0};
    b.draws = a.draws;
    CHECK(estimate_kolmogorov_distance(a, b) == 0.0);

    for (double& v : b.draws) v += 100.0;
    CHECK(estimate_kolmogorov_distance(a, b) == 1.0);
    CHECK(estimate_kolmogorov_distance(a, b) == estimate_kolmogorov_distance(b, a));
}

TEST_CASE("kolmogorov distance recovers the normal shift gap") {
    const std::size_t reps = 100000;
    MaxStatSample x, y;
    x.draws.resize(reps);
    y.draws.resize(reps);
    RngStream sx(4), sy(5);
    for (std::size_t i = 0; i < reps; ++i) {
        x.draws[i] = sx.next_normal();
        y.draws[i] = sy.next_normal() + 0.5;
    }
    std::sort(x.draws.begin(), x.draws.end());
    std::sort(y.draws.begin(), y.draws.end());
    // sup_t |Phi(t) - Phi(t - 0.5)| = 2 Phi(0.25) - 1
    const double exact = 2.0 * std_normal_cdf(0.25) - 1.0;
    CHECK(estimate_kolmogorov_distance(x, y) == Catch::Approx(exact).margin(0.01));
    CHECK(estimate_kolmogorov_distance(x, y) <= 1.0);
}

TEST_CASE("pp curve of a sample against itself hugs the diagonal") {
    MaxStatSample s;
    s.draws.resize(400);
    RngStream stream(6);
    for (auto& d : s.draws) d = stream.next_normal();
    std::sort(s.draws.begin(), s.draws.end());

    // F(F^{-1}(q)) = k/R with k = ceil(q (R+1)), so |k/R - q| <= (1+q)/R < 2/R
    const PPCurve curve = pp_curve(s, s, 37);
    for (std::size_t g = 0; g < curve.grid.size(); ++g)
        CHECK(std::abs(curve.values[g] - curve.grid[g]) <= 2.0 / 400.0 + 1e-12);
    CHECK(curve.max_abs_deviation() <= 2.0 / 400.0 + 1e-12);

    for (std::size_t g = 1; g < curve.values.size(); ++g)
        CHECK(curve.values[g] >= curve.values[g - 1]);
}

TEST_CASE("pp curve is invariant under a common increasing transform") {
    MaxStatSample x, y;
    x.draws.resize(300);
    y.draws.resize(500);
    RngStream stream(7);
    for (auto& d : x.draws) d = stream.next_normal();
    for (auto& d : y.draws) d = 0.8 * stream.next_normal() + 0.1;
    std::sort(x.draws.begin(), x.draws.end());
    std::sort(y.draws.begin(), y.draws.end());

    const PPCurve base = pp_curve(x, y, 25);

    MaxStatSample tx = x, ty = y;
    for (auto& d : tx.draws) d = std::exp(d);
    for (auto& d : ty.draws) d = std::exp(d);
    const PPCurve mapped = pp_curve(tx, ty, 25);
    CHECK(base.values == mapped.values);
}

TEST_CASE("gausslab input validation") {
    MaxStatSample empty, ok;
    ok.draws = {1.0};
    CHECK_THROWS_AS(estimate_kolmogorov_distance(empty, ok), EmptyDistribution);
    CHECK_THROWS_AS(pp_curve(ok, empty, 10), EmptyDistribution);
    CHECK_THROWS_AS(pp_curve(ok, ok, 1), ConfigError);
}
