#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hdts/blocks.hpp"
#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"
#include "hdts/numerics.hpp"
#include "hdts/parallel.hpp"
#include "hdts/rng.hpp"

namespace hdts {

// Monte Carlo sample of a max statistic max_j (1/sqrt(n)) sum_i x_ij.
struct MaxStatSample {
    std::vector<double> draws;  // sorted ascending
    std::string label;
};

using DgpSampler = std::function<Matrix(std::size_t n, std::size_t p, RngStream)>;

// Each rep generates a fresh dataset on the stream block at rep * 2^32 and
// reduces it to its max statistic.
inline MaxStatSample sample_max_stat(const DgpSampler& generator, std::size_t n, std::size_t p,
                                     std::size_t reps, StatKind kind, RngStream stream,
                                     std::size_t workers = 1, std::string label = {}) {
    if (reps < 1) throw EmptyDistribution("sample_max_stat: reps >= 1");
    MaxStatSample sample;
    sample.label = std::move(label);
    sample.draws.resize(reps);
    const double scale = std::sqrt(static_cast<double>(n));
    parallel_for(reps, workers, [&](std::size_t r) {
        const Matrix x = generator(n, p, stream.at(static_cast<std::uint64_t>(r) << 32));
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += x(i, j);
            acc /= scale;
            best = std::max(best, kind == StatKind::Absolute ? std::abs(acc) : acc);
        }
        sample.draws[r] = best;
    });
    std::sort(sample.draws.begin(), sample.draws.end());
    return sample;
}

// Two-sample sup distance between empirical CDFs.
inline double estimate_kolmogorov_distance(const MaxStatSample& sx, const MaxStatSample& sy) {
    const auto& a = sx.draws;
    const auto& b = sy.draws;
    if (a.empty() || b.empty()) throw EmptyDistribution("kolmogorov distance: empty sample");
    double dist = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // advance both CDFs past the smaller value, ties jointly
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        dist = std::max(dist, std::abs(fa - fb));
    }
    return dist;
}

// P-P curve: F_x evaluated at the empirical quantiles of F_y over an interior
// probability grid. Equal distributions put the curve on the diagonal.
struct PPCurve {
    std::vector<double> grid;
    std::vector<double> values;

    double max_abs_deviation() const {
        double dev = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g)
            dev = std::max(dev, std::abs(values[g] - grid[g]));
        return dev;
    }
};

inline PPCurve pp_curve(const MaxStatSample& sx, const MaxStatSample& sy,
                        std::size_t grid_size) {
    if (grid_size < 2) throw ConfigError("pp_curve: grid_size >= 2");
    if (sx.draws.empty() || sy.draws.empty()) throw EmptyDistribution("pp_curve: empty sample");
    PPCurve curve;
    curve.grid.resize(grid_size);
    curve.values.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double q = static_cast<double>(g + 1) / static_cast<double>(grid_size + 1);
        curve.grid[g] = q;
        const double yq = empirical_quantile(sy.draws, q);
        const auto it = std::upper_bound(sx.draws.begin(), sx.draws.end(), yq);
        curve.values[g] = static_cast<double>(it - sx.draws.begin()) /
                          static_cast<double>(sx.draws.size());
    }
    return curve;
}

}  // namespace hdts
