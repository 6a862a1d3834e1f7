#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hdts/blocks.hpp"
#include "hdts/errors.hpp"
#include "hdts/inference.hpp"
#include "hdts/matrix.hpp"
#include "hdts/parallel.hpp"
#include "hdts/rng.hpp"

namespace hdts {

struct BlockSizeReport {
    std::vector<std::size_t> candidates;
    std::vector<double> empirical_coverage;  // one per candidate, multiples of 1/b_outer
    std::size_t chosen = 0;
    std::size_t b_int = 0;
    std::size_t b_outer = 0;
    std::size_t iterations_run = 1;
};

// Data-driven block size selection: draw b_outer pseudo-series by the
// non-overlapping block bootstrap with block size b_int, build the uniform
// confidence band on each pseudo-series for every candidate block size, and
// pick the candidate whose empirical coverage of the pseudo-truth (the sample
// mean of x) is closest to 1 - alpha. Ties go to the smallest candidate.
// Candidates that give fewer than two blocks are rejected up front.
//
// Stream layout: pseudo-series s owns the block at s * 2^20; offset 0 draws
// the resample indices, and every candidate's band reuses the multiplier
// draws at offsets 1..b_reps (common random numbers across candidates).
inline BlockSizeReport select_block_size(const Matrix& x, std::size_t b_int,
                                         std::vector<std::size_t> candidates,
                                         std::size_t b_outer, std::size_t b_reps, double alpha,
                                         RngStream stream, std::size_t max_iterations = 1,
                                         std::size_t workers = 1) {
    if (candidates.empty()) throw InvalidBlockSize("select_block_size: no candidates");
    if (b_outer < 1) throw InvalidBlockSize("select_block_size: b_outer >= 1");
    constexpr std::uint64_t outer_stride = std::uint64_t{1} << 20;
    if (b_reps + 1 >= outer_stride)
        throw InvalidBlockSize("select_block_size: b_reps exceeds the stream layout");
    make_scheme_single(x.rows(), b_int);  // validates b_int

    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const std::size_t c : candidates)
        if (make_scheme_single(x.rows(), c).num_blocks < 2)
            throw InvalidBlockSize("select_block_size: candidate yields fewer than 2 blocks");

    const std::vector<double> pseudo_truth = x.col_means();

    BlockSizeReport report;
    report.candidates = candidates;
    report.b_int = b_int;
    report.b_outer = b_outer;

    std::size_t current_b_int = b_int;
    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iterations, 1); ++iter) {
        report.iterations_run = iter + 1;
        RngStream iter_stream = stream.at(iter * (outer_stride * (b_outer + 1)));

        std::vector<std::uint8_t> covered(b_outer * candidates.size());
        parallel_for(b_outer, workers, [&](std::size_t s) {
            RngStream outer = iter_stream.at(s * outer_stride);
            RngStream index_stream = outer.at(0);
            const Matrix pseudo = nonoverlap_resample(x, current_b_int, index_stream);
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const ConfidenceBand band =
                    uniform_confidence_band(pseudo, candidates[c], b_reps, alpha, outer.at(1));
                covered[s * candidates.size() + c] = band.contains(pseudo_truth) ? 1 : 0;
            }
        });

        report.empirical_coverage.assign(candidates.size(), 0.0);
        for (std::size_t s = 0; s < b_outer; ++s)
            for (std::size_t c = 0; c < candidates.size(); ++c)
                report.empirical_coverage[c] += covered[s * candidates.size() + c];
        for (double& v : report.empirical_coverage) v /= static_cast<double>(b_outer);

        const double nominal = 1.0 - alpha;
        std::size_t best = 0;
        for (std::size_t c = 1; c < candidates.size(); ++c)
            if (std::abs(report.empirical_coverage[c] - nominal) <
                std::abs(report.empirical_coverage[best] - nominal))
                best = c;
        report.chosen = candidates[best];
        current_b_int = report.chosen;
    }
    return report;
}

}  // namespace hdts
