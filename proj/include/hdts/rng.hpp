#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace hdts {

// Philox 4x32-10 keyed block function (Salmon et al., SC'11 constants).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t mul0 = 0xD2511F53u;
    constexpr std::uint32_t mul1 = 0xCD9E8D57u;
    constexpr std::uint32_t weyl0 = 0x9E3779B9u;
    constexpr std::uint32_t weyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(mul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(mul1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        key[0] += weyl0;
        key[1] += weyl1;
    }
    return ctr;
}

// Counter-based random stream. A stream is addressed by (seed, stream_id);
// identical addresses replay the identical draw sequence on any machine and
// under any parallel schedule. Distinct stream_ids are independent streams,
// so callers lay out substreams arithmetically:
//
//   Monte Carlo rep r owns the stream_id block starting at r * 2^32;
//   within a rep, offset 0 feeds data generation and bootstrap draw b
//   runs on offset 1 + b.
//
// The block counter is 64-bit, so a single stream never wraps in practice.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    // Fresh stream at stream_id + offset; does not touch this stream's state.
    RngStream at(std::uint64_t offset) const { return RngStream(seed_, stream_ + offset); }

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = philox4x32_10({static_cast<std::uint32_t>(counter_),
                                  static_cast<std::uint32_t>(counter_ >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)},
                                 {static_cast<std::uint32_t>(seed_),
                                  static_cast<std::uint32_t>(seed_ >> 32)});
            ++counter_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        return lo | (static_cast<std::uint64_t>(next_u32()) << 32);
    }

    // Uniform on the open interval (0,1); safe to feed into log().
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double next_exponential() { return -std::log(next_uniform()); }

    // Uniform integer on {0, ..., bound-1} (multiply-shift; bias < bound/2^64).
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline std::vector<double> standard_normal(RngStream stream, std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = stream.next_normal();
    return out;
}

// Gamma(4,1) minus its mean 4, drawn as a sum of four exponentials.
inline double next_centered_gamma41(RngStream& stream) {
    const double u = stream.next_uniform() * stream.next_uniform() *
                     stream.next_uniform() * stream.next_uniform();
    return -std::log(u) - 4.0;
}

inline std::vector<double> sample_centered_gamma41(RngStream stream, std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = next_centered_gamma41(stream);
    return out;
}

// t(4)/sqrt(2): unit-variance heavy-tailed draw, built as N(0,1)/sqrt(chi2_4/4)
// with chi2_4 = -2 log(u1 u2).
inline double next_scaled_t4(RngStream& stream) {
    const double z = stream.next_normal();
    const double chi2 = -2.0 * std::log(stream.next_uniform() * stream.next_uniform());
    return z / std::sqrt(chi2 / 4.0) / std::numbers::sqrt2;
}

inline std::vector<double> sample_scaled_t4(RngStream stream, std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = next_scaled_t4(stream);
    return out;
}

}  // namespace hdts
