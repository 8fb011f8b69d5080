#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace mixlab {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// The 64-bit key is the master seed; the 128-bit counter is split into a
// 64-bit stream id (high words) and a 64-bit draw index (low words), so
// every (seed, stream, draw) triple maps to a fixed output independent of
// evaluation order.  Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using block_type = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) {
            buffer_ = block(key_, counter_block(index_++));
            lane_ = 0;
        }
        const auto lo = static_cast<std::uint64_t>(buffer_[2 * lane_]);
        const auto hi = static_cast<std::uint64_t>(buffer_[2 * lane_ + 1]);
        ++lane_;
        return (hi << 32) | lo;
    }

    std::uint64_t stream() const noexcept { return stream_; }

    // Jump to an absolute block index within the stream.
    void seek(std::uint64_t block_index) noexcept {
        index_ = block_index;
        lane_ = 2;
    }

    static block_type block(std::array<std::uint32_t, 2> key, block_type ctr) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    block_type counter_block(std::uint64_t index) const noexcept {
        return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
    block_type buffer_{};
    int lane_ = 2;
};

// Stream id layout: experiment tag in the top 16 bits, replication index below.
inline std::uint64_t derive_stream(std::uint16_t experiment_tag, std::uint64_t replication) noexcept {
    return (std::uint64_t{experiment_tag} << 48) | (replication & ((std::uint64_t{1} << 48) - 1));
}

// Variate generation on top of a Philox stream.  The transforms are written
// out here (rather than taken from <random>) so that streams are identical
// across standard library implementations.
class Draws {
public:
    Draws(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller, second variate cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    // +1 or -1 with equal probability.
    double rademacher() noexcept { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    // Number of failures before the first success is k-1; support {1, 2, ...}.
    std::uint64_t geometric(double p) noexcept {
        if (p >= 1.0) return 1;
        return 1 + static_cast<std::uint64_t>(std::floor(std::log(uniform()) / std::log1p(-p)));
    }

    // Index drawn from a cumulative probability table (last entry treated as 1).
    template <class Range>
    std::size_t categorical(const Range& cumulative) noexcept {
        const double u = uniform();
        std::size_t i = 0;
        const std::size_t last = static_cast<std::size_t>(std::size(cumulative)) - 1;
        while (i < last && u > cumulative[i]) ++i;
        return i;
    }

    Philox4x32& engine() noexcept { return engine_; }

private:
    Philox4x32 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mixlab
