#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mixlab/rng.hpp"

using mixlab::Draws;
using mixlab::Philox4x32;

// Known-answer vectors published with the reference Philox implementation.
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox4x32::block({0u, 0u}, {0u, 0u, 0u, 0u});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto out =
        Philox4x32::block({0xa4093822u, 0x299f31d0u}, {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, EngineOutputIsTheCounterBlock) {
    Philox4x32 eng(0x0123456789abcdefull, 0xfedcba9876543210ull);
    const auto blk = Philox4x32::block({0x89abcdefu, 0x01234567u}, {0u, 0u, 0x76543210u, 0xfedcba98u});
    const auto first = eng();
    const auto second = eng();
    EXPECT_EQ(first, (std::uint64_t{blk[1]} << 32) | blk[0]);
    EXPECT_EQ(second, (std::uint64_t{blk[3]} << 32) | blk[2]);
}

TEST(Philox, SeekReproducesLaterBlocks) {
    Philox4x32 a(5, 9);
    std::vector<std::uint64_t> seq;
    for (int i = 0; i < 20; ++i) seq.push_back(a());
    Philox4x32 b(5, 9);
    b.seek(3);
    EXPECT_EQ(b(), seq[6]);
    EXPECT_EQ(b(), seq[7]);
}

TEST(Philox, StreamsAndSeedsDiffer) {
    Philox4x32 a(1, 0), b(1, 1), c(2, 0);
    const auto x = a();
    EXPECT_NE(x, b());
    EXPECT_NE(x, c());
}

TEST(DeriveStream, TagOccupiesTopBits) {
    EXPECT_EQ(mixlab::derive_stream(0x0001, 5), (std::uint64_t{1} << 48) | 5u);
    EXPECT_NE(mixlab::derive_stream(1, 0), mixlab::derive_stream(2, 0));
}

TEST(Draws, UniformIsInsideOpenInterval) {
    Draws d(3, 0);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = d.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Draws, NormalMoments) {
    Draws d(4, 0);
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = d.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
    EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(Draws, DiscreteLaws) {
    Draws d(5, 0);
    const int n = 100000;
    double rad = 0, geo = 0;
    std::vector<int> counts(3, 0);
    const std::vector<double> cum{0.2, 0.5, 1.0};
    for (int i = 0; i < n; ++i) {
        const double r = d.rademacher();
        ASSERT_TRUE(r == 1.0 || r == -1.0);
        rad += r;
        const auto g = d.geometric(0.25);
        ASSERT_GE(g, 1u);
        geo += static_cast<double>(g);
        ++counts[d.categorical(cum)];
    }
    EXPECT_NEAR(rad / n, 0.0, 0.01);
    EXPECT_NEAR(geo / n, 4.0, 0.05);
    EXPECT_NEAR(counts[0] / double(n), 0.2, 0.005);
    EXPECT_NEAR(counts[1] / double(n), 0.3, 0.005);
    EXPECT_NEAR(counts[2] / double(n), 0.5, 0.005);
}

TEST(Draws, ExponentialMean) {
    Draws d(6, 0);
    double s = 0;
    for (int i = 0; i < 100000; ++i) s += d.exponential(2.0);
    EXPECT_NEAR(s / 100000, 0.5, 0.006);
}
