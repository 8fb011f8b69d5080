#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mixlab/error.hpp"
#include "mixlab/mixing.hpp"
#include "mixlab/rng.hpp"
#include "oracles.hpp"

using namespace mixlab;

namespace {

// Joint pmf of (X_{j-pw+1..j}, X_{j+n..j+n+fw-1}) by summing over every full
// path X_1..X_{j+n+fw-1}.  Atoms are indexed by base-s digits, earliest
// time most significant.
Eigen::MatrixXd window_pmf_by_paths(const MarkovChainSpec& chain, long j, long n, int pw, int fw) {
    const long s = chain.states.size();
    const long len = j + n + fw - 1;
    const long start = std::max(1L, j - pw + 1);
    const long past_len = j - start + 1;
    long past_atoms = 1, future_atoms = 1, paths = 1;
    for (long i = 0; i < past_len; ++i) past_atoms *= s;
    for (int i = 0; i < fw; ++i) future_atoms *= s;
    for (long i = 0; i < len; ++i) paths *= s;
    Eigen::MatrixXd pmf = Eigen::MatrixXd::Zero(past_atoms, future_atoms);
    std::vector<int> x(static_cast<std::size_t>(len));
    for (long code = 0; code < paths; ++code) {
        long c = code;
        for (long t = 0; t < len; ++t) {
            x[static_cast<std::size_t>(t)] = static_cast<int>(c % s);
            c /= s;
        }
        double prob = chain.initial[x[0]];
        for (long t = 1; t < len; ++t) prob *= chain.transition(x[t - 1], x[t]);
        long a = 0, b = 0;
        for (long t = start; t <= j; ++t) a = a * s + x[t - 1];
        for (long t = j + n; t < j + n + fw; ++t) b = b * s + x[t - 1];
        pmf(a, b) += prob;
    }
    return pmf;
}

MarkovChainSpec random_chain(int states, std::uint64_t seed) {
    MarkovChainSpec chain;
    chain.states = Eigen::VectorXd::LinSpaced(states, 0.0, states - 1.0);
    chain.transition = oracle::random_pmf(states, states, seed);
    for (int i = 0; i < states; ++i) chain.transition.row(i) /= chain.transition.row(i).sum();
    chain.initial = oracle::random_pmf(states, 1, seed + 1000);
    return chain;
}

}  // namespace

TEST(TwoStateChain, WindowPmfHasClosedForm) {
    const auto chain = MarkovChainSpec::symmetric_two_state(0.25);
    for (long n : {1L, 2L, 5L}) {
        const auto joint = block_joint(chain, 1, n, 1, 1);
        const double r = std::pow(0.5, static_cast<double>(n));
        EXPECT_NEAR(joint.pmf()(0, 0), (1.0 + r) / 4.0, 1e-15);
        EXPECT_NEAR(joint.pmf()(0, 1), (1.0 - r) / 4.0, 1e-15);
        EXPECT_NEAR(alpha_window(chain, 1, n, 1, 1), 0.25 * r, 1e-15);
    }
}

TEST(TwoStateChain, SequenceIsTheMaximumOverJ) {
    const auto chain = MarkovChainSpec::symmetric_two_state(0.25);
    const auto profile = alpha_sequence(chain, {1, 2, 3, 4, 8}, {});
    ASSERT_EQ(profile.values.size(), 5u);
    for (const auto& p : profile.values)
        EXPECT_NEAR(p.alpha, 0.25 * std::pow(0.5, static_cast<double>(p.n)), 1e-15) << p.n;
    EXPECT_EQ(profile.kind, ProfileKind::ExactWindow);
    EXPECT_NE(profile.note.find("lower bound"), std::string::npos);
}

TEST(IidChain, AlphaIsZero) {
    const auto chain = MarkovChainSpec::iid(Eigen::Vector3d(-1.0, 0.0, 2.0), Eigen::Vector3d(0.2, 0.5, 0.3));
    for (long n : {1L, 3L}) EXPECT_NEAR(alpha_window(chain, 4, n, 2, 2), 0.0, 1e-15);
    const auto cert = alpha_bound_geometric(chain);
    EXPECT_EQ(cert.zero_beyond, 0);
    EXPECT_EQ(cert.at(1), 0.0);
}

TEST(BlockJoint, MatchesPathEnumeration) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto chain = random_chain(3, seed);
        for (auto [j, n, pw, fw] : {std::tuple{1L, 1L, 1, 1}, std::tuple{3L, 2L, 2, 1}, std::tuple{4L, 1L, 2, 2},
                                    std::tuple{2L, 3L, 3, 2}}) {
            const Eigen::MatrixXd ref = window_pmf_by_paths(chain, j, n, pw, fw);
            const auto joint = block_joint(chain, j, n, pw, fw);
            ASSERT_EQ(joint.pmf().rows(), ref.rows());
            ASSERT_EQ(joint.pmf().cols(), ref.cols());
            EXPECT_LT((joint.pmf() - ref).cwiseAbs().maxCoeff(), 1e-14) << "seed " << seed << " j " << j;
            EXPECT_NEAR(alpha_exact(joint), oracle::alpha_brute(ref), 1e-13);
        }
    }
}

TEST(BlockJoint, PastWindowIsClippedAtOne) {
    const auto chain = MarkovChainSpec::symmetric_two_state(0.1);
    const auto joint = block_joint(chain, 2, 1, 5, 1);
    EXPECT_EQ(joint.atoms_x().cols(), 2);
    EXPECT_EQ(joint.pmf().rows(), 4);
}

TEST(BlockJoint, SizeLimit) {
    const auto chain = random_chain(4, 1);
    EXPECT_THROW(block_joint(chain, 10, 1, 7, 1, 4096), SizeLimitExceeded);
    EXPECT_THROW(alpha_window(chain, 10, 1, 5, 2, 3), SizeLimitExceeded);
}

TEST(Certificate, DominatesExactWindowOnRandomChains) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto chain = random_chain(3, seed + 50);
        const auto cert = alpha_bound_geometric(chain);
        ASSERT_TRUE(cert.decays);
        WindowOptions opt;
        opt.past_window = 2;
        opt.future_window = 2;
        opt.j_max = 6;
        const auto exact = alpha_sequence(chain, {1, 2, 3, 5, 8}, opt);
        for (const auto& p : exact.values) EXPECT_LE(p.alpha, cert.at(p.n) + 1e-15) << "seed " << seed;
    }
}

TEST(Certificate, DoeblinFormula) {
    const auto chain = MarkovChainSpec::symmetric_two_state(0.25);
    const auto cert = alpha_bound_geometric(chain);
    // min column mass of P is 0.25 + 0.25 = 0.5 at k = 1.
    EXPECT_DOUBLE_EQ(cert.rho, 0.5);
    EXPECT_DOUBLE_EQ(cert.at(3), 0.25 * 0.125);
    EXPECT_EQ(cert.profile({1, 2}).kind, ProfileKind::AnalyticBound);
}

TEST(Certificate, PeriodicChainHasNoDoeblinPower) {
    const auto chain = MarkovChainSpec::symmetric_two_state(1.0);
    const auto cert = alpha_bound_geometric(chain);
    EXPECT_FALSE(cert.decays);
    EXPECT_EQ(cert.at(100), 0.25);
    EXPECT_NEAR(alpha_window(chain, 1, 100, 1, 1), 0.25, 1e-15);
}

TEST(Certificate, GaussianAndDependent) {
    const auto ar = alpha_bound_gaussian_ar1(-0.5);
    EXPECT_DOUBLE_EQ(ar.at(3), 0.125);
    EXPECT_DOUBLE_EQ(ar.at(1), 0.25);
    EXPECT_THROW(alpha_bound_gaussian_ar1(1.0), InvalidInput);
    const auto ma = alpha_bound_dependent(2);
    EXPECT_EQ(ma.at(1), 0.25);
    EXPECT_EQ(ma.at(2), 0.25);
    EXPECT_EQ(ma.at(3), 0.0);
    EXPECT_THROW(alpha_bound_dependent(-1), InvalidInput);
}

TEST(Stationary, SolvesBalanceEquations) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto chain = random_chain(4, seed);
        const Eigen::VectorXd pi = stationary_distribution(chain);
        EXPECT_LT((pi.transpose() * chain.transition - pi.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(pi.sum(), 1.0, 1e-15);
    }
}

TEST(MarkovSpec, Validation) {
    auto chain = MarkovChainSpec::symmetric_two_state(0.3);
    EXPECT_NO_THROW(chain.validate());
    chain.transition(0, 0) = 0.8;
    EXPECT_THROW(chain.validate(), InvalidInput);
    chain = MarkovChainSpec::symmetric_two_state(0.3);
    chain.initial = Eigen::Vector3d(0.2, 0.3, 0.5);
    EXPECT_THROW(chain.validate(), InvalidInput);
    EXPECT_THROW(MarkovChainSpec::symmetric_two_state(1.5), InvalidInput);
    EXPECT_THROW(block_joint(MarkovChainSpec::symmetric_two_state(0.3), 0, 1, 1, 1), InvalidInput);
}

TEST(PluginAlpha, IndependentSamplesAreSmallAndIdenticalAreQuarter) {
    Draws d(11, 0);
    Eigen::VectorXd x(20000), z(20000);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = d.normal();
        z[i] = d.normal();
    }
    EXPECT_LT(plugin_alpha(x, z, 2), 0.01);
    EXPECT_NEAR(plugin_alpha(x, x, 2), 0.25, 1e-15);
    EXPECT_THROW(plugin_alpha(x, z.head(5), 2), InvalidInput);
}
