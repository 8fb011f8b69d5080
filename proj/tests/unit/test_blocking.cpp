#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mixlab/blocking.hpp"
#include "mixlab/error.hpp"
#include "oracles.hpp"

using namespace mixlab;

namespace {

double inv_sqrt(long n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

TailFn gaussian_iid_tail() {
    return [](long n, double delta) { return oracle::gaussian_two_sided_tail(delta * std::sqrt(static_cast<double>(n))); };
}

}  // namespace

TEST(ComputeM, Examples) {
    EXPECT_EQ(compute_m(inv_sqrt, 0.5, 20), 5);
    EXPECT_EQ(compute_m(inv_sqrt, 0.5, 100), 25);
    EXPECT_EQ(compute_m(inv_sqrt, 0.5, 4), 1);
    EXPECT_EQ(compute_m(inv_sqrt, 0.5, 2), 1);  // no admissible k: fallback
    EXPECT_THROW(compute_m(inv_sqrt, 1.0, 10), InvalidInput);
    EXPECT_THROW(compute_m(inv_sqrt, 0.5, 1), InvalidInput);
}

TEST(ComputeM, SandwichHoldsOnARange) {
    for (double c : {0.3, 0.5, 0.8}) {
        for (long n = 4; n <= 10000; n += (n < 100 ? 1 : 97)) {
            const long m = compute_m(inv_sqrt, c, n);
            const double lo = inv_sqrt(n) / inv_sqrt(m);
            const double hi = inv_sqrt(n) / inv_sqrt(m + 1);
            if (lo <= c) {
                EXPECT_LT(c, hi) << "n " << n << " c " << c;
            } else {
                EXPECT_EQ(m, 1);
            }
        }
        const long m = compute_m(inv_sqrt, c, 10000);
        EXPECT_LT(std::abs(inv_sqrt(10000) / inv_sqrt(m) - c), 0.05 * c);
    }
}

TEST(ComputeDeltas, GaussianValues) {
    const auto d = compute_deltas(gaussian_iid_tail(), 10000, 0.01);
    ASSERT_EQ(d.size(), 10000u);
    EXPECT_DOUBLE_EQ(d[99], 0.15);
    EXPECT_LT(d[9999], d[99]);
    for (std::size_t i = 1; i < d.size(); ++i) ASSERT_LE(d[i], d[i - 1]);
    // n = 1: P(|Z| >= 0.57) = 0.5687 is the first grid point under its delta.
    EXPECT_DOUBLE_EQ(d[0], 0.57);
}

TEST(ComputeDeltas, ZeroTailGivesTheSmallestGridValue) {
    const auto d = compute_deltas([](long, double) { return 0.0; }, 50, 0.01);
    for (double v : d) EXPECT_DOUBLE_EQ(v, 0.01);
}

TEST(ComputeDeltas, ThrowsNamingN) {
    const TailFn stuck = [](long n, double) { return n == 7 ? 1.0 + 1e-3 : 0.0; };
    try {
        compute_deltas(stuck, 10, 0.01);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("n = 7"), std::string::npos) << e.what();
    }
}

TEST(ComputeQ, Examples) {
    EXPECT_EQ(compute_q(0.01, 10, 100), 10);
    EXPECT_EQ(compute_q(0.15, 25, 100), 2);
    EXPECT_EQ(compute_q(1.0, 10, 100), 1);
    EXPECT_EQ(compute_q(0.0001, 10, 15), 4);  // capped by n - m - 1
    EXPECT_EQ(compute_q(0.0001, 10, 11), 1);
    EXPECT_THROW(compute_q(0.0, 1, 10), InvalidInput);
}

TEST(Plan, ThresholdAndEntries) {
    const auto plan = make_plan(inv_sqrt, gaussian_iid_tail(), 0.5, 400);
    EXPECT_EQ(plan.m[100], 25);
    EXPECT_DOUBLE_EQ(plan.delta[100], 0.15);
    EXPECT_EQ(plan.q[100], 2);
    EXPECT_DOUBLE_EQ(plan.ratio[100], 0.5);
    for (long n = plan.threshold; n <= 400; ++n) EXPECT_LT(plan.m[n] + plan.q[n], n);
    EXPECT_TRUE(plan.pre_asymptotic(plan.threshold - 1));
    EXPECT_FALSE(plan.pre_asymptotic(plan.threshold));
    EXPECT_TRUE(plan.pre_asymptotic(401));
}

TEST(Decompose, HandComputed) {
    Eigen::VectorXd x(6);
    x << 1, 2, 3, 4, 5, 6;
    NormingSequences nm;
    nm.a = [](long n) { return 1.0 / static_cast<double>(n); };
    nm.b = [](long n) { return Eigen::VectorXd::Constant(1, -1.0); };
    const auto t = decompose_at(x, nm, 6, 2, 2);
    EXPECT_DOUBLE_EQ(t.u[0], 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(t.v[0], 7.0 / 6.0);
    EXPECT_DOUBLE_EQ(t.w[0], 7.0 / 6.0);
    EXPECT_DOUBLE_EQ(t.total[0], 2.5);
    EXPECT_LT(t.identity_error, 1e-15);

    const auto empty_v = decompose_at(x, nm, 6, 2, 0);
    EXPECT_EQ(empty_v.v[0], 0.0);
    EXPECT_THROW(decompose_at(x, nm, 6, 4, 3), InvalidInput);
    EXPECT_THROW(decompose_at(x, nm, 7, 2, 2), InvalidInput);
}

TEST(Decompose, IdentityOnRandomPaths) {
    for (const auto& spec : {ProcessSpec::ar1(0.5), ProcessSpec::iid_normal(2.0, 1.0),
                             ProcessSpec::moving_average({1.0, 0.5})}) {
        const auto nm = norming_for(spec);
        const auto plan = make_plan(nm.a, marginal_tail(spec, nm), 0.5, 1000);
        for (std::uint64_t r = 0; r < 20; ++r) {
            const auto path = generate_path(spec, 1000, 5, r);
            for (long n : {plan.threshold, 500L, 1000L}) {
                const auto t = decompose(path, nm, plan, n);
                EXPECT_LT(t.identity_error, 1e-12);
            }
        }
        const auto path = generate_path(spec, 1000, 5, 0);
        EXPECT_THROW(decompose(path, nm, plan, plan.threshold - 1), InvalidInput);
    }
}

TEST(Verify, ConstantProcessIsDegenerate) {
    EXPECT_THROW(verify_blocking(ProcessSpec::constant_value(1.0)), DegenerateModel);
}

TEST(Verify, SmallIidRun) {
    BlockingOptions opt;
    opt.n_grid = {256, 1024};
    opt.replications = 2000;
    opt.seed = 3;
    const auto rep = verify_blocking(ProcessSpec::iid_normal(), opt);
    EXPECT_EQ(rep.row(256, "block-identity").pass, true);
    EXPECT_LT(rep.row(1024, "block-identity").value, 1e-12);
    EXPECT_EQ(rep.row(1024, "alpha-at-separation").value, 0.0);
    EXPECT_LT(rep.row(1024, "normalized-sum-law").value, 0.05);
    EXPECT_LT(rep.row(1024, "lead-block-law").value, 0.05);
    EXPECT_LT(rep.row(1024, "trail-block-law").value, 0.05);
    EXPECT_TRUE(rep.row(1024, "ratio-sandwich").pass);
    EXPECT_TRUE(rep.row(1024, "delta-inequality").pass);
    EXPECT_TRUE(rep.row(1024, "selfdecomposability").pass);
    EXPECT_THROW(rep.row(1024, "no-such-metric"), InvalidInput);

    std::ostringstream csv;
    rep.write_csv(csv);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
              "n,m_n,q_n,delta_n,ratio,metric_name,value,analytic_ceiling,pass");
}

TEST(Verify, ThreadCountDoesNotChangeResults) {
    BlockingOptions opt;
    opt.n_grid = {256};
    opt.replications = 500;
    std::ostringstream one, four;
    verify_blocking(ProcessSpec::ar1(0.5), opt).write_csv(one);
    opt.threads = 4;
    verify_blocking(ProcessSpec::ar1(0.5), opt).write_csv(four);
    EXPECT_EQ(one.str(), four.str());
}

TEST(Verify, RejectsMultivariateAndBadGrid) {
    auto spec = ProcessSpec::iid_normal();
    spec.dim = 2;
    EXPECT_THROW(verify_blocking(spec), InvalidInput);
    BlockingOptions opt;
    opt.n_grid = {2};  // m + q = 2: no room for a trailing block
    EXPECT_THROW(verify_blocking(ProcessSpec::iid_normal(), opt), InvalidInput);
    opt.n_grid = {512, 256};
    EXPECT_THROW(verify_blocking(ProcessSpec::iid_normal(), opt), InvalidInput);
}
