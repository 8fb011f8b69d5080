#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/processes.hpp"

namespace mixlab {

using NormFn = std::function<double(long)>;

/// m_n = max{1 <= k <= n-1 : a(n)/a(k) <= c}, or 1 when no such k exists.
long compute_m(const NormFn& a, double c, long n);

/// delta_1..delta_N (index 0 holds delta_1).  Per n the smallest grid value
/// delta in {step, 2 step, ..., 1} with tail(n, delta) <= delta, followed by
/// a reverse running maximum so the sequence is nonincreasing.  Throws
/// InvalidInput naming n if no grid value qualifies.
std::vector<double> compute_deltas(const TailFn& tail, long horizon, double grid_step);

/// q = max(1, min(floor(delta^-1/2), n - m - 1)).
long compute_q(double delta, long m, long n);

/// Block lengths for every n = 1..horizon.
struct BlockingPlan {
    double c = 0.5;
    long horizon = 0;
    double grid_step = 0.01;
    std::vector<long> m;         // index n; entries 0 and 1 unused
    std::vector<long> q;         // index n
    std::vector<double> delta;   // index n
    std::vector<double> ratio;   // a(n)/a(m_n), index n
    long threshold = 2;          // m + q < n for every n in [threshold, horizon]

    bool pre_asymptotic(long n) const { return n < threshold || n > horizon; }
};

BlockingPlan make_plan(const NormFn& a, const TailFn& tail, double c, long horizon, double grid_step = 0.01);

/// U + V + W = a(n) S_n + b(n) with
///   U = (a_n/a_m)(a_m S_m + b_m)
///   V = a_n (S_{m+q} - S_m)
///   W = a_n (S_n - S_{m+q}) + b_n - (a_n/a_m) b_m
struct BlockTriple {
    Eigen::VectorXd u, v, w;
    Eigen::VectorXd total;      // a_n S_n + b_n computed directly
    long n = 0;
    double identity_error = 0;  // |U + V + W - total| / max(1, |total|)
};

/// Explicit block lengths; requires 1 <= m, m + q <= n <= path length.
BlockTriple decompose_at(const Eigen::Ref<const Eigen::MatrixXd>& values, const NormingSequences& norming, long n,
                         long m, long q);

/// Uses the plan's (m_n, q_n); rejects pre-asymptotic n with the threshold value.
BlockTriple decompose(const SamplePath& path, const NormingSequences& norming, const BlockingPlan& plan, long n);

struct BlockingOptions {
    double c = 0.5;
    std::vector<long> n_grid{256, 512, 1024, 2048, 4096};
    long replications = 10000;
    std::uint64_t seed = 1;
    double epsilon = 0.1;          // threshold for |V_n|
    double grid_step = 0.01;
    double ks_tol = 0.05;
    double tightness_bound = 5.0;  // bound on the 99% quantile of |W_n|
    double cf_radius = 3.0;
    std::vector<double> selfdecomp_c{0.3, 0.5, 0.8};
    unsigned threads = 1;
    // Assert the separator ceiling even where q delta >= eps, i.e. outside
    // the range where the tail bound implies it.
    bool assert_separator_always = false;
};

struct BlockingRow {
    long n = 0;
    long m = 0;
    long q = 0;
    double delta = 0.0;
    double ratio = 0.0;
    std::string metric;
    double value = 0.0;
    double ceiling = 0.0;
    bool pass = false;
};

struct BlockingReport {
    BlockingPlan plan;
    std::string norming_provenance;
    std::vector<BlockingRow> rows;

    bool pass() const;
    const BlockingRow& row(long n, const std::string& metric) const;
    /// Columns n,m_n,q_n,delta_n,ratio,metric_name,value,analytic_ceiling,pass.
    void write_csv(std::ostream& out) const;
};

/// Monte Carlo check of the blocking argument for a scalar process whose
/// normalized sums tend to N(0, 1).  Metrics per n:
///   ratio-sandwich         a_n/a_m <= c < a_n/a_{m+1}
///   delta-inequality       tail(n, delta_n) <= delta_n
///   block-identity         max relative error of U + V + W
///   separator-vanishes     P(|V_n| > eps) <= min(1, q delta) + 3 s.e.
///                          (suffixed -unasserted where q delta >= eps)
///   lead-block-law         KS(U_n, N(0, c^2))
///   trail-block-tightness  99% quantile of |W_n|
///   alpha-at-separation    certified alpha(q_n + 1)
///   outer-block-dependence plug-in alpha of (U_n, W_n) on a median split
///   outer-sum-law          KS(U_n + W_n, N(0, 1))
///   normalized-sum-law     KS(a_n S_n + b_n, N(0, 1))
///   cf-factorization       max |phi_total - phi_U phi_W| on a grid, <= 5/sqrt(R)
///   selfdecomposability    smallest eigenvalue of the ratio test on the totals
///   trail-block-law        KS(W_n, N(0, 1 - c^2)), iid families only
BlockingReport verify_blocking(const ProcessSpec& spec, const BlockingOptions& options = {});

}  // namespace mixlab
