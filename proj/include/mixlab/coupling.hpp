#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/prob_core.hpp"

namespace mixlab {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// min c.x subject to A x = b, x >= 0.  Dense two-phase simplex with Bland's
/// rule; rows with negative b are negated first and redundant equality rows
/// are dropped after phase one.
LpResult simplex_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                          double pivot_tol = 1e-12);

/// Finite-space instance: the joint law of (X, Z), a net a_1..a_N, radius
/// eps and the mass delta allowed outside D = {x : |x - a_j| <= eps for some j}.
struct CouplingProblem {
    FiniteJointDistribution joint;
    double epsilon = 0.25;
    Eigen::MatrixXd net;  // one point per row
    double delta = 0.0;
    long max_variables = 8000;

    /// Throws InvalidInput unless eps > 0, 0 <= delta < 1, the net lives in
    /// the atoms' space and P(X in D) >= 1 - delta.
    void validate() const;
};

struct CouplingSolution {
    /// triple[z](x, y) = P(X = x_i, Z = z, Y = x_y).
    std::vector<Eigen::MatrixXd> triple;
    double objective = 0.0;  // P(|X - Y| > 2 eps)
    double alpha = 0.0;
    double bound = 0.0;      // delta + 4 sqrt(N) alpha
    double residual_marginal = 0.0;
    double residual_independence = 0.0;
};

/// Minimizes P(|X - Y| > 2 eps) over laws of (X, Z, Y) with the given (X, Z)
/// marginal, Y independent of Z and Y distributed as X.  The program splits
/// into one transportation problem per atom of Z.  Throws std::logic_error if
/// the optimum exceeds the bound or a residual exceeds 1e-9.
CouplingSolution solve_coupling(const CouplingProblem& problem);

/// Objective of the feasible baseline Y independent of (X, Z).
double product_coupling_objective(const CouplingProblem& problem);

struct CouplingCase {
    std::string id;
    CouplingProblem problem;
};

struct CouplingRow {
    std::string case_id;
    double objective = 0.0;
    double bound = 0.0;
    double alpha = 0.0;
    long net_size = 0;
    double delta = 0.0;
    double residual_marginal = 0.0;
    double residual_independence = 0.0;
    bool pass = false;
};

struct CouplingReport {
    std::vector<CouplingRow> rows;
    bool pass() const;
    /// JSON array of {"case_id", "objective", "bound", "alpha", "N", "delta",
    /// "residual_marginal", "residual_independence", "pass"}.
    std::string to_json() const;
};

/// Scalar atoms at `points` with the joint pmf given; net = the atoms.
CouplingProblem coupling_on_points(const Eigen::VectorXd& points, const Eigen::MatrixXd& pmf, double epsilon,
                                   double delta = 0.0);

/// Fair bit with X = Z, the 0.3/0.2 table, an independent table, a point
/// mass and `random_cases` random 3x3 tables.
std::vector<CouplingCase> standard_coupling_cases(std::uint64_t seed, int random_cases = 10);

CouplingReport verify_coupling_suite(const std::vector<CouplingCase>& cases);

struct SumLawOptions {
    long replications = 100000;
    std::uint64_t seed = 1;
    double phi = 0.5;        // ar1 coefficient for the lagged-block case
    long block = 16;         // block length
    std::vector<long> lags{0, 1, 2, 4, 8, 16, 32};
    double ks_tol = 0.02;
    double control_margin = 0.05;  // negative control must exceed this KS
};

struct SumLawRow {
    std::string case_name;
    long lag = 0;
    double ks = 0.0;
    double reference_ks = 0.0;  // exact KS of the true law of X + Z to N(0, 2)
    double alpha_bound = 0.0;
    bool pass = false;
};

struct SumLawReport {
    std::vector<SumLawRow> rows;
    bool pass() const;
    void write_csv(std::ostream& out) const;
};

/// X_n + Z_n against N(0, 2) = N(0,1) * N(0,1):
///   independent  two independent standard normals, KS < ks_tol
///   ar1-blocks   standardized sums of two length-`block` ar1 blocks `lag`
///                apart; KS <= reference_ks + ks_tol with reference_ks -> 0
///   x-equals-z   X = Z, so the sum is N(0, 4); the fit must fail
SumLawReport sum_law_experiment(const SumLawOptions& options = {});

/// sup_x |Phi(x / s1) - Phi(x / s2)| for centered normals.
double normal_ks(double sd1, double sd2);

}  // namespace mixlab
