#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/prob_core.hpp"

namespace mixlab {

/// Finite-state, time-homogeneous Markov chain with real state labels.
struct MarkovChainSpec {
    Eigen::VectorXd states;
    Eigen::MatrixXd transition;  // row-stochastic
    Eigen::VectorXd initial;     // law of X_1

    /// Throws InvalidInput on shape mismatch, negative entries, or rows /
    /// initial law not summing to one within 1e-12.
    void validate() const;

    /// Chain whose rows all equal `law`, started at `law` (an i.i.d. sequence).
    static MarkovChainSpec iid(Eigen::VectorXd states, const Eigen::VectorXd& law);

    /// Two-state chain on {0, 1} flipping with probability `flip`, started
    /// from its uniform stationary law.
    static MarkovChainSpec symmetric_two_state(double flip);
};

/// Unique stationary law of an irreducible chain (solves pi P = pi, sum pi = 1).
Eigen::VectorXd stationary_distribution(const MarkovChainSpec& chain);

enum class ProfileKind { ExactWindow, AnalyticBound, PlugInEstimate };

std::string to_string(ProfileKind kind);

struct AlphaPoint {
    long n = 0;
    double alpha = 0.0;
};

struct AlphaProfile {
    std::vector<AlphaPoint> values;
    ProfileKind kind = ProfileKind::ExactWindow;
    // Which side of the untruncated coefficient the numbers sit on, plus the
    // truncation parameters used.
    std::string note;
};

struct WindowOptions {
    int past_window = 1;
    int future_window = 1;
    long j_max = 0;  // 0 selects past_window + 10
    int max_enumerated = 20;
    long max_atoms = 4096;  // cap on the larger block's atom count
};

/// Exact joint law of (X_{j-pw+1..j}, X_{j+n..j+n+fw-1}), built by matrix
/// propagation.  The past block is clipped at index 1.
FiniteJointDistribution block_joint(const MarkovChainSpec& chain, long j, long n, int past_window,
                                    int future_window, long max_atoms = 4096);

/// alpha between the two windowed blocks.  A lower bound for the
/// coefficient that uses the whole past and future.
double alpha_window(const MarkovChainSpec& chain, long j, long n, int past_window, int future_window,
                    int max_enumerated = 20);

/// Per n, the maximum of alpha_window over j = 1..j_max.
AlphaProfile alpha_sequence(const MarkovChainSpec& chain, const std::vector<long>& n_list,
                            const WindowOptions& options = {});

/// alpha(n) <= min(1/4, constant * rho^n), or 0 for n > zero_beyond when set.
struct DecayCertificate {
    double constant = 0.25;
    double rho = 1.0;
    long zero_beyond = -1;  // -1: no finite dependence range
    bool decays = false;    // false: only the trivial bound 1/4 is certified
    std::string formula;

    double at(long n) const;
    AlphaProfile profile(const std::vector<long>& n_list) const;
};

/// Doeblin certificate.  Searches powers k = 1..max_power for a transition
/// power with a strictly positive column; with minorization mass
/// eps = sum_j min_i P^k(i, j) the Dobrushin contraction gives
/// alpha(n) <= (1/4)(1 - eps)^floor(n/k) <= (1/4) rho^(1-k) rho^n,
/// rho = (1 - eps)^(1/k).
DecayCertificate alpha_bound_geometric(const MarkovChainSpec& chain, int max_power = 8);

/// Stationary Gaussian AR(1): alpha(n) <= maximal correlation = |phi|^n.
DecayCertificate alpha_bound_gaussian_ar1(double phi);

/// Sequences with finite dependence range q (MA(q), i.i.d. when q = 0).
DecayCertificate alpha_bound_dependent(long q);

/// Plug-in alpha of paired observations: both coordinates binned at their
/// empirical quantiles into `bins` cells, alpha_exact of the histogram.
double plugin_alpha(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& z,
                    int bins);

}  // namespace mixlab
