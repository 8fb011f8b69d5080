#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/mixing.hpp"

namespace mixlab {

enum class Family { Iid, Ar1, MovingAverage, MarkovFunction, Constant };
enum class Innovation { Normal, Rademacher };

std::string to_string(Family family);
std::string to_string(Innovation innovation);
Family family_from_string(const std::string& name);
Innovation innovation_from_string(const std::string& name);

/// Generative model of a random sequence X_1, X_2, ...
///
///   iid:             X_k = mean + sigma * e_k
///   ar1:             X_k = mean + Y_k,  Y_k = phi * Y_{k-1} + sigma * e_k, Y stationary
///   ma_q:            X_k = mean + sigma * sum_i w_i e_{k-i}
///   markov_function: X_k = state_values[S_k] for a finite chain S
///   constant:        X_k = constant
///
/// For dim > 1 the coordinates of iid/ar1/ma_q/constant are independent
/// copies.  e_k are standard normal or Rademacher.
struct ProcessSpec {
    Family family = Family::Iid;
    int dim = 1;
    double mean = 0.0;
    double sigma = 1.0;
    Innovation innovation = Innovation::Normal;
    double phi = 0.0;
    std::vector<double> ma_weights;
    MarkovChainSpec chain;
    Eigen::VectorXd state_values;  // empty: use chain.states
    double constant = 0.0;

    void validate() const;
    /// Canonical text form; equal specs give equal strings.
    std::string describe() const;
    std::uint64_t hash() const;

    static ProcessSpec iid_normal(double sigma = 1.0, double mean = 0.0);
    static ProcessSpec ar1(double phi, double sigma = 1.0);
    static ProcessSpec moving_average(std::vector<double> weights, double sigma = 1.0);
    static ProcessSpec markov_function(MarkovChainSpec chain, Eigen::VectorXd values = {});
    static ProcessSpec constant_value(double value);
};

/// Realization X_1..X_N, one row per time index.
struct SamplePath {
    Eigen::MatrixXd values;
    std::uint64_t spec_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Deterministic in (spec, N, seed, stream).  ar1 starts from its stationary
/// law (exact for normal innovations; a 1e-17-truncated moving-average
/// representation otherwise); ma_q draws q pre-samples.
SamplePath generate_path(const ProcessSpec& spec, long length, std::uint64_t seed, std::uint64_t stream = 0);

/// Two-column CSV "index,value" (dim 1) or "index,value_1,..." (dim > 1).
void write_path_csv(std::ostream& out, const SamplePath& path);

/// Norming constants for a_n S_n + b_n => N(0, I):
/// a(n) = 1 / sqrt(n v), b(n) = -a(n) E[S_n].
struct NormingSequences {
    std::function<double(long)> a;
    std::function<Eigen::VectorXd(long)> b;
    std::string provenance;
    double long_run_variance = 0.0;
};

/// lim Var(S_n) / n per coordinate.
double long_run_variance(const ProcessSpec& spec);

/// Exact E[X_k] summed over k = 1..n.
Eigen::VectorXd expected_partial_sum(const ProcessSpec& spec, long n);

/// Throws DegenerateModel when the long-run variance vanishes.
NormingSequences norming_for(const ProcessSpec& spec);

struct NormingTolerances {
    double a_fraction = 0.1;  // a(n_max) < a_fraction * a(1)
    double ratio = 0.01;      // |a(n_max)/a(n_max-1) - 1| < ratio
    double drift = 0.01;      // |b(n_max) - b(n_max-1) a(n_max)/a(n_max-1)| < drift
};

struct NormingReport {
    long n_max = 0;
    double a_first = 0.0;
    double a_tail = 0.0;
    double ratio_tail = 0.0;
    double drift_tail = 0.0;
    bool a_vanishes = false;
    bool ratio_to_one = false;
    bool drift_to_zero = false;
    bool pass = false;
};

/// Tail checks that a_n -> 0, a_{n+1}/a_n -> 1 and
/// b_{n+1} - b_n a_{n+1}/a_n -> 0 (required of any norming with a
/// non-degenerate limit).
NormingReport validate_norming(const NormingSequences& norming, long n_max, const NormingTolerances& tol = {});

/// (n, delta) -> max_{k <= n} P(a(n) |X_k| >= delta).
using TailFn = std::function<double(long, double)>;

/// Closed form or exact enumeration where available; a Monte Carlo estimate
/// from `mc_draws` stationary draws otherwise (ar1 with Rademacher
/// innovations).
TailFn marginal_tail(const ProcessSpec& spec, const NormingSequences& norming, long mc_draws = 200000,
                     std::uint64_t seed = 0x7a11);

/// Analytic alpha-mixing certificate for the family.
DecayCertificate mixing_certificate(const ProcessSpec& spec);

/// Exact Var(S_n) of one coordinate for the iid / ar1 / ma_q families.
double partial_sum_variance(const ProcessSpec& spec, long n);

}  // namespace mixlab
