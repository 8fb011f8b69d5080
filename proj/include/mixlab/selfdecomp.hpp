#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/prob_core.hpp"

namespace mixlab {

/// T_c: multiplies every point by c (c != 0).
Sample scale_sample(const Sample& sample, double c);

struct SelfdecompOptions {
    std::vector<double> c_values{0.3, 0.5, 0.8};
    double grid_radius = 8.0;
    Eigen::Index grid_points = 41;
    double tol = 1e-9;
    double floor = 1e-6;  // |phi(c t)| below this makes psi_c unreliable

    /// Defaults for exact characteristic functions.
    static SelfdecompOptions closed_form() { return {}; }
    /// Defaults for empirical characteristic functions: narrower grid (the
    /// ratio of two noisy estimates blows up where phi is small) and a
    /// looser tolerance.
    static SelfdecompOptions empirical() {
        SelfdecompOptions o;
        o.grid_radius = 0.75;
        o.tol = 1e-3;
        return o;
    }
};

struct CValueResult {
    double c = 0.0;
    bool psd_pass = false;
    double worst_violation = 0.0;  // smallest eigenvalue; NaN when inconclusive
    double grid_radius = 0.0;
    std::optional<double> inconclusive_at;  // a grid difference where |phi(c t)| < floor
};

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict verdict);

struct SelfdecompReport {
    std::vector<CValueResult> per_c;
    Verdict verdict = Verdict::Inconclusive;
};

/// psi_c(t_j - t_k) = phi(t_j - t_k) / phi(c (t_j - t_k)) on a uniform grid.
/// Throws InvalidInput naming t if |phi(c t)| falls below `floor`.
Eigen::MatrixXcd ratio_matrix(const CharFn& phi, double c, const Eigen::Ref<const Eigen::VectorXd>& grid,
                              double floor = 1e-6);

/// Grid test that phi(t)/phi(ct) is positive-definite for each c in (0, 1).
/// Verdict: fail if any c fails, pass if every c passes, inconclusive otherwise.
SelfdecompReport selfdecomp_test(const CharFn& phi, const SelfdecompOptions& options = SelfdecompOptions::closed_form());

/// Same test on the empirical characteristic function of a scalar sample.
SelfdecompReport selfdecomp_test(const Sample& sample,
                                 const SelfdecompOptions& options = SelfdecompOptions::empirical());

/// JSON array, one object per c: {"c", "psd_pass", "worst_violation", "grid_radius", "inconclusive_at"}.
std::string report_json(const SelfdecompReport& report);

/// Law of the jumps of a compound-Poisson component.
struct JumpLaw {
    enum class Kind { Discrete, Normal, DoublyExponential };
    Kind kind = Kind::Discrete;
    std::vector<double> atoms;
    std::vector<double> probs;
    double mean = 0.0;
    double sd = 1.0;

    static JumpLaw discrete(std::vector<double> atoms, std::vector<double> probs);
    static JumpLaw normal(double mean, double sd);
    /// P(J = 2^(2^k)) = 2^-k, k >= 1.  E log(1 + J) is infinite.
    static JumpLaw doubly_exponential();

    void validate() const;
};

/// Background driving Levy process: drift t + sigma B_t + compound Poisson.
struct BDLPSpec {
    double drift = 0.0;
    double gaussian_sigma = 0.0;
    double jump_rate = 0.0;
    JumpLaw jump_law;

    void validate() const;
};

/// Draws of int_0^T e^-t dY(t), truncating the infinite horizon at T = t_max
/// (the omitted tail carries weight e^-T).  Drift enters in closed form,
/// Gaussian increments per step with their exact variance
/// sigma^2 (e^-2t0 - e^-2t1) / 2, and jumps at exact exponential times
/// weighted by e^-tau.
Sample sample_random_integral(const BDLPSpec& bdlp, double t_max, long n_steps, long n_samples,
                              std::uint64_t seed);

struct LogMomentResult {
    double estimate = 0.0;  // mean of log(1 + |Y(1)|)
    bool suspect_infinite = false;
    double growth_ratio = 1.0;
    long n_samples = 0;
};

/// Monte Carlo E log(1 + |Y(1)|).  Growth probe: median of batch means at
/// batch size 50 over median at batch size 5; a ratio above `growth_factor`
/// marks the moment as suspect-infinite.  Needs n_samples >= 500.
LogMomentResult log_moment_check(const BDLPSpec& bdlp, long n_samples, std::uint64_t seed,
                                 double growth_factor = 1.5);

}  // namespace mixlab
