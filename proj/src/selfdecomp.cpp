#include "mixlab/selfdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_contraction(double c) {
    if (!(c > 0.0 && c < 1.0)) {
        std::ostringstream msg;
        msg << "c = " << c << " is outside (0, 1)";
        throw InvalidInput(msg.str());
    }
}

// Spacing of a uniform symmetric grid; throws if the grid is not uniform.
double grid_step(const Eigen::Ref<const Eigen::VectorXd>& grid) {
    require_symmetric_grid(grid);
    const double h = grid[1] - grid[0];
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * h) throw InvalidInput("frequency grid is not uniform");
    return h;
}

struct RatioValues {
    std::vector<Complex> psi;  // psi(k h), k = 0..n-1
    std::optional<double> offending;
};

RatioValues ratio_values(const CharFn& phi, double c, double h, Eigen::Index n, double floor) {
    RatioValues r;
    r.psi.resize(static_cast<std::size_t>(n));
    r.psi[0] = Complex{1.0, 0.0};
    for (Eigen::Index k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const Complex denom = phi(c * t);
        if (!(std::abs(denom) >= floor)) {
            r.offending = t;
            return r;
        }
        r.psi[static_cast<std::size_t>(k)] = phi(t) / denom;
    }
    return r;
}

Eigen::MatrixXcd toeplitz(const std::vector<Complex>& psi) {
    const auto n = static_cast<Eigen::Index>(psi.size() + 1) / 2;
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::Index d = j - k;
            m(j, k) = d >= 0 ? psi[static_cast<std::size_t>(d)] : std::conj(psi[static_cast<std::size_t>(-d)]);
        }
    return m;
}

SelfdecompReport run_test(const CharFn& phi, const SelfdecompOptions& options) {
    if (options.c_values.empty()) throw InvalidInput("selfdecomp_test needs at least one c");
    if (!(options.tol > 0.0) || !(options.floor > 0.0)) throw InvalidInput("tolerances must be positive");
    const Eigen::VectorXd grid = uniform_grid(options.grid_radius, options.grid_points);
    const double h = grid[1] - grid[0];
    const Eigen::Index span = 2 * options.grid_points - 1;  // differences 0..(points-1) h

    SelfdecompReport report;
    bool any_fail = false;
    bool all_pass = true;
    for (double c : options.c_values) {
        require_contraction(c);
        CValueResult row;
        row.c = c;
        row.grid_radius = options.grid_radius;
        const RatioValues values = ratio_values(phi, c, h, options.grid_points, options.floor);
        if (values.offending) {
            row.inconclusive_at = values.offending;
            row.worst_violation = kNaN;
            all_pass = false;
        } else {
            std::vector<Complex> full(static_cast<std::size_t>(span));
            std::copy(values.psi.begin(), values.psi.end(), full.begin());
            const PsdResult psd = psd_check(toeplitz(full), options.tol);
            row.psd_pass = psd.is_psd;
            row.worst_violation = psd.worst_violation;
            any_fail = any_fail || !psd.is_psd;
            all_pass = all_pass && psd.is_psd;
        }
        report.per_c.push_back(row);
    }
    report.verdict = any_fail ? Verdict::Fail : (all_pass ? Verdict::Pass : Verdict::Inconclusive);
    return report;
}

}  // namespace

Sample scale_sample(const Sample& sample, double c) {
    if (c == 0.0 || !std::isfinite(c)) throw InvalidInput("scaling constant must be finite and nonzero");
    return Sample(sample.points() * c);
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

Eigen::MatrixXcd ratio_matrix(const CharFn& phi, double c, const Eigen::Ref<const Eigen::VectorXd>& grid,
                              double floor) {
    require_contraction(c);
    const double h = grid_step(grid);
    const RatioValues values = ratio_values(phi, c, h, grid.size(), floor);
    if (values.offending) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "|phi(c t)| below floor " << floor << " at t = " << *values.offending;
        throw InvalidInput(msg.str());
    }
    std::vector<Complex> full = values.psi;
    full.resize(static_cast<std::size_t>(2 * grid.size() - 1));
    return toeplitz(full);
}

SelfdecompReport selfdecomp_test(const CharFn& phi, const SelfdecompOptions& options) {
    return run_test(phi, options);
}

SelfdecompReport selfdecomp_test(const Sample& sample, const SelfdecompOptions& options) {
    const Eigen::VectorXd x = sample.values();
    return run_test([&x](double t) { return cf_at(x, t); }, options);
}

std::string report_json(const SelfdecompReport& report) {
    auto rows = nlohmann::json::array();
    for (const auto& r : report.per_c) {
        nlohmann::json row;
        row["c"] = r.c;
        row["psd_pass"] = r.psd_pass;
        row["worst_violation"] = std::isnan(r.worst_violation) ? nlohmann::json(nullptr) : nlohmann::json(r.worst_violation);
        row["grid_radius"] = r.grid_radius;
        row["inconclusive_at"] = r.inconclusive_at ? nlohmann::json(*r.inconclusive_at) : nlohmann::json(nullptr);
        rows.push_back(row);
    }
    return rows.dump();
}

JumpLaw JumpLaw::discrete(std::vector<double> atoms, std::vector<double> probs) {
    JumpLaw law;
    law.kind = Kind::Discrete;
    law.atoms = std::move(atoms);
    law.probs = std::move(probs);
    law.validate();
    return law;
}

JumpLaw JumpLaw::normal(double mean, double sd) {
    JumpLaw law;
    law.kind = Kind::Normal;
    law.mean = mean;
    law.sd = sd;
    law.validate();
    return law;
}

JumpLaw JumpLaw::doubly_exponential() {
    JumpLaw law;
    law.kind = Kind::DoublyExponential;
    return law;
}

void JumpLaw::validate() const {
    switch (kind) {
        case Kind::Discrete: {
            if (atoms.empty() || atoms.size() != probs.size())
                throw InvalidInput("discrete jump law needs matching nonempty atoms and probs");
            double total = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (!(probs[i] >= 0.0) || !std::isfinite(atoms[i]))
                    throw InvalidInput("discrete jump law has a negative probability or non-finite atom");
                total += probs[i];
            }
            if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("discrete jump probabilities do not sum to 1");
            break;
        }
        case Kind::Normal:
            if (!(sd >= 0.0) || !std::isfinite(mean)) throw InvalidInput("normal jump law needs sd >= 0");
            break;
        case Kind::DoublyExponential: break;
    }
}

void BDLPSpec::validate() const {
    if (!std::isfinite(drift)) throw InvalidInput("drift must be finite");
    if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) throw InvalidInput("gaussian_sigma must be >= 0");
    if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) throw InvalidInput("jump_rate must be >= 0");
    if (jump_rate > 0.0) jump_law.validate();
}

namespace {

// A real number as sign and log-magnitude, so that jumps like 2^(2^40) stay
// representable.
struct LogReal {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();
};

LogReal to_log(double x) {
    if (x == 0.0) return {};
    return {x > 0.0 ? 1 : -1, std::log(std::abs(x))};
}

class JumpSampler {
public:
    explicit JumpSampler(const JumpLaw& law) : law_(law) {
        if (law.kind == JumpLaw::Kind::Discrete) {
            double acc = 0.0;
            for (double p : law.probs) cumulative_.push_back(acc += p);
        }
    }

    LogReal draw(Draws& draws) const {
        switch (law_.kind) {
            case JumpLaw::Kind::Discrete: return to_log(law_.atoms[draws.categorical(cumulative_)]);
            case JumpLaw::Kind::Normal: return to_log(law_.mean + law_.sd * draws.normal());
            case JumpLaw::Kind::DoublyExponential: {
                const auto k = static_cast<double>(draws.geometric(0.5));
                return {1, std::exp2(k) * std::numbers::ln2};
            }
        }
        return {};
    }

private:
    const JumpLaw& law_;
    std::vector<double> cumulative_;
};

// Accumulates a sum of LogReals as separate log-sum-exp totals of the
// positive and negative parts.
class LogSum {
public:
    void add(LogReal x) {
        if (x.sign > 0) push(pos_, x.log_abs);
        if (x.sign < 0) push(neg_, x.log_abs);
    }

    // log |sum|, -inf when the sum is zero.
    double log_abs() const {
        const double hi = std::max(pos_, neg_);
        const double lo = std::min(pos_, neg_);
        if (hi == -kInf) return -kInf;
        if (lo == -kInf) return hi;
        if (hi == lo) return -kInf;
        return hi + std::log1p(-std::exp(lo - hi));
    }

    double value() const {
        const double m = log_abs();
        return (pos_ >= neg_ ? 1.0 : -1.0) * std::exp(m);
    }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    static void push(double& total, double x) {
        if (x == -kInf) return;
        if (total == -kInf) {
            total = x;
            return;
        }
        const double hi = std::max(total, x);
        total = hi + std::log1p(std::exp(std::min(total, x) - hi));
    }

    double pos_ = -kInf;
    double neg_ = -kInf;
};

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double median_of_batch_means(const std::vector<double>& x, std::size_t batch) {
    std::vector<double> means;
    for (std::size_t start = 0; start + batch <= x.size(); start += batch) {
        double s = 0.0;
        for (std::size_t i = start; i < start + batch; ++i) s += x[i];
        means.push_back(s / static_cast<double>(batch));
    }
    const auto mid = means.begin() + static_cast<std::ptrdiff_t>(means.size() / 2);
    std::nth_element(means.begin(), mid, means.end());
    if (means.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(means.begin(), mid));
}

}  // namespace

Sample sample_random_integral(const BDLPSpec& bdlp, double t_max, long n_steps, long n_samples, std::uint64_t seed) {
    bdlp.validate();
    if (!(t_max >= 5.0) || !std::isfinite(t_max)) throw InvalidInput("t_max must be at least 5");
    if (n_steps < 1) throw InvalidInput("n_steps must be positive");
    if (n_samples < 1) throw InvalidInput("n_samples must be positive");

    const double drift_part = -bdlp.drift * std::expm1(-t_max);
    std::vector<double> step_sd(static_cast<std::size_t>(n_steps));
    for (long i = 0; i < n_steps; ++i) {
        const double t0 = t_max * static_cast<double>(i) / static_cast<double>(n_steps);
        const double t1 = t_max * static_cast<double>(i + 1) / static_cast<double>(n_steps);
        step_sd[static_cast<std::size_t>(i)] =
            bdlp.gaussian_sigma * std::sqrt(0.5 * (std::exp(-2.0 * t0) - std::exp(-2.0 * t1)));
    }
    const JumpSampler jumps(bdlp.jump_law);

    Eigen::VectorXd out(n_samples);
    for (long s = 0; s < n_samples; ++s) {
        Draws draws(seed, derive_stream(0x0b1d, static_cast<std::uint64_t>(s)));
        double x = drift_part;
        if (bdlp.gaussian_sigma > 0.0)
            for (double sd : step_sd) x += sd * draws.normal();
        if (bdlp.jump_rate > 0.0) {
            LogSum jump_total;
            for (double tau = draws.exponential(bdlp.jump_rate); tau <= t_max; tau += draws.exponential(bdlp.jump_rate)) {
                LogReal j = jumps.draw(draws);
                j.log_abs -= tau;
                jump_total.add(j);
            }
            x += jump_total.value();
        }
        out[s] = x;
    }
    return Sample::scalar(out);
}

LogMomentResult log_moment_check(const BDLPSpec& bdlp, long n_samples, std::uint64_t seed, double growth_factor) {
    bdlp.validate();
    if (n_samples < 500) throw InvalidInput("log_moment_check needs at least 500 samples");
    if (!(growth_factor > 1.0)) throw InvalidInput("growth factor must exceed 1");
    const JumpSampler jumps(bdlp.jump_law);

    std::vector<double> draws_log(static_cast<std::size_t>(n_samples));
    LogMomentResult result;
    result.n_samples = n_samples;
    double mean = 0.0;
    for (long s = 0; s < n_samples; ++s) {
        Draws draws(seed, derive_stream(0x0106, static_cast<std::uint64_t>(s)));
        LogSum y;
        y.add(to_log(bdlp.drift));
        if (bdlp.gaussian_sigma > 0.0) y.add(to_log(bdlp.gaussian_sigma * draws.normal()));
        if (bdlp.jump_rate > 0.0)
            for (double tau = draws.exponential(bdlp.jump_rate); tau <= 1.0; tau += draws.exponential(bdlp.jump_rate))
                y.add(jumps.draw(draws));
        const double v = softplus(y.log_abs());
        draws_log[static_cast<std::size_t>(s)] = v;
        mean += (v - mean) / static_cast<double>(s + 1);
    }
    result.estimate = mean;

    const double small = median_of_batch_means(draws_log, 5);
    const double large = median_of_batch_means(draws_log, 50);
    if (small > 0.0)
        result.growth_ratio = large / small;
    else
        result.growth_ratio = large > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    result.suspect_infinite = result.growth_ratio > growth_factor;
    return result;
}

}  // namespace mixlab
