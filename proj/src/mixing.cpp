#include "mixlab/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixlab/error.hpp"

namespace mixlab {

namespace {

constexpr double kStochasticTolerance = 1e-12;

Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, long exponent) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        exponent >>= 1;
        if (exponent > 0) base = base * base;
    }
    return result;
}

long checked_power(long base, long exponent, long cap) {
    long value = 1;
    for (long i = 0; i < exponent; ++i) {
        if (value > cap / std::max(base, 1L)) return cap + 1;
        value *= base;
    }
    return value;
}

// Decode block index into state indices, earliest time first.
void decode(long index, long states, std::vector<int>& out) {
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        *it = static_cast<int>(index % states);
        index /= states;
    }
}

}  // namespace

void MarkovChainSpec::validate() const {
    const Eigen::Index s = states.size();
    if (s == 0) throw InvalidInput("markov chain needs at least one state");
    if (transition.rows() != s || transition.cols() != s)
        throw InvalidInput("transition matrix shape does not match state count");
    if (initial.size() != s) throw InvalidInput("initial law size does not match state count");
    if (!transition.allFinite() || transition.minCoeff() < 0.0)
        throw InvalidInput("transition matrix has a negative entry");
    if (!initial.allFinite() || initial.minCoeff() < 0.0) throw InvalidInput("initial law has a negative entry");
    for (Eigen::Index i = 0; i < s; ++i) {
        const double row = transition.row(i).sum();
        if (std::abs(row - 1.0) > kStochasticTolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "transition row " << i << " sums to " << row << ", not 1";
            throw InvalidInput(msg.str());
        }
    }
    if (std::abs(initial.sum() - 1.0) > kStochasticTolerance) throw InvalidInput("initial law does not sum to 1");
}

MarkovChainSpec MarkovChainSpec::iid(Eigen::VectorXd states, const Eigen::VectorXd& law) {
    MarkovChainSpec chain;
    chain.transition = law.transpose().replicate(states.size(), 1);
    chain.initial = law;
    chain.states = std::move(states);
    chain.validate();
    return chain;
}

MarkovChainSpec MarkovChainSpec::symmetric_two_state(double flip) {
    if (!(flip >= 0.0 && flip <= 1.0)) throw InvalidInput("flip probability must lie in [0, 1]");
    MarkovChainSpec chain;
    chain.states = Eigen::Vector2d(0.0, 1.0);
    chain.transition.resize(2, 2);
    chain.transition << 1.0 - flip, flip, flip, 1.0 - flip;
    chain.initial = Eigen::Vector2d(0.5, 0.5);
    return chain;
}

Eigen::VectorXd stationary_distribution(const MarkovChainSpec& chain) {
    chain.validate();
    const Eigen::Index s = chain.states.size();
    Eigen::MatrixXd a = chain.transition.transpose() - Eigen::MatrixXd::Identity(s, s);
    a.row(s - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
    rhs[s - 1] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw InvalidInput("chain has no unique stationary law");
    Eigen::VectorXd pi = lu.solve(rhs);
    pi = pi.cwiseMax(0.0);
    return pi / pi.sum();
}

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::ExactWindow: return "exact-window";
        case ProfileKind::AnalyticBound: return "analytic-bound";
        case ProfileKind::PlugInEstimate: return "plug-in-estimate";
    }
    return "unknown";
}

FiniteJointDistribution block_joint(const MarkovChainSpec& chain, long j, long n, int past_window,
                                    int future_window, long max_atoms) {
    chain.validate();
    if (j < 1 || n < 1) throw InvalidInput("block_joint needs j >= 1 and n >= 1");
    if (past_window < 1 || future_window < 1) throw InvalidInput("window sizes must be positive");

    const long s = chain.states.size();
    const long start = std::max(1L, j - past_window + 1);
    const long past_len = j - start + 1;
    const long past_atoms = checked_power(s, past_len, max_atoms);
    const long future_atoms = checked_power(s, future_window, max_atoms);
    if (past_atoms > max_atoms || future_atoms > max_atoms) {
        std::ostringstream msg;
        msg << "window too large: " << s << "^" << std::max(past_len, static_cast<long>(future_window))
            << " atoms exceeds the limit " << max_atoms;
        throw SizeLimitExceeded(msg.str());
    }

    const Eigen::RowVectorXd law_start = chain.initial.transpose() * matrix_power(chain.transition, start - 1);
    const Eigen::MatrixXd gap = matrix_power(chain.transition, n);
    const Eigen::MatrixXd& p = chain.transition;

    Eigen::MatrixXd atoms_past(past_atoms, past_len);
    Eigen::VectorXd prob_past(past_atoms);
    std::vector<int> last_state(static_cast<std::size_t>(past_atoms));
    std::vector<int> path(static_cast<std::size_t>(past_len));
    for (long a = 0; a < past_atoms; ++a) {
        decode(a, s, path);
        double prob = law_start[path[0]];
        for (long t = 0; t < past_len; ++t) {
            atoms_past(a, t) = chain.states[path[t]];
            if (t > 0) prob *= p(path[t - 1], path[t]);
        }
        prob_past[a] = prob;
        last_state[static_cast<std::size_t>(a)] = path.back();
    }

    Eigen::MatrixXd atoms_future(future_atoms, future_window);
    Eigen::VectorXd weight_future(future_atoms);
    std::vector<int> first_state(static_cast<std::size_t>(future_atoms));
    path.assign(static_cast<std::size_t>(future_window), 0);
    for (long b = 0; b < future_atoms; ++b) {
        decode(b, s, path);
        double w = 1.0;
        for (int t = 0; t < future_window; ++t) {
            atoms_future(b, t) = chain.states[path[t]];
            if (t > 0) w *= p(path[t - 1], path[t]);
        }
        weight_future[b] = w;
        first_state[static_cast<std::size_t>(b)] = path.front();
    }

    Eigen::MatrixXd pmf(past_atoms, future_atoms);
    for (long a = 0; a < past_atoms; ++a)
        for (long b = 0; b < future_atoms; ++b)
            pmf(a, b) = prob_past[a] * gap(last_state[static_cast<std::size_t>(a)],
                                           first_state[static_cast<std::size_t>(b)]) *
                        weight_future[b];
    return {std::move(atoms_past), std::move(atoms_future), std::move(pmf)};
}

double alpha_window(const MarkovChainSpec& chain, long j, long n, int past_window, int future_window,
                    int max_enumerated) {
    return alpha_exact(block_joint(chain, j, n, past_window, future_window), max_enumerated);
}

AlphaProfile alpha_sequence(const MarkovChainSpec& chain, const std::vector<long>& n_list,
                            const WindowOptions& options) {
    const long j_max = options.j_max > 0 ? options.j_max : options.past_window + 10;
    AlphaProfile profile;
    profile.kind = ProfileKind::ExactWindow;
    for (long n : n_list) {
        double best = 0.0;
        for (long j = 1; j <= j_max; ++j) {
            const auto joint =
                block_joint(chain, j, n, options.past_window, options.future_window, options.max_atoms);
            best = std::max(best, alpha_exact(joint, options.max_enumerated));
        }
        profile.values.push_back({n, best});
    }
    std::ostringstream note;
    note << "lower bound (window-truncated sigma-fields): past_window=" << options.past_window
         << " future_window=" << options.future_window << " j=1.." << j_max;
    profile.note = note.str();
    return profile;
}

double DecayCertificate::at(long n) const {
    if (zero_beyond >= 0 && n > zero_beyond) return 0.0;
    if (!decays || rho == 0.0) return 0.25;
    return std::min(0.25, constant * std::pow(rho, static_cast<double>(n)));
}

AlphaProfile DecayCertificate::profile(const std::vector<long>& n_list) const {
    AlphaProfile out;
    out.kind = ProfileKind::AnalyticBound;
    out.note = "upper bound: " + formula;
    for (long n : n_list) out.values.push_back({n, at(n)});
    return out;
}

DecayCertificate alpha_bound_geometric(const MarkovChainSpec& chain, int max_power) {
    chain.validate();
    DecayCertificate cert;
    Eigen::MatrixXd power = chain.transition;
    for (int k = 1; k <= max_power; ++k) {
        if (k > 1) power = power * chain.transition;
        const Eigen::RowVectorXd column_min = power.colwise().minCoeff();
        if (column_min.maxCoeff() <= 0.0) continue;
        const double eps = std::min(1.0, column_min.sum());
        std::ostringstream f;
        f.precision(17);
        if (eps >= 1.0) {
            // P^k has identical rows: blocks k or more apart are independent.
            cert.zero_beyond = k - 1;
            cert.decays = true;
            cert.rho = 0.0;
            cert.constant = 0.25;
            f << "Doeblin power " << k << " with full mass: alpha(n) = 0 for n >= " << k;
        } else {
            cert.rho = std::pow(1.0 - eps, 1.0 / k);
            cert.constant = 0.25 * std::pow(cert.rho, 1.0 - k);
            cert.decays = true;
            f << "Doeblin power " << k << ", minorization mass " << eps << ": alpha(n) <= min(1/4, "
              << cert.constant << " * " << cert.rho << "^n)";
        }
        cert.formula = f.str();
        return cert;
    }
    cert.formula = "no Doeblin minorization up to power " + std::to_string(max_power) + ": alpha(n) <= 1/4";
    return cert;
}

DecayCertificate alpha_bound_gaussian_ar1(double phi) {
    if (!(std::abs(phi) < 1.0)) throw InvalidInput("ar1 coefficient must satisfy |phi| < 1");
    DecayCertificate cert;
    cert.constant = 1.0;
    cert.rho = std::abs(phi);
    cert.decays = true;
    if (phi == 0.0) cert.zero_beyond = 0;
    std::ostringstream f;
    f.precision(17);
    f << "Gaussian AR(1), alpha(n) <= maximal correlation = " << cert.rho << "^n";
    cert.formula = f.str();
    return cert;
}

DecayCertificate alpha_bound_dependent(long q) {
    if (q < 0) throw InvalidInput("dependence range must be nonnegative");
    DecayCertificate cert;
    cert.zero_beyond = q;
    cert.decays = true;
    cert.rho = 0.0;
    cert.formula = q == 0 ? "independent: alpha(n) = 0"
                          : std::to_string(q) + "-dependent: alpha(n) = 0 for n > " + std::to_string(q);
    return cert;
}

double plugin_alpha(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& z,
                    int bins) {
    if (x.size() != z.size() || x.size() == 0) throw InvalidInput("plugin_alpha needs paired nonempty samples");
    if (bins < 1) throw InvalidInput("plugin_alpha needs at least one bin");
    const Eigen::Index n = x.size();
    auto bin_of = [n, bins](const Eigen::Ref<const Eigen::VectorXd>& v) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&v](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
        std::vector<int> bin(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r)
            bin[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
                static_cast<int>((r * bins) / n);
        return bin;
    };
    const auto bx = bin_of(x);
    const auto bz = bin_of(z);
    Eigen::MatrixXd pmf = Eigen::MatrixXd::Zero(bins, bins);
    for (std::size_t i = 0; i < bx.size(); ++i) pmf(bx[i], bz[i]) += 1.0;
    pmf /= static_cast<double>(n);
    return alpha_exact(FiniteJointDistribution::from_pmf(std::move(pmf)));
}

}  // namespace mixlab
