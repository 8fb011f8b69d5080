#include "mixlab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mixlab/csv.hpp"
#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

double innovation_draw(Draws& draws, Innovation kind) {
    return kind == Innovation::Normal ? draws.normal() : draws.rademacher();
}

// P(chi^2_d > x) for integer d >= 1.
double chi_square_survival(int d, double x) {
    if (x <= 0.0) return 1.0;
    const double half = 0.5 * x;
    if (d % 2 == 0) {
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < d / 2; ++k) {
            term *= half / k;
            sum += term;
        }
        return std::exp(-half) * sum;
    }
    double sum = std::erfc(std::sqrt(half));
    double term = std::sqrt(half) / std::tgamma(1.5);  // (x/2)^(1/2) / Gamma(3/2)
    for (int k = 1; k <= (d - 1) / 2; ++k) {
        sum += std::exp(-half) * term;
        term *= half / (k + 0.5);
    }
    return sum;
}

// Marginal sd of one stationary coordinate (normal or Rademacher innovations).
double marginal_sd(const ProcessSpec& spec) {
    switch (spec.family) {
        case Family::Iid: return spec.sigma;
        case Family::Ar1: return spec.sigma / std::sqrt(1.0 - spec.phi * spec.phi);
        case Family::MovingAverage: {
            double s = 0.0;
            for (double w : spec.ma_weights) s += w * w;
            return spec.sigma * std::sqrt(s);
        }
        default: return 0.0;
    }
}

const Eigen::VectorXd& values_of(const ProcessSpec& spec) {
    return spec.state_values.size() > 0 ? spec.state_values : spec.chain.states;
}

Eigen::MatrixXd fundamental_matrix(const MarkovChainSpec& chain, const Eigen::VectorXd& pi) {
    const Eigen::Index s = chain.states.size();
    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(s, s) - chain.transition + Eigen::VectorXd::Ones(s) * pi.transpose();
    return a.inverse();
}

// Tail of |X| for a law with finitely many atoms of |X|, as prefix maxima over time.
class DiscreteTail {
public:
    // laws: P(|X_k| = level_i) for k = 1..K (rows), level_i sorted ascending.
    DiscreteTail(std::vector<double> levels, const Eigen::MatrixXd& laws) : levels_(std::move(levels)) {
        const Eigen::Index k_count = laws.rows();
        const auto l_count = static_cast<Eigen::Index>(levels_.size());
        // survival(k, i) = P(|X_k| >= level_i), then running max over k.
        survival_.resize(k_count, l_count);
        for (Eigen::Index k = 0; k < k_count; ++k) {
            double acc = 0.0;
            for (Eigen::Index i = l_count - 1; i >= 0; --i) {
                acc += laws(k, i);
                survival_(k, i) = std::min(1.0, acc);
            }
            if (k > 0) survival_.row(k) = survival_.row(k).cwiseMax(survival_.row(k - 1));
        }
    }

    double operator()(long n, double threshold) const {
        const auto it = std::lower_bound(levels_.begin(), levels_.end(), threshold);
        if (it == levels_.end()) return 0.0;
        const Eigen::Index k = std::min<Eigen::Index>(n, survival_.rows()) - 1;
        return survival_(std::max<Eigen::Index>(k, 0), static_cast<Eigen::Index>(it - levels_.begin()));
    }

private:
    std::vector<double> levels_;
    Eigen::MatrixXd survival_;
};

// Collapse a list of (|x|, p) atoms into sorted distinct levels.
std::pair<std::vector<double>, Eigen::RowVectorXd> collapse(std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    std::vector<double> levels;
    std::vector<double> probs;
    for (const auto& [x, p] : atoms) {
        if (!levels.empty() && std::abs(levels.back() - x) <= 1e-15 * std::max(1.0, x))
            probs.back() += p;
        else {
            levels.push_back(x);
            probs.push_back(p);
        }
    }
    return {levels, Eigen::Map<Eigen::RowVectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()))};
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::Iid: return "iid";
        case Family::Ar1: return "ar1";
        case Family::MovingAverage: return "ma_q";
        case Family::MarkovFunction: return "markov_function";
        case Family::Constant: return "constant";
    }
    return "unknown";
}

std::string to_string(Innovation innovation) {
    return innovation == Innovation::Normal ? "normal" : "rademacher";
}

Family family_from_string(const std::string& name) {
    for (Family f : {Family::Iid, Family::Ar1, Family::MovingAverage, Family::MarkovFunction, Family::Constant})
        if (to_string(f) == name) return f;
    throw InvalidInput("unknown process family \"" + name + "\"");
}

Innovation innovation_from_string(const std::string& name) {
    if (name == "normal") return Innovation::Normal;
    if (name == "rademacher") return Innovation::Rademacher;
    throw InvalidInput("unknown innovation law \"" + name + "\"");
}

void ProcessSpec::validate() const {
    if (dim < 1) throw InvalidInput("process dimension must be at least 1");
    if (!std::isfinite(mean) || !std::isfinite(constant)) throw InvalidInput("process level must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("innovation scale must be nonnegative");
    switch (family) {
        case Family::Ar1:
            if (!(std::abs(phi) < 1.0)) throw InvalidInput("ar1 requires |phi| < 1");
            break;
        case Family::MovingAverage:
            if (ma_weights.empty()) throw InvalidInput("ma_q requires at least one weight");
            if (ma_weights.size() > 64) throw InvalidInput("ma_q supports at most 64 weights");
            for (double w : ma_weights)
                if (!std::isfinite(w)) throw InvalidInput("ma_q weights must be finite");
            break;
        case Family::MarkovFunction:
            if (dim != 1) throw InvalidInput("markov_function supports dimension 1 only");
            chain.validate();
            if (state_values.size() != 0 && state_values.size() != chain.states.size())
                throw InvalidInput("state_values size does not match the chain");
            break;
        default: break;
    }
}

std::string ProcessSpec::describe() const {
    std::ostringstream s;
    s.precision(17);
    s << "family=" << to_string(family) << ";dim=" << dim;
    switch (family) {
        case Family::Iid:
            s << ";mean=" << mean << ";sigma=" << sigma << ";innovation=" << to_string(innovation);
            break;
        case Family::Ar1:
            s << ";mean=" << mean << ";sigma=" << sigma << ";phi=" << phi << ";innovation=" << to_string(innovation);
            break;
        case Family::MovingAverage:
            s << ";mean=" << mean << ";sigma=" << sigma << ";innovation=" << to_string(innovation) << ";weights=";
            for (double w : ma_weights) s << w << ',';
            break;
        case Family::MarkovFunction:
            s << ";values=";
            for (double v : values_of(*this)) s << v << ',';
            s << ";transition=";
            for (Eigen::Index i = 0; i < chain.transition.size(); ++i) s << chain.transition.data()[i] << ',';
            s << ";initial=";
            for (double v : chain.initial) s << v << ',';
            break;
        case Family::Constant: s << ";constant=" << constant; break;
    }
    return s.str();
}

std::uint64_t ProcessSpec::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : describe()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

ProcessSpec ProcessSpec::iid_normal(double sigma, double mean) {
    ProcessSpec spec;
    spec.family = Family::Iid;
    spec.sigma = sigma;
    spec.mean = mean;
    return spec;
}

ProcessSpec ProcessSpec::ar1(double phi, double sigma) {
    ProcessSpec spec;
    spec.family = Family::Ar1;
    spec.phi = phi;
    spec.sigma = sigma;
    spec.validate();
    return spec;
}

ProcessSpec ProcessSpec::moving_average(std::vector<double> weights, double sigma) {
    ProcessSpec spec;
    spec.family = Family::MovingAverage;
    spec.ma_weights = std::move(weights);
    spec.sigma = sigma;
    spec.validate();
    return spec;
}

ProcessSpec ProcessSpec::markov_function(MarkovChainSpec chain, Eigen::VectorXd values) {
    ProcessSpec spec;
    spec.family = Family::MarkovFunction;
    spec.chain = std::move(chain);
    spec.state_values = std::move(values);
    spec.validate();
    return spec;
}

ProcessSpec ProcessSpec::constant_value(double value) {
    ProcessSpec spec;
    spec.family = Family::Constant;
    spec.constant = value;
    return spec;
}

SamplePath generate_path(const ProcessSpec& spec, long length, std::uint64_t seed, std::uint64_t stream) {
    spec.validate();
    if (length < 1) throw InvalidInput("path length must be positive");
    SamplePath path;
    path.spec_hash = spec.hash();
    path.seed = seed;
    path.stream = stream;
    path.values.resize(length, spec.dim);
    Draws draws(seed, stream);

    switch (spec.family) {
        case Family::Iid:
            for (long k = 0; k < length; ++k)
                for (int c = 0; c < spec.dim; ++c)
                    path.values(k, c) = spec.mean + spec.sigma * innovation_draw(draws, spec.innovation);
            break;
        case Family::Ar1: {
            Eigen::VectorXd y(spec.dim);
            for (int c = 0; c < spec.dim; ++c) {
                if (spec.innovation == Innovation::Normal) {
                    y[c] = spec.sigma / std::sqrt(1.0 - spec.phi * spec.phi) * draws.normal();
                } else {
                    // sum_{i >= 0} phi^i e_{-i}, truncated once |phi|^i < 1e-17.
                    double acc = 0.0;
                    double weight = 1.0;
                    while (std::abs(weight) >= 1e-17) {
                        acc += weight * draws.rademacher();
                        weight *= spec.phi;
                    }
                    y[c] = spec.sigma * acc;
                }
            }
            for (long k = 0; k < length; ++k) {
                for (int c = 0; c < spec.dim; ++c) {
                    if (k > 0) y[c] = spec.phi * y[c] + spec.sigma * innovation_draw(draws, spec.innovation);
                    path.values(k, c) = spec.mean + y[c];
                }
            }
            break;
        }
        case Family::MovingAverage: {
            const auto taps = static_cast<long>(spec.ma_weights.size());
            // ring[c][(t mod taps)] holds e_t.
            Eigen::MatrixXd ring(spec.dim, taps);
            for (long t = 1 - taps + 1; t <= 0; ++t)
                for (int c = 0; c < spec.dim; ++c)
                    ring(c, ((t % taps) + taps) % taps) = innovation_draw(draws, spec.innovation);
            for (long k = 1; k <= length; ++k) {
                for (int c = 0; c < spec.dim; ++c) {
                    ring(c, k % taps) = innovation_draw(draws, spec.innovation);
                    double x = 0.0;
                    for (long i = 0; i < taps; ++i)
                        x += spec.ma_weights[static_cast<std::size_t>(i)] * ring(c, ((k - i) % taps + taps) % taps);
                    path.values(k - 1, c) = spec.mean + spec.sigma * x;
                }
            }
            break;
        }
        case Family::MarkovFunction: {
            const auto& chain = spec.chain;
            const auto& values = values_of(spec);
            const Eigen::Index s = chain.states.size();
            std::vector<double> initial_cdf(static_cast<std::size_t>(s));
            std::vector<std::vector<double>> row_cdf(static_cast<std::size_t>(s),
                                                     std::vector<double>(static_cast<std::size_t>(s)));
            double acc = 0.0;
            for (Eigen::Index i = 0; i < s; ++i) initial_cdf[static_cast<std::size_t>(i)] = acc += chain.initial[i];
            for (Eigen::Index r = 0; r < s; ++r) {
                acc = 0.0;
                for (Eigen::Index i = 0; i < s; ++i)
                    row_cdf[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] = acc += chain.transition(r, i);
            }
            std::size_t state = draws.categorical(initial_cdf);
            for (long k = 0; k < length; ++k) {
                if (k > 0) state = draws.categorical(row_cdf[state]);
                path.values(k, 0) = values[static_cast<Eigen::Index>(state)];
            }
            break;
        }
        case Family::Constant: path.values.setConstant(spec.constant); break;
    }
    return path;
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
    out << "index";
    if (path.values.cols() == 1)
        out << ",value";
    else
        for (Eigen::Index c = 0; c < path.values.cols(); ++c) out << ",value_" << (c + 1);
    out << '\n';
    for (Eigen::Index k = 0; k < path.values.rows(); ++k) {
        out << (k + 1);
        for (Eigen::Index c = 0; c < path.values.cols(); ++c) out << ',' << format_real(path.values(k, c));
        out << '\n';
    }
}

double long_run_variance(const ProcessSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::Iid: return spec.sigma * spec.sigma;
        case Family::Ar1: return spec.sigma * spec.sigma / ((1.0 - spec.phi) * (1.0 - spec.phi));
        case Family::MovingAverage: {
            double total = 0.0;
            for (double w : spec.ma_weights) total += w;
            return spec.sigma * spec.sigma * total * total;
        }
        case Family::MarkovFunction: {
            const Eigen::VectorXd pi = stationary_distribution(spec.chain);
            const Eigen::VectorXd& f = values_of(spec);
            const Eigen::VectorXd centered = f.array() - pi.dot(f);
            const Eigen::VectorXd zf = fundamental_matrix(spec.chain, pi) * centered;
            const Eigen::VectorXd weighted = pi.cwiseProduct(centered);
            return std::max(0.0, 2.0 * weighted.dot(zf) - weighted.dot(centered));
        }
        case Family::Constant: return 0.0;
    }
    return 0.0;
}

Eigen::VectorXd expected_partial_sum(const ProcessSpec& spec, long n) {
    spec.validate();
    const auto count = static_cast<double>(n);
    switch (spec.family) {
        case Family::Constant: return Eigen::VectorXd::Constant(spec.dim, count * spec.constant);
        case Family::MarkovFunction: {
            // E S_n = n pi f + (nu - pi)(I - P^n) Z f
            const Eigen::VectorXd pi = stationary_distribution(spec.chain);
            const Eigen::VectorXd& f = values_of(spec);
            const Eigen::Index s = f.size();
            Eigen::MatrixXd pn = Eigen::MatrixXd::Identity(s, s);
            Eigen::MatrixXd base = spec.chain.transition;
            for (long e = n; e > 0; e >>= 1) {
                if (e & 1) pn = pn * base;
                base = base * base;
            }
            const Eigen::VectorXd zf = fundamental_matrix(spec.chain, pi) * f;
            const double transient = (spec.chain.initial - pi).dot((Eigen::MatrixXd::Identity(s, s) - pn) * zf);
            return Eigen::VectorXd::Constant(1, count * pi.dot(f) + transient);
        }
        default: return Eigen::VectorXd::Constant(spec.dim, count * spec.mean);
    }
}

NormingSequences norming_for(const ProcessSpec& spec) {
    const double v = long_run_variance(spec);
    if (!(v > 1e-14)) {
        std::ostringstream msg;
        msg << "degenerate process (" << to_string(spec.family) << "): long-run variance " << v
            << " gives no non-degenerate limit";
        throw DegenerateModel(msg.str());
    }
    NormingSequences norming;
    norming.long_run_variance = v;
    norming.a = [v](long n) { return 1.0 / std::sqrt(static_cast<double>(n) * v); };
    std::ostringstream provenance;
    provenance.precision(17);
    provenance << "a(n) = 1/sqrt(n v), v = " << v;
    switch (spec.family) {
        case Family::Iid: provenance << " = sigma^2"; break;
        case Family::Ar1: provenance << " = sigma^2/(1-phi)^2"; break;
        case Family::MovingAverage: provenance << " = sigma^2 (sum w)^2"; break;
        case Family::MarkovFunction: provenance << " = 2<f,Zf>_pi - <f,f>_pi (centered f)"; break;
        case Family::Constant: break;
    }
    if (spec.family == Family::MarkovFunction) {
        norming.b = [spec, v](long n) -> Eigen::VectorXd {
            return -expected_partial_sum(spec, n) / std::sqrt(static_cast<double>(n) * v);
        };
        provenance << "; b(n) = -a(n) E[S_n] with the exact transient term";
    } else {
        const double mean = spec.mean;
        const int dim = spec.dim;
        norming.b = [mean, dim, v](long n) -> Eigen::VectorXd {
            const auto count = static_cast<double>(n);
            return Eigen::VectorXd::Constant(dim, -count * mean / std::sqrt(count * v));
        };
        provenance << "; b(n) = -a(n) n mean";
    }
    norming.provenance = provenance.str();
    return norming;
}

NormingReport validate_norming(const NormingSequences& norming, long n_max, const NormingTolerances& tol) {
    if (n_max < 10) throw InvalidInput("validate_norming needs n_max >= 10");
    NormingReport r;
    r.n_max = n_max;
    r.a_first = norming.a(1);
    r.a_tail = norming.a(n_max);
    const double a_prev = norming.a(n_max - 1);
    r.ratio_tail = r.a_tail / a_prev;
    r.drift_tail = (norming.b(n_max) - norming.b(n_max - 1) * r.ratio_tail).norm();
    r.a_vanishes = r.a_tail < tol.a_fraction * r.a_first;
    r.ratio_to_one = std::abs(r.ratio_tail - 1.0) < tol.ratio;
    r.drift_to_zero = r.drift_tail < tol.drift;
    r.pass = r.a_vanishes && r.ratio_to_one && r.drift_to_zero;
    return r;
}

TailFn marginal_tail(const ProcessSpec& spec, const NormingSequences& norming, long mc_draws,
                     std::uint64_t seed) {
    spec.validate();
    auto a = norming.a;
    const int d = spec.dim;

    if (spec.family == Family::Constant) {
        const double level = std::abs(spec.constant) * std::sqrt(static_cast<double>(d));
        return [a, level](long n, double delta) { return a(n) * level >= delta ? 1.0 : 0.0; };
    }

    const bool gaussian = spec.innovation == Innovation::Normal && spec.family != Family::MarkovFunction;
    if (gaussian) {
        const double sd = marginal_sd(spec);
        const double mean = spec.mean;
        if (d > 1 && mean != 0.0) throw InvalidInput("closed-form tail for dim > 1 needs zero mean");
        if (sd == 0.0) {
            const double level = std::abs(mean);
            return [a, level](long n, double delta) { return a(n) * level >= delta ? 1.0 : 0.0; };
        }
        if (d == 1)
            return [a, sd, mean](long n, double delta) {
                const double x = delta / a(n);
                return normal_cdf(-x, mean, sd) + (1.0 - normal_cdf(x, mean, sd));
            };
        return [a, sd, d](long n, double delta) {
            const double x = delta / (a(n) * sd);
            return chi_square_survival(d, x * x);
        };
    }

    if (spec.family == Family::MarkovFunction) {
        const Eigen::VectorXd& f = values_of(spec);
        const Eigen::VectorXd pi = stationary_distribution(spec.chain);
        std::vector<std::pair<double, double>> atoms;
        for (Eigen::Index i = 0; i < f.size(); ++i) atoms.emplace_back(std::abs(f[i]), 0.0);
        auto [levels, unused] = collapse(atoms);
        // Time-marginal laws until they settle at pi.
        std::vector<Eigen::RowVectorXd> laws;
        Eigen::RowVectorXd law = spec.chain.initial.transpose();
        for (int k = 0; k < 10000; ++k) {
            laws.push_back(law);
            if ((law - pi.transpose()).cwiseAbs().sum() < 1e-15) break;
            law = law * spec.chain.transition;
        }
        Eigen::MatrixXd level_laws = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(laws.size()),
                                                           static_cast<Eigen::Index>(levels.size()));
        for (std::size_t k = 0; k < laws.size(); ++k)
            for (Eigen::Index i = 0; i < f.size(); ++i) {
                const auto it = std::lower_bound(levels.begin(), levels.end(), std::abs(f[i]) * (1.0 - 1e-15));
                level_laws(static_cast<Eigen::Index>(k), it - levels.begin()) += laws[k][i];
            }
        auto table = std::make_shared<DiscreteTail>(levels, level_laws);
        return [a, table](long n, double delta) { return (*table)(n, delta / a(n)); };
    }

    if (d == 1 && (spec.family == Family::Iid || spec.family == Family::MovingAverage)) {
        // Rademacher innovations: exact enumeration of the marginal law.
        const std::vector<double> w =
            spec.family == Family::Iid ? std::vector<double>{1.0} : spec.ma_weights;
        if (w.size() > 20) throw SizeLimitExceeded("exact tail enumeration limited to 20 weights");
        std::vector<std::pair<double, double>> atoms;
        const std::uint64_t count = std::uint64_t{1} << w.size();
        const double p = 1.0 / static_cast<double>(count);
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            double x = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) x += ((mask >> i) & 1 ? 1.0 : -1.0) * w[i];
            atoms.emplace_back(std::abs(spec.mean + spec.sigma * x), p);
        }
        auto [levels, probs] = collapse(std::move(atoms));
        auto table = std::make_shared<DiscreteTail>(levels, Eigen::MatrixXd(probs));
        return [a, table](long n, double delta) { return (*table)(n, delta / a(n)); };
    }

    // Monte Carlo: empirical survival of |X_1| from stationary draws.
    if (mc_draws < 1) throw InvalidInput("Monte Carlo tail needs at least one draw");
    auto norms = std::make_shared<std::vector<double>>();
    norms->reserve(static_cast<std::size_t>(mc_draws));
    for (long r = 0; r < mc_draws; ++r) {
        const SamplePath one = generate_path(spec, 1, seed, derive_stream(0xfff0, static_cast<std::uint64_t>(r)));
        norms->push_back(one.values.row(0).norm());
    }
    std::sort(norms->begin(), norms->end());
    return [a, norms](long n, double delta) {
        const double x = delta / a(n);
        const auto it = std::lower_bound(norms->begin(), norms->end(), x);
        return static_cast<double>(norms->end() - it) / static_cast<double>(norms->size());
    };
}

DecayCertificate mixing_certificate(const ProcessSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::Iid:
        case Family::Constant: return alpha_bound_dependent(0);
        case Family::MovingAverage: return alpha_bound_dependent(static_cast<long>(spec.ma_weights.size()) - 1);
        case Family::Ar1:
            if (spec.innovation == Innovation::Normal) return alpha_bound_gaussian_ar1(spec.phi);
            {
                // Discrete innovations: phi = 1/2 with +-1 steps is the classic
                // non-mixing autoregression, so only the trivial bound is given.
                DecayCertificate cert;
                cert.formula = "ar1 with Rademacher innovations: no mixing certificate, alpha(n) <= 1/4";
                return cert;
            }
        case Family::MarkovFunction: {
            DecayCertificate cert = alpha_bound_geometric(spec.chain);
            cert.formula = "function of chain, " + cert.formula;
            return cert;
        }
    }
    return {};
}

double partial_sum_variance(const ProcessSpec& spec, long n) {
    spec.validate();
    if (n < 1) throw InvalidInput("partial_sum_variance needs n >= 1");
    const double s2 = spec.sigma * spec.sigma;
    switch (spec.family) {
        case Family::Iid: return static_cast<double>(n) * s2;
        case Family::Constant: return 0.0;
        case Family::Ar1: {
            // sum_{|h|<n} (n - |h|) gamma(h), gamma(h) = s2 phi^|h| / (1 - phi^2)
            const double gamma0 = s2 / (1.0 - spec.phi * spec.phi);
            double total = static_cast<double>(n) * gamma0;
            double ph = 1.0;
            for (long h = 1; h < n; ++h) {
                ph *= spec.phi;
                if (std::abs(ph) < 1e-300) break;
                total += 2.0 * static_cast<double>(n - h) * gamma0 * ph;
            }
            return total;
        }
        case Family::MovingAverage: {
            const auto& w = spec.ma_weights;
            const auto taps = static_cast<long>(w.size());
            double total = 0.0;
            for (long h = -(taps - 1); h <= taps - 1; ++h) {
                if (std::abs(h) >= n) continue;
                double g = 0.0;
                for (long i = 0; i + std::abs(h) < taps; ++i)
                    g += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i + std::abs(h))];
                total += static_cast<double>(n - std::abs(h)) * s2 * g;
            }
            return total;
        }
        case Family::MarkovFunction: throw InvalidInput("partial_sum_variance: markov_function not supported");
    }
    return 0.0;
}

}  // namespace mixlab
