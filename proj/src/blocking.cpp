#include "mixlab/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "mixlab/csv.hpp"
#include "mixlab/error.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/selfdecomp.hpp"

namespace mixlab {

namespace {

long scan_m(const std::vector<double>& a, double c, long n) {
    const double an = a[static_cast<std::size_t>(n)];
    for (long k = n - 1; k >= 1; --k)
        if (an / a[static_cast<std::size_t>(k)] <= c) return k;
    return 1;
}

std::vector<double> norm_values(const NormFn& a, long horizon) {
    std::vector<double> values(static_cast<std::size_t>(horizon + 1), 0.0);
    for (long k = 1; k <= horizon; ++k) {
        const double v = a(k);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream msg;
            msg << "norming a(" << k << ") = " << v << " is not positive";
            throw InvalidInput(msg.str());
        }
        values[static_cast<std::size_t>(k)] = v;
    }
    return values;
}

double quantile(std::vector<double> x, double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(x.size()))) - 1;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end());
    return x[k];
}

}  // namespace

long compute_m(const NormFn& a, double c, long n) {
    if (n < 2) throw InvalidInput("compute_m needs n >= 2");
    if (!(c > 0.0 && c < 1.0)) throw InvalidInput("c must lie in (0, 1)");
    return scan_m(norm_values(a, n), c, n);
}

std::vector<double> compute_deltas(const TailFn& tail, long horizon, double grid_step) {
    if (horizon < 1) throw InvalidInput("horizon must be positive");
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InvalidInput("grid_step must lie in (0, 1]");
    const auto steps = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
    std::vector<double> deltas(static_cast<std::size_t>(horizon));
    for (long n = 1; n <= horizon; ++n) {
        bool found = false;
        for (long k = 1; k <= steps && !found; ++k) {
            const double delta = k == steps ? 1.0 : static_cast<double>(k) * grid_step;
            if (tail(n, delta) <= delta) {
                deltas[static_cast<std::size_t>(n - 1)] = delta;
                found = true;
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "no delta on the grid satisfies tail(n, delta) <= delta at n = " << n
                << " (array not infinitesimal)";
            throw InvalidInput(msg.str());
        }
    }
    for (long i = horizon - 2; i >= 0; --i) {
        auto& d = deltas[static_cast<std::size_t>(i)];
        d = std::max(d, deltas[static_cast<std::size_t>(i + 1)]);
    }
    return deltas;
}

long compute_q(double delta, long m, long n) {
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
    const auto cap = static_cast<long>(std::floor(1.0 / std::sqrt(delta) + 1e-9));
    return std::max(1L, std::min(cap, n - m - 1));
}

BlockingPlan make_plan(const NormFn& a, const TailFn& tail, double c, long horizon, double grid_step) {
    if (horizon < 2) throw InvalidInput("plan horizon must be at least 2");
    if (!(c > 0.0 && c < 1.0)) throw InvalidInput("c must lie in (0, 1)");
    const std::vector<double> av = norm_values(a, horizon);
    const std::vector<double> deltas = compute_deltas(tail, horizon, grid_step);

    BlockingPlan plan;
    plan.c = c;
    plan.horizon = horizon;
    plan.grid_step = grid_step;
    const auto size = static_cast<std::size_t>(horizon + 1);
    plan.m.assign(size, 0);
    plan.q.assign(size, 0);
    plan.delta.assign(size, 0.0);
    plan.ratio.assign(size, 0.0);
    plan.delta[1] = deltas[0];
    for (long n = horizon; n >= 2; --n) {
        const auto i = static_cast<std::size_t>(n);
        plan.m[i] = scan_m(av, c, n);
        plan.delta[i] = deltas[i - 1];
        plan.q[i] = compute_q(plan.delta[i], plan.m[i], n);
        plan.ratio[i] = av[i] / av[static_cast<std::size_t>(plan.m[i])];
    }
    // threshold is the start of the final run of n with m + q < n.
    plan.threshold = 2;
    for (long n = 2; n <= horizon; ++n) {
        const auto i = static_cast<std::size_t>(n);
        if (plan.m[i] + plan.q[i] >= n) plan.threshold = n + 1;
    }
    return plan;
}

BlockTriple decompose_at(const Eigen::Ref<const Eigen::MatrixXd>& values, const NormingSequences& norming, long n,
                         long m, long q) {
    if (m < 1 || q < 0 || m + q > n) throw InvalidInput("block lengths must satisfy 1 <= m and m + q <= n");
    if (n > values.rows()) throw InvalidInput("path shorter than n");
    const Eigen::VectorXd s_m = values.topRows(m).colwise().sum().transpose();
    const Eigen::VectorXd s_mq = s_m + values.middleRows(m, q).colwise().sum().transpose();
    const Eigen::VectorXd s_n = s_mq + values.middleRows(m + q, n - m - q).colwise().sum().transpose();
    const double an = norming.a(n);
    const double am = norming.a(m);
    const Eigen::VectorXd bn = norming.b(n);
    const Eigen::VectorXd bm = norming.b(m);

    BlockTriple t;
    t.n = n;
    t.u = (an / am) * (am * s_m + bm);
    t.v = an * (s_mq - s_m);
    t.w = an * (s_n - s_mq) + bn - (an / am) * bm;
    t.total = an * s_n + bn;
    t.identity_error = (t.u + t.v + t.w - t.total).norm() / std::max(1.0, t.total.norm());
    return t;
}

BlockTriple decompose(const SamplePath& path, const NormingSequences& norming, const BlockingPlan& plan, long n) {
    if (plan.pre_asymptotic(n)) {
        std::ostringstream msg;
        msg << "n = " << n << " is outside the plan range [" << plan.threshold << ", " << plan.horizon << "]";
        throw InvalidInput(msg.str());
    }
    const auto i = static_cast<std::size_t>(n);
    return decompose_at(path.values, norming, n, plan.m[i], plan.q[i]);
}

bool BlockingReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const BlockingRow& r) { return r.pass; });
}

const BlockingRow& BlockingReport::row(long n, const std::string& metric) const {
    for (const auto& r : rows)
        if (r.n == n && r.metric == metric) return r;
    throw InvalidInput("no report row for metric " + metric + " at n = " + std::to_string(n));
}

void BlockingReport::write_csv(std::ostream& out) const {
    out << "n,m_n,q_n,delta_n,ratio,metric_name,value,analytic_ceiling,pass\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.m << ',' << r.q << ',' << format_real(r.delta) << ',' << format_real(r.ratio) << ','
            << r.metric << ',' << format_real(r.value) << ',' << format_real(r.ceiling) << ','
            << (r.pass ? "true" : "false") << '\n';
}

BlockingReport verify_blocking(const ProcessSpec& spec, const BlockingOptions& options) {
    spec.validate();
    if (spec.dim != 1) throw InvalidInput("verify_blocking supports scalar processes only");
    if (options.n_grid.empty()) throw InvalidInput("n_grid is empty");
    for (std::size_t i = 1; i < options.n_grid.size(); ++i)
        if (options.n_grid[i] <= options.n_grid[i - 1]) throw InvalidInput("n_grid must be increasing");
    if (options.replications < 10) throw InvalidInput("verify_blocking needs at least 10 replications");
    if (!(options.epsilon > 0.0)) throw InvalidInput("epsilon must be positive");

    const NormingSequences norming = norming_for(spec);
    const TailFn tail = marginal_tail(spec, norming);
    const long horizon = options.n_grid.back();
    BlockingReport report;
    report.plan = make_plan(norming.a, tail, options.c, horizon, options.grid_step);
    report.norming_provenance = norming.provenance;
    const BlockingPlan& plan = report.plan;
    for (long n : options.n_grid)
        if (plan.pre_asymptotic(n)) {
            std::ostringstream msg;
            msg << "n = " << n << " is pre-asymptotic (threshold " << plan.threshold << ")";
            throw InvalidInput(msg.str());
        }

    const long reps = options.replications;
    const auto grid_count = static_cast<Eigen::Index>(options.n_grid.size());
    Eigen::MatrixXd u(reps, grid_count), v(reps, grid_count), w(reps, grid_count), total(reps, grid_count),
        err(reps, grid_count);
    parallel_for(reps, options.threads, [&](long r) {
        const SamplePath path = generate_path(spec, horizon, options.seed, derive_stream(0xb10c, static_cast<std::uint64_t>(r)));
        for (Eigen::Index g = 0; g < grid_count; ++g) {
            const BlockTriple t = decompose(path, norming, plan, options.n_grid[static_cast<std::size_t>(g)]);
            u(r, g) = t.u[0];
            v(r, g) = t.v[0];
            w(r, g) = t.w[0];
            total(r, g) = t.total[0];
            err(r, g) = t.identity_error;
        }
    });

    const DecayCertificate cert = mixing_certificate(spec);
    const auto rd = static_cast<double>(reps);
    const Eigen::VectorXd cf_grid = uniform_grid(options.cf_radius, 41);
    SelfdecompOptions sd_options = SelfdecompOptions::empirical();
    sd_options.c_values = options.selfdecomp_c;
    const CdfFn std_normal = normal_cdf_fn(0.0, 1.0);

    for (Eigen::Index g = 0; g < grid_count; ++g) {
        const long n = options.n_grid[static_cast<std::size_t>(g)];
        const auto i = static_cast<std::size_t>(n);
        auto add = [&](const std::string& metric, double value, double ceiling, bool pass) {
            report.rows.push_back({n, plan.m[i], plan.q[i], plan.delta[i], plan.ratio[i], metric, value, ceiling, pass});
        };

        const double ratio_next = plan.m[i] + 1 < n ? norming.a(n) / norming.a(plan.m[i] + 1) : 0.0;
        const bool sandwich = plan.ratio[i] <= options.c && (plan.m[i] + 1 >= n || ratio_next > options.c);
        add("ratio-sandwich", plan.ratio[i], options.c, sandwich);

        const double tail_value = tail(n, plan.delta[i]);
        add("delta-inequality", tail_value, plan.delta[i], tail_value <= plan.delta[i]);

        const double max_err = err.col(g).maxCoeff();
        add("block-identity", max_err, 1e-9, max_err <= 1e-9);

        const double p_v = (v.col(g).array().abs() > options.epsilon).cast<double>().mean();
        const double ceiling_v = std::min(1.0, static_cast<double>(plan.q[i]) * plan.delta[i]);
        const double se_v = std::sqrt(p_v * (1.0 - p_v) / rd);
        // The ceiling is only implied by the tail bound once q delta < eps.
        const bool premise = static_cast<double>(plan.q[i]) * plan.delta[i] < options.epsilon;
        const bool within = p_v <= ceiling_v + 3.0 * se_v;
        if (premise || options.assert_separator_always)
            add("separator-vanishes", p_v, ceiling_v, within);
        else
            add("separator-vanishes-unasserted", p_v, ceiling_v, true);

        const double ks_u = ks_distance(u.col(g), normal_cdf_fn(0.0, options.c));
        add("lead-block-law", ks_u, options.ks_tol, ks_u <= options.ks_tol);

        const Eigen::VectorXd abs_w = w.col(g).cwiseAbs();
        const double q99 = quantile(std::vector<double>(abs_w.begin(), abs_w.end()), 0.99);
        add("trail-block-tightness", q99, options.tightness_bound, q99 <= options.tightness_bound);

        const double alpha_sep = cert.at(plan.q[i] + 1);
        add("alpha-at-separation", alpha_sep, 0.25, alpha_sep <= 0.25);

        // Sampling sd of a 2x2 cell frequency is about 0.433/sqrt(R).
        const double alpha_uw = plugin_alpha(u.col(g), w.col(g), 2);
        const double ceiling_uw = alpha_sep + 3.0 * 0.433 / std::sqrt(rd);
        add("outer-block-dependence", alpha_uw, ceiling_uw, alpha_uw <= ceiling_uw);

        const Eigen::VectorXd uw = u.col(g) + w.col(g);
        const double ks_uw = ks_distance(uw, std_normal);
        add("outer-sum-law", ks_uw, options.ks_tol, ks_uw <= options.ks_tol);

        const double ks_total = ks_distance(total.col(g), std_normal);
        add("normalized-sum-law", ks_total, options.ks_tol, ks_total <= options.ks_tol);

        double cf_err = 0.0;
        for (Eigen::Index k = cf_grid.size() / 2 + 1; k < cf_grid.size(); ++k) {
            const double t = cf_grid[k];
            const Complex lhs = cf_at(total.col(g), t);
            const Complex rhs = cf_at(u.col(g), t) * cf_at(w.col(g), t);
            cf_err = std::max(cf_err, std::abs(lhs - rhs));
        }
        const double cf_tol = 5.0 / std::sqrt(rd);
        add("cf-factorization", cf_err, cf_tol, cf_err <= cf_tol);

        const SelfdecompReport sd = selfdecomp_test(Sample::scalar(total.col(g)), sd_options);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c_row : sd.per_c)
            worst = std::isnan(c_row.worst_violation) ? c_row.worst_violation : std::min(worst, c_row.worst_violation);
        add("selfdecomposability", worst, -sd_options.tol, sd.verdict == Verdict::Pass);

        if (spec.family == Family::Iid) {
            const double ks_w = ks_distance(w.col(g), normal_cdf_fn(0.0, std::sqrt(1.0 - options.c * options.c)));
            add("trail-block-law", ks_w, options.ks_tol, ks_w <= options.ks_tol);
        }
    }
    return report;
}

}  // namespace mixlab
