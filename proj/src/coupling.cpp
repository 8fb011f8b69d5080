#include "mixlab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mixlab/csv.hpp"
#include "mixlab/error.hpp"
#include "mixlab/mixing.hpp"
#include "mixlab/processes.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

// Simplex tableau: rows 0..m-1 constraints, row m reduced costs; last column
// is the right-hand side (objective row holds minus the objective value).
class Tableau {
public:
    Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis, double tol)
        : t_(std::move(t)), basis_(std::move(basis)), tol_(tol) {}

    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::Index rhs() const { return t_.cols() - 1; }
    Eigen::MatrixXd& data() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }

    void pivot(Eigen::Index r, Eigen::Index col) {
        t_.row(r) /= t_(r, col);
        for (Eigen::Index i = 0; i < t_.rows(); ++i)
            if (i != r && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(r);
        basis_[static_cast<std::size_t>(r)] = col;
    }

    // Bland's rule over columns [0, columns).  False when unbounded.
    bool optimize(Eigen::Index columns) {
        for (;;) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < columns; ++j)
                if (t_(rows(), j) < -tol_) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index i = 0; i < rows(); ++i) {
                if (t_(i, enter) <= tol_) continue;
                const double ratio = t_(i, rhs()) / t_(i, enter);
                if (leave < 0 || ratio < best - tol_ ||
                    (ratio <= best + tol_ && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void drop_row(Eigen::Index r) {
        const Eigen::Index n = t_.rows();
        t_.block(r, 0, n - 1 - r, t_.cols()) = t_.block(r + 1, 0, n - 1 - r, t_.cols()).eval();
        t_.conservativeResize(n - 1, Eigen::NoChange);
        basis_.erase(basis_.begin() + r);
    }

private:
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
    double tol_;
};

double distance(const Eigen::MatrixXd& atoms, Eigen::Index i, const Eigen::MatrixXd& other, Eigen::Index j) {
    return (atoms.row(i) - other.row(j)).norm();
}

}  // namespace

LpResult simplex_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                          double pivot_tol) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != m || c.size() != n) throw InvalidInput("simplex_minimize: dimension mismatch");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite()) throw InvalidInput("simplex_minimize: non-finite data");

    // Phase one on [A | I | b] minimizing the sum of artificials.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        t.block(i, 0, 1, n) = sign * a.row(i);
        t(i, n + i) = 1.0;
        t(i, n + m) = sign * b[i];
    }
    for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
    for (Eigen::Index i = 0; i < m; ++i) t(m, n + i) = 0.0;
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    Tableau tab(std::move(t), std::move(basis), pivot_tol);
    tab.optimize(n + m);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    LpResult result;
    if (-tab.data()(tab.rows(), tab.rhs()) > 1e-9 * scale) {
        result.status = LpStatus::Infeasible;
        return result;
    }

    // Drive remaining artificials out of the basis; a row with no usable
    // original column is redundant.
    for (Eigen::Index i = tab.rows() - 1; i >= 0; --i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < n && col < 0; ++j)
            if (std::abs(tab.data()(i, j)) > pivot_tol) col = j;
        if (col >= 0)
            tab.pivot(i, col);
        else
            tab.drop_row(i);
    }

    // Phase two: drop artificial columns and price out the basis.
    Eigen::MatrixXd& d = tab.data();
    const Eigen::Index rows = tab.rows();
    Eigen::MatrixXd t2(rows + 1, n + 1);
    t2.topLeftCorner(rows, n) = d.topLeftCorner(rows, n);
    t2.topRightCorner(rows, 1) = d.block(0, d.cols() - 1, rows, 1);
    t2.block(rows, 0, 1, n) = c.transpose();
    t2(rows, n) = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index bj = tab.basis()[static_cast<std::size_t>(i)];
        t2.row(rows) -= c[bj] * t2.row(i);
    }
    Tableau phase2(std::move(t2), tab.basis(), pivot_tol);
    if (!phase2.optimize(n)) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    result.status = LpStatus::Optimal;
    result.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < phase2.rows(); ++i)
        result.x[phase2.basis()[static_cast<std::size_t>(i)]] = std::max(0.0, phase2.data()(i, phase2.rhs()));
    result.objective = c.dot(result.x);
    return result;
}

void CouplingProblem::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be positive");
    if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in [0, 1)");
    if (net.rows() == 0) throw InvalidInput("net must contain at least one point");
    const Eigen::MatrixXd& atoms = joint.atoms_x();
    if (net.cols() != atoms.cols()) throw InvalidInput("net points and atoms of X differ in dimension");
    const Eigen::VectorXd px = joint.marginal_x();
    double covered = 0.0;
    for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < net.rows(); ++j) nearest = std::min(nearest, distance(atoms, i, net, j));
        if (nearest <= epsilon) covered += px[i];
    }
    if (covered < 1.0 - delta - 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "net covers mass " << covered << " < 1 - delta = " << 1.0 - delta;
        throw InvalidInput(msg.str());
    }
}

CouplingSolution solve_coupling(const CouplingProblem& problem) {
    problem.validate();
    const Eigen::MatrixXd& p = problem.joint.pmf();
    const Eigen::MatrixXd& atoms = problem.joint.atoms_x();
    const Eigen::Index nx = p.rows();
    const Eigen::Index nz = p.cols();
    if (nx * nx * nz > problem.max_variables) {
        std::ostringstream msg;
        msg << "coupling program has " << nx * nx * nz << " variables, limit " << problem.max_variables;
        throw SizeLimitExceeded(msg.str());
    }
    const Eigen::VectorXd px = problem.joint.marginal_x();
    const Eigen::VectorXd pz = problem.joint.marginal_z();

    Eigen::MatrixXd cost(nx, nx);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index k = 0; k < nx; ++k) cost(i, k) = distance(atoms, i, atoms, k) > 2.0 * problem.epsilon ? 1.0 : 0.0;

    // Transportation problem per z: supply p(x, z), demand pZ(z) pX(y).
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * nx, nx * nx);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index k = 0; k < nx; ++k) {
            a(i, i * nx + k) = 1.0;
            a(nx + k, i * nx + k) = 1.0;
        }
    Eigen::VectorXd cvec(nx * nx);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index k = 0; k < nx; ++k) cvec[i * nx + k] = cost(i, k);

    CouplingSolution sol;
    sol.triple.resize(static_cast<std::size_t>(nz));
    for (Eigen::Index z = 0; z < nz; ++z) {
        Eigen::VectorXd b(2 * nx);
        b.head(nx) = p.col(z);
        b.tail(nx) = pz[z] * px;
        const LpResult lp = simplex_minimize(a, b, cvec);
        if (lp.status != LpStatus::Optimal) throw std::logic_error("coupling transportation problem not solved");
        Eigen::MatrixXd plan(nx, nx);
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index k = 0; k < nx; ++k) plan(i, k) = lp.x[i * nx + k];
        sol.triple[static_cast<std::size_t>(z)] = plan;
        sol.objective += plan.cwiseProduct(cost).sum();
        sol.residual_marginal =
            std::max(sol.residual_marginal, (plan.rowwise().sum() - p.col(z)).cwiseAbs().maxCoeff());
        sol.residual_independence =
            std::max(sol.residual_independence, (plan.colwise().sum().transpose() - pz[z] * px).cwiseAbs().maxCoeff());
    }
    sol.alpha = alpha_exact(problem.joint);
    sol.bound = problem.delta + 4.0 * std::sqrt(static_cast<double>(problem.net.rows())) * sol.alpha;
    if (sol.residual_marginal > 1e-9 || sol.residual_independence > 1e-9)
        throw std::logic_error("coupling solution violates its constraints beyond 1e-9");
    if (sol.objective > sol.bound + 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "coupling objective " << sol.objective << " exceeds the bound " << sol.bound;
        throw std::logic_error(msg.str());
    }
    return sol;
}

double product_coupling_objective(const CouplingProblem& problem) {
    const Eigen::MatrixXd& atoms = problem.joint.atoms_x();
    const Eigen::VectorXd px = problem.joint.marginal_x();
    double total = 0.0;
    for (Eigen::Index i = 0; i < atoms.rows(); ++i)
        for (Eigen::Index k = 0; k < atoms.rows(); ++k)
            if (distance(atoms, i, atoms, k) > 2.0 * problem.epsilon) total += px[i] * px[k];
    return total;
}

bool CouplingReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const CouplingRow& r) { return r.pass; });
}

std::string CouplingReport::to_json() const {
    auto out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"case_id", r.case_id},
                       {"objective", r.objective},
                       {"bound", r.bound},
                       {"alpha", r.alpha},
                       {"N", r.net_size},
                       {"delta", r.delta},
                       {"residual_marginal", r.residual_marginal},
                       {"residual_independence", r.residual_independence},
                       {"pass", r.pass}});
    return out.dump(2);
}

CouplingProblem coupling_on_points(const Eigen::VectorXd& points, const Eigen::MatrixXd& pmf, double epsilon,
                                   double delta) {
    if (points.size() != pmf.rows()) throw InvalidInput("one point per row of the pmf is required");
    Eigen::MatrixXd atoms = points;
    Eigen::MatrixXd z_atoms = Eigen::VectorXd::LinSpaced(pmf.cols(), 0.0, static_cast<double>(pmf.cols() - 1));
    CouplingProblem problem{FiniteJointDistribution(atoms, z_atoms, pmf), epsilon, atoms, delta};
    return problem;
}

std::vector<CouplingCase> standard_coupling_cases(std::uint64_t seed, int random_cases) {
    std::vector<CouplingCase> cases;
    const Eigen::Vector2d bits(0.0, 1.0);
    Eigen::Matrix2d pmf;
    pmf << 0.5, 0.0, 0.0, 0.5;
    cases.push_back({"fair-bit-x-equals-z", coupling_on_points(bits, pmf, 0.25)});
    pmf << 0.3, 0.2, 0.2, 0.3;
    cases.push_back({"bits-alpha-0.05", coupling_on_points(bits, pmf, 0.25)});
    pmf << 0.12, 0.28, 0.18, 0.42;
    cases.push_back({"bits-independent", coupling_on_points(bits, pmf, 0.25)});
    pmf << 1.0, 0.0, 0.0, 0.0;
    cases.push_back({"point-mass", coupling_on_points(bits, pmf, 0.25)});

    const Eigen::Vector3d trits(0.0, 1.0, 2.0);
    for (int r = 0; r < random_cases; ++r) {
        Draws draws(seed, derive_stream(0xc0c0, static_cast<std::uint64_t>(r)));
        Eigen::Matrix3d p;
        for (Eigen::Index i = 0; i < 9; ++i) p.data()[i] = draws.exponential(1.0);
        p /= p.sum();
        cases.push_back({"random-3x3-" + std::to_string(r), coupling_on_points(trits, p, 0.25)});
    }
    return cases;
}

CouplingReport verify_coupling_suite(const std::vector<CouplingCase>& cases) {
    CouplingReport report;
    for (const auto& c : cases) {
        const CouplingSolution s = solve_coupling(c.problem);
        CouplingRow row;
        row.case_id = c.id;
        row.objective = s.objective;
        row.bound = s.bound;
        row.alpha = s.alpha;
        row.net_size = static_cast<long>(c.problem.net.rows());
        row.delta = c.problem.delta;
        row.residual_marginal = s.residual_marginal;
        row.residual_independence = s.residual_independence;
        row.pass = s.objective <= s.bound && s.residual_marginal < 1e-9 && s.residual_independence < 1e-9;
        report.rows.push_back(row);
    }
    return report;
}

double normal_ks(double sd1, double sd2) {
    if (!(sd1 > 0.0 && sd2 > 0.0)) throw InvalidInput("normal_ks needs positive sds");
    if (sd1 == sd2) return 0.0;
    const double v1 = sd1 * sd1;
    const double v2 = sd2 * sd2;
    // The densities cross where the cdf gap is largest.
    const double x = std::sqrt(2.0 * std::log(sd2 / sd1) * v1 * v2 / (v2 - v1));
    return std::abs(normal_cdf(x, 0.0, sd1) - normal_cdf(x, 0.0, sd2));
}

bool SumLawReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const SumLawRow& r) { return r.pass; });
}

void SumLawReport::write_csv(std::ostream& out) const {
    out << "case,lag,ks,reference_ks,alpha_bound,pass\n";
    for (const auto& r : rows)
        out << r.case_name << ',' << r.lag << ',' << format_real(r.ks) << ',' << format_real(r.reference_ks) << ','
            << format_real(r.alpha_bound) << ',' << (r.pass ? "true" : "false") << '\n';
}

SumLawReport sum_law_experiment(const SumLawOptions& options) {
    if (options.replications < 1) throw InvalidInput("replications must be positive");
    if (options.block < 1) throw InvalidInput("block length must be positive");
    const long reps = options.replications;
    const CdfFn target = normal_cdf_fn(0.0, std::sqrt(2.0));
    SumLawReport report;

    Eigen::VectorXd sums(reps);
    for (long r = 0; r < reps; ++r) {
        Draws draws(options.seed, derive_stream(0xc011, static_cast<std::uint64_t>(r)));
        const double x = draws.normal();
        const double z = draws.normal();
        sums[r] = x + z;
    }
    const double ks_ind = ks_distance(sums, target);
    report.rows.push_back({"independent", 0, ks_ind, 0.0, 0.0, ks_ind < options.ks_tol});

    const ProcessSpec ar = ProcessSpec::ar1(options.phi);
    const DecayCertificate cert = mixing_certificate(ar);
    const long b = options.block;
    const double var_block = partial_sum_variance(ar, b);
    const double gamma0 = 1.0 / (1.0 - options.phi * options.phi);
    for (long lag : options.lags) {
        if (lag < 0) throw InvalidInput("lags must be nonnegative");
        double cov = 0.0;
        for (long i = 0; i < b; ++i)
            for (long j = 0; j < b; ++j) cov += gamma0 * std::pow(options.phi, static_cast<double>(b + lag + j - i));
        const double reference = normal_ks(std::sqrt(2.0 + 2.0 * cov / var_block), std::sqrt(2.0));
        const auto stream_base = static_cast<std::uint64_t>(lag) << 32;
        for (long r = 0; r < reps; ++r) {
            const SamplePath path =
                generate_path(ar, 2 * b + lag, options.seed, derive_stream(0xc012, stream_base + static_cast<std::uint64_t>(r)));
            const double x = path.values.col(0).head(b).sum();
            const double z = path.values.col(0).tail(b).sum();
            sums[r] = (x + z) / std::sqrt(var_block);
        }
        const double ks = ks_distance(sums, target);
        report.rows.push_back({"ar1-blocks", lag, ks, reference, cert.at(lag + 1), ks <= reference + options.ks_tol});
    }

    for (long r = 0; r < reps; ++r) {
        Draws draws(options.seed, derive_stream(0xc013, static_cast<std::uint64_t>(r)));
        sums[r] = 2.0 * draws.normal();
    }
    const double ks_ctrl = ks_distance(sums, target);
    report.rows.push_back(
        {"x-equals-z", 0, ks_ctrl, normal_ks(2.0, std::sqrt(2.0)), 0.25, ks_ctrl > options.control_margin});
    return report;
}

}  // namespace mixlab
