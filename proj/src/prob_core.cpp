#include "mixlab/prob_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mixlab/error.hpp"

namespace mixlab {

Sample::Sample(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() == 0) throw InvalidInput("sample must be nonempty");
    if (points_.cols() == 0) throw InvalidInput("sample dimension must be at least 1");
}

Sample Sample::scalar(const Eigen::Ref<const Eigen::VectorXd>& values) {
    return Sample(Eigen::MatrixXd(values));
}

Sample Sample::scalar(const std::vector<double>& values) {
    return scalar(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

Eigen::Ref<const Eigen::VectorXd> Sample::values() const {
    if (dim() != 1) throw InvalidInput("operation requires a one-dimensional sample");
    return points_.col(0);
}

void require_symmetric_grid(const Eigen::Ref<const Eigen::VectorXd>& grid) {
    const Eigen::Index n = grid.size();
    if (n == 0) throw InvalidInput("frequency grid is empty");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!(grid[i] > grid[i - 1])) {
            std::ostringstream msg;
            msg << "frequency grid not strictly increasing at t = " << grid[i];
            throw InvalidInput(msg.str());
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = grid[i];
        const double mirror = grid[n - 1 - i];
        if (std::abs(t + mirror) > 1e-12 * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "frequency grid not symmetric about 0: t = " << t << " has no partner -t";
            throw InvalidInput(msg.str());
        }
    }
    if (n % 2 == 0 || grid[n / 2] != 0.0) throw InvalidInput("frequency grid must contain 0");
}

Eigen::VectorXd uniform_grid(double radius, Eigen::Index points) {
    if (!(radius > 0.0)) throw InvalidInput("grid radius must be positive");
    if (points < 3 || points % 2 == 0) throw InvalidInput("grid point count must be odd and >= 3");
    const Eigen::Index half = points / 2;
    const double h = radius / static_cast<double>(half);
    Eigen::VectorXd grid(points);
    for (Eigen::Index k = -half; k <= half; ++k) grid[k + half] = static_cast<double>(k) * h;
    return grid;
}

Complex cf_at(const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    if (t == 0.0) return {1.0, 0.0};
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double arg = t * x[j];
        re += std::cos(arg);
        im += std::sin(arg);
    }
    const auto n = static_cast<double>(x.size());
    return {re / n, im / n};
}

EmpiricalCF empirical_cf(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& grid) {
    const auto x = sample.values();
    require_symmetric_grid(grid);
    const Eigen::Index n = grid.size();
    const Eigen::Index center = n / 2;

    EmpiricalCF cf;
    cf.grid = grid;
    cf.values.resize(n);
    cf.sample_size = x.size();
    cf.values[center] = Complex{1.0, 0.0};
    for (Eigen::Index i = center + 1; i < n; ++i) {
        const Complex v = cf_at(x, grid[i]);
        cf.values[i] = v;
        cf.values[n - 1 - i] = std::conj(v);
    }
    return cf;
}

PsdResult psd_check(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol, double hermitian_tol) {
    if (m.rows() == 0 || m.rows() != m.cols()) throw InvalidInput("psd_check needs a nonempty square matrix");
    if (tol < 0.0) throw InvalidInput("psd tolerance must be nonnegative");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(skew <= hermitian_tol * scale)) {
        std::ostringstream msg;
        msg << "matrix is not Hermitian: max |M - M^H| = " << skew;
        throw InvalidInput(msg.str());
    }
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InvalidInput("eigen decomposition failed");
    const double smallest = solver.eigenvalues().minCoeff();
    return {smallest >= -tol, smallest};
}

Eigen::MatrixXcd difference_matrix(const CharFn& psi, const Eigen::Ref<const Eigen::VectorXd>& grid) {
    const Eigen::Index n = grid.size();
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) m(j, k) = psi(grid[j] - grid[k]);
    return m;
}

double ks_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const CdfFn& cdf) {
    if (x.size() == 0) throw InvalidInput("ks_distance needs a nonempty sample");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double jump = sorted[i];
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == jump) ++j;
        const double below = static_cast<double>(i) / n;  // empirical cdf left limit
        const double at = static_cast<double>(j) / n;     // value at the jump
        const double left = cdf(std::nextafter(jump, -std::numeric_limits<double>::infinity()));
        const double right = cdf(jump);
        worst = std::max({worst, std::abs(below - left), std::abs(at - right)});
        i = j;
    }
    return worst;
}

double ks_distance(const Sample& sample, const CdfFn& cdf) { return ks_distance(sample.values(), cdf); }

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

CdfFn normal_cdf_fn(double mean, double sd) {
    if (!(sd > 0.0)) throw InvalidInput("normal sd must be positive");
    return [mean, sd](double x) { return normal_cdf(x, mean, sd); };
}

FiniteJointDistribution::FiniteJointDistribution(Eigen::MatrixXd atoms_x, Eigen::MatrixXd atoms_z,
                                                 Eigen::MatrixXd pmf)
    : atoms_x_(std::move(atoms_x)), atoms_z_(std::move(atoms_z)), pmf_(std::move(pmf)) {
    if (pmf_.rows() == 0 || pmf_.cols() == 0) throw InvalidInput("joint pmf must be nonempty");
    if (atoms_x_.rows() != pmf_.rows() || atoms_z_.rows() != pmf_.cols())
        throw InvalidInput("atom counts do not match pmf shape");
    if (!pmf_.allFinite() || pmf_.minCoeff() < 0.0) throw InvalidInput("joint pmf has a negative entry");
    const double total = pmf_.sum();
    if (std::abs(total - 1.0) > kSumTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "joint pmf sums to " << total << ", not 1";
        throw InvalidInput(msg.str());
    }
}

FiniteJointDistribution FiniteJointDistribution::from_pmf(Eigen::MatrixXd pmf) {
    Eigen::MatrixXd ax = Eigen::VectorXd::LinSpaced(pmf.rows(), 0.0, static_cast<double>(pmf.rows() - 1));
    Eigen::MatrixXd az = Eigen::VectorXd::LinSpaced(pmf.cols(), 0.0, static_cast<double>(pmf.cols() - 1));
    return {std::move(ax), std::move(az), std::move(pmf)};
}

FiniteJointDistribution FiniteJointDistribution::transposed() const {
    return {atoms_z_, atoms_x_, pmf_.transpose()};
}

double alpha_exact(const FiniteJointDistribution& joint, int max_enumerated) {
    // Rows of `p` are the enumerated side.
    const bool swap = joint.pmf().rows() > joint.pmf().cols();
    const Eigen::MatrixXd p = swap ? Eigen::MatrixXd(joint.pmf().transpose()) : joint.pmf();
    const Eigen::Index k = p.rows();
    if (k > max_enumerated || k > 62) {
        std::ostringstream msg;
        msg << "alpha_exact: " << k << " atoms on the enumerated side exceeds the limit " << max_enumerated;
        throw SizeLimitExceeded(msg.str());
    }
    const Eigen::RowVectorXd other = p.colwise().sum();

    // A and its complement give the same value, so the last atom is never in A.
    // Gray-code walk over subsets of the first k-1 atoms.
    Eigen::RowVectorXd row_mass = Eigen::RowVectorXd::Zero(p.cols());
    double best = 0.0;
    const std::uint64_t count = std::uint64_t{1} << (k - 1);
    std::uint64_t gray = 0;
    for (std::uint64_t step = 1; step < count; ++step) {
        const std::uint64_t next = step ^ (step >> 1);
        const std::uint64_t flipped = next ^ gray;
        const int bit = std::countr_zero(flipped);
        if (next & flipped)
            row_mass += p.row(bit);
        else
            row_mass -= p.row(bit);
        gray = next;

        const double pa = row_mass.sum();
        double pos = 0.0;
        double neg = 0.0;
        for (Eigen::Index z = 0; z < p.cols(); ++z) {
            const double d = row_mass[z] - pa * other[z];
            (d > 0.0 ? pos : neg) += d;
        }
        best = std::max({best, pos, -neg});
    }
    return best;
}

}  // namespace mixlab
