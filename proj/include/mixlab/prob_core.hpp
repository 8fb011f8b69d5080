#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace mixlab {

using Complex = std::complex<double>;
using CharFn = std::function<Complex(double)>;
using CdfFn = std::function<double(double)>;

/// A finite set of points in R^d, one per row.
class Sample {
public:
    explicit Sample(Eigen::MatrixXd points);

    static Sample scalar(const Eigen::Ref<const Eigen::VectorXd>& values);
    static Sample scalar(const std::vector<double>& values);

    Eigen::Index size() const noexcept { return points_.rows(); }
    Eigen::Index dim() const noexcept { return points_.cols(); }
    const Eigen::MatrixXd& points() const noexcept { return points_; }

    /// Column view of a one-dimensional sample; throws unless dim() == 1.
    Eigen::Ref<const Eigen::VectorXd> values() const;

private:
    Eigen::MatrixXd points_;
};

/// Empirical characteristic function on a grid symmetric about zero.
struct EmpiricalCF {
    Eigen::VectorXd grid;
    Eigen::VectorXcd values;
    Eigen::Index sample_size = 0;
};

/// Throws InvalidInput unless `grid` is strictly increasing, contains 0 and
/// satisfies grid[i] == -grid[n-1-i] (relative tolerance 1e-12).
void require_symmetric_grid(const Eigen::Ref<const Eigen::VectorXd>& grid);

/// Uniform grid of `points` frequencies on [-radius, radius]; `points` must be odd.
Eigen::VectorXd uniform_grid(double radius, Eigen::Index points);

/// (1/n) sum_j exp(i t x_j) at a single frequency.
Complex cf_at(const Eigen::Ref<const Eigen::VectorXd>& x, double t);

/// Values at 0 are exactly 1 and values at -t are exact conjugates of those at t.
EmpiricalCF empirical_cf(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& grid);

struct PsdResult {
    bool is_psd = false;
    double worst_violation = 0.0;  // smallest eigenvalue of the Hermitian part
};

/// Positive-semidefiniteness of a Hermitian matrix via its smallest
/// eigenvalue.  Matrices that deviate from Hermitian by more than
/// `hermitian_tol * max(1, max|M_jk|)` are rejected.
PsdResult psd_check(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol = 1e-9,
                    double hermitian_tol = 1e-9);

/// M_jk = psi(t_j - t_k).
Eigen::MatrixXcd difference_matrix(const CharFn& psi, const Eigen::Ref<const Eigen::VectorXd>& grid);

/// Exact sup-distance between the empirical cdf of `x` and `cdf`, taking both
/// one-sided limits at every jump.  The left limit of `cdf` is read at the
/// next representable double below the jump.
double ks_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const CdfFn& cdf);
double ks_distance(const Sample& sample, const CdfFn& cdf);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);
CdfFn normal_cdf_fn(double mean, double sd);

/// Exact joint pmf of two finitely-valued random vectors.
class FiniteJointDistribution {
public:
    static constexpr double kSumTolerance = 1e-12;

    /// atoms_x: one atom per row (rows == pmf.rows()); likewise atoms_z.
    FiniteJointDistribution(Eigen::MatrixXd atoms_x, Eigen::MatrixXd atoms_z, Eigen::MatrixXd pmf);

    /// Atoms labelled 0, 1, ..., k-1 on each side.
    static FiniteJointDistribution from_pmf(Eigen::MatrixXd pmf);

    const Eigen::MatrixXd& atoms_x() const noexcept { return atoms_x_; }
    const Eigen::MatrixXd& atoms_z() const noexcept { return atoms_z_; }
    const Eigen::MatrixXd& pmf() const noexcept { return pmf_; }

    Eigen::VectorXd marginal_x() const { return pmf_.rowwise().sum(); }
    Eigen::VectorXd marginal_z() const { return pmf_.colwise().sum().transpose(); }

    FiniteJointDistribution transposed() const;

private:
    Eigen::MatrixXd atoms_x_;
    Eigen::MatrixXd atoms_z_;
    Eigen::MatrixXd pmf_;
};

/// sup over events A in sigma(X), B in sigma(Z) of |P(A n B) - P(A)P(B)|.
///
/// Enumerates every subset A of the smaller atom set (up to complements,
/// which give the same value); for fixed A the optimal B collects the atoms
/// where d(A, z) = P(A, z) - P(A)P(z) has a fixed sign.  Throws
/// SizeLimitExceeded when the smaller side has more than `max_enumerated`
/// atoms.
double alpha_exact(const FiniteJointDistribution& joint, int max_enumerated = 20);

}  // namespace mixlab
