#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace resonette {

using cplx = std::complex<double>;

// All eigenvalues of a general complex matrix (LAPACK zgeev, no vectors).
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& a);

// Smallest eigenpair of a Hermitian matrix (LAPACK zheevr with index range).
std::pair<double, Eigen::VectorXcd> hermitian_lowest(const Eigen::MatrixXcd& h);

// Eigenpairs of a real symmetric matrix with eigenvalues <= upper.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigen_below(const Eigen::MatrixXd& a, double upper);

// Complex Schur form A = Q T Q^H; makes resolvent-type queries O(n^2) or O(n^3/3) per shift.
class SchurForm {
public:
    explicit SchurForm(const Eigen::MatrixXcd& a);

    Eigen::VectorXcd eigenvalues() const { return t_.diagonal(); }
    // Smallest singular value of (A - z) by inverse iteration on the triangular factor.
    double sigma_min(cplx z, int max_iter = 200, double rtol = 1e-10) const;
    // (z - A)^{-1} in the original basis.
    Eigen::MatrixXcd resolvent(cplx z) const;
    // (z - T)^{-1} in the Schur basis.
    Eigen::MatrixXcd triangular_resolvent(cplx z) const;
    const Eigen::MatrixXcd& q() const { return q_; }
    const Eigen::MatrixXcd& t() const { return t_; }
    Eigen::Index size() const { return t_.rows(); }

private:
    Eigen::MatrixXcd q_, t_;
};

struct Eigenpair {
    cplx value;
    Eigen::VectorXcd vector;
    // ||A v - value v|| / ||v||
    double residual = 0.0;
};

// Inverse iteration near a shift; returns the eigenpair of A closest to the shift.
Eigenpair inverse_iteration(const Eigen::MatrixXcd& a, cplx shift, int iterations = 3);

// Newton refinement of an eigenpair with residuals accumulated in long double.
// The eigenvalue of the stored double matrix is recovered well below double rounding of ||A||.
Eigenpair refine_eigenpair(const Eigen::MatrixXcd& a, const Eigenpair& start, int iterations = 4);

}  // namespace resonette
