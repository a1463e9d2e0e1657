#include "resonette/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "resonette/errors.hpp"

namespace resonette {

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::MatrixXcd work = a;
    Eigen::VectorXcd w(n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, w.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw LinearAlgebraError("zgeev failed with info " + std::to_string(info));
    return w;
}

std::pair<double, Eigen::VectorXcd> hermitian_lowest(const Eigen::MatrixXcd& h) {
    const lapack_int n = static_cast<lapack_int>(h.rows());
    Eigen::MatrixXcd work = h;
    lapack_int m = 0;
    std::vector<double> w(n);
    Eigen::VectorXcd z(n);
    std::vector<lapack_int> isuppz(2);
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, 1, 0.0, &m,
                                           w.data(), z.data(), n, isuppz.data());
    if (info != 0 || m < 1) throw LinearAlgebraError("zheevr failed with info " + std::to_string(info));
    return {w[0], z};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigen_below(const Eigen::MatrixXd& a, double upper) {
    // Eigen rather than dsyevr: the OpenBLAS real gemm kernel picked on some AVX-512 hosts returns wrong products.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw LinearAlgebraError("symmetric eigensolver did not converge");
    Eigen::Index m = 0;
    while (m < es.eigenvalues().size() && es.eigenvalues()[m] <= upper) ++m;
    return {es.eigenvalues().head(m), es.eigenvectors().leftCols(m)};
}

SchurForm::SchurForm(const Eigen::MatrixXcd& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    t_ = a;
    q_.resize(n, n);
    Eigen::VectorXcd w(n);
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, t_.data(), n, &sdim, w.data(), q_.data(), n);
    if (info != 0) throw LinearAlgebraError("zgees failed with info " + std::to_string(info));
    t_.triangularView<Eigen::StrictlyLower>().setZero();
}

double SchurForm::sigma_min(cplx z, int max_iter, double rtol) const {
    const Eigen::Index n = t_.rows();
    Eigen::MatrixXcd tz = t_;
    tz.diagonal().array() -= z;
    const auto upper = tz.triangularView<Eigen::Upper>();
    if ((tz.diagonal().array().abs() == 0.0).any()) return 0.0;
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n) / std::sqrt(static_cast<double>(n));
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXcd y = upper.adjoint().solve(x);
        y = upper.solve(y);
        const double norm = y.norm();
        if (!std::isfinite(norm)) return 0.0;
        const double next = 1.0 / std::sqrt(norm);
        x = y / norm;
        if (it > 2 && std::abs(next - est) <= rtol * next) return next;
        est = next;
    }
    return est;
}

Eigen::MatrixXcd SchurForm::triangular_resolvent(cplx z) const {
    const lapack_int n = static_cast<lapack_int>(t_.rows());
    Eigen::MatrixXcd m = -t_;
    m.diagonal().array() += z;
    const lapack_int info = LAPACKE_ztrtri(LAPACK_COL_MAJOR, 'U', 'N', n, m.data(), n);
    if (info != 0) throw LinearAlgebraError("z is an eigenvalue of the Schur factor");
    m.triangularView<Eigen::StrictlyLower>().setZero();
    return m;
}

Eigen::MatrixXcd SchurForm::resolvent(cplx z) const { return q_ * triangular_resolvent(z) * q_.adjoint(); }

Eigenpair inverse_iteration(const Eigen::MatrixXcd& a, cplx shift, int iterations) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXcd m = a;
    const double nudge = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff());
    m.diagonal().array() -= shift + cplx(nudge, nudge);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.1 * std::sin(1.0 + i);
    v.normalize();
    for (int it = 0; it < iterations; ++it) {
        v = lu.solve(v);
        if (!v.allFinite()) throw LinearAlgebraError("inverse iteration diverged");
        v.normalize();
    }
    Eigenpair out;
    const Eigen::VectorXcd av = a * v;
    out.value = v.dot(av);
    out.vector = v;
    out.residual = (av - out.value * v).norm();
    return out;
}

Eigenpair refine_eigenpair(const Eigen::MatrixXcd& a, const Eigenpair& start, int iterations) {
    using ld = long double;
    using lc = std::complex<long double>;
    const Eigen::Index n = a.rows();
    Eigen::VectorXcd v0 = start.vector / start.vector.norm();
    // Bordered Newton matrix [A - l0, -v0; v0^H, 0], factored once.
    Eigen::MatrixXcd b(n + 1, n + 1);
    b.topLeftCorner(n, n) = a;
    b.topLeftCorner(n, n).diagonal().array() -= start.value;
    b.topRightCorner(n, 1) = -v0;
    b.bottomLeftCorner(1, n) = v0.adjoint();
    b(n, n) = 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b);

    std::vector<lc> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = lc(v0[i].real(), v0[i].imag());
    lc lam(start.value.real(), start.value.imag());
    Eigen::VectorXcd rhs(n + 1);
    double res_norm = 0.0;
    for (int it = 0; it <= iterations; ++it) {
        ld rn = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            lc acc = -lam * v[i];
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx aij = a(i, j);
                if (aij != cplx(0.0)) acc += lc(aij.real(), aij.imag()) * v[j];
            }
            rhs[i] = -cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
            rn += std::norm(acc);
        }
        res_norm = static_cast<double>(std::sqrt(rn));
        if (it == iterations) break;
        rhs[n] = 0.0;
        const Eigen::VectorXcd d = lu.solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) v[i] += lc(d[i].real(), d[i].imag());
        lam += lc(d[n].real(), d[n].imag());
    }
    Eigenpair out;
    out.value = cplx(static_cast<double>(lam.real()), static_cast<double>(lam.imag()));
    out.vector.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.vector[i] = cplx(static_cast<double>(v[i].real()), static_cast<double>(v[i].imag()));
    const double vn = out.vector.norm();
    out.residual = res_norm / vn;
    out.vector /= vn;
    return out;
}

}  // namespace resonette
