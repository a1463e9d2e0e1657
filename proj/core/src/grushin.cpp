#include "resonette/grushin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "resonette/errors.hpp"

namespace resonette {

namespace {

constexpr double kSingular = 1e-14;

void log_det(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, double& log_abs, cplx& phase) {
    log_abs = 0.0;
    phase = lu.permutationP().determinant();
    const auto& m = lu.matrixLU();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const cplx u = m(i, i);
        const double a = std::abs(u);
        log_abs += a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity();
        if (a > 0) phase *= u / a;
    }
}

// Eigen's rcond estimate misses exactly zero pivots, so the pivots are checked as well.
bool singular(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
    const auto d = lu.matrixLU().diagonal().cwiseAbs();
    if (d.size() == 0) return false;
    return !(d.minCoeff() > kSingular * d.maxCoeff()) || !(lu.rcond() > kSingular);
}

const Absorber& absorber_of(const DiscretizedOperator& ref) {
    if (!ref.absorber || ref.meta.kind != OperatorKind::reference)
        throw ValidationError("Grushin reduction needs the reference operator with its absorber");
    return *ref.absorber;
}

}  // namespace

GrushinSystem::GrushinSystem(const DiscretizedOperator& ref, cplx z) : z_(z), theta_(ref.meta.theta) {
    const Absorber& ab = absorber_of(ref);
    basis_ = ab.basis.cast<cplx>();
    weights_ = ab.weights;
    ref_matrix_ = ref.matrix;
    Eigen::MatrixXcd shifted = ref.matrix;
    shifted.diagonal().array() -= z;
    lu_.compute(shifted);
    if (singular(lu_))
        throw SingularSystemError("reference operator is singular at z; z lies outside the admissible window");
    // With P~ = P - i theta K the bordered inverse closes only for the coefficient -i theta in E+ and E-+.
    y_ = lu_.solve(basis_ * weights_.cast<cplx>().asDiagonal());
    emp_ = cplx(0.0, -theta_) * (basis_.adjoint() * y_);
    emp_.diagonal().array() -= 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> small(emp_);
    log_det(small, log_abs_d_, phase_d_);
}

Eigen::VectorXcd GrushinSystem::r_plus(const Eigen::VectorXcd& u) const { return basis_.adjoint() * u; }

Eigen::VectorXcd GrushinSystem::r_minus(const Eigen::VectorXcd& coeffs) const {
    const Eigen::VectorXcd e = basis_ * coeffs;
    return ref_matrix_ * e - z_ * e;
}

Eigen::MatrixXcd GrushinSystem::e_plus() const {
    Eigen::MatrixXcd off = y_ - basis_ * (basis_.adjoint() * y_);
    return basis_ + cplx(0.0, -theta_) * off;
}

Eigen::MatrixXcd GrushinSystem::e_minus() const {
    // rows e_j^H (P~ - z)^-1
    return basis_.adjoint() * lu_.inverse();
}

Eigen::MatrixXcd GrushinSystem::e() const {
    const Eigen::MatrixXcd r = lu_.inverse();
    return r - basis_ * (basis_.adjoint() * r);
}

Eigen::MatrixXcd GrushinSystem::reference_solve(const Eigen::MatrixXcd& x) const { return lu_.solve(x); }

cplx GrushinSystem::determinant() const { return std::exp(log_abs_d_) * phase_d_; }

double GrushinSystem::norm_e_minus_plus() const {
    return Eigen::BDCSVD<Eigen::MatrixXcd>(emp_).singularValues()(0);
}

double GrushinSystem::basis_orthonormality() const {
    const Eigen::MatrixXcd g = basis_.adjoint() * basis_;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

GrushinSystem build_grushin(const DiscretizedOperator& dist, const DiscretizedOperator& ref, cplx z) {
    if (dist.matrix.rows() != ref.matrix.rows()) throw ValidationError("operator and reference differ in size");
    if (dist.meta.theta != ref.meta.theta) throw ValidationError("operator and reference use different angles");
    return GrushinSystem(ref, z);
}

double verify_resolvent_identity(const GrushinSystem& sys, const DiscretizedOperator& dist, cplx z) {
    if (z != sys.z()) throw ValidationError("Grushin system was built for a different z");
    const Eigen::PartialPivLU<Eigen::MatrixXcd> emp(sys.e_minus_plus());
    if (sys.rank() > 0 && singular(emp))
        throw SingularSystemError("E-+(z) is singular: z is numerically a resonance");
    Eigen::MatrixXcd shifted = dist.matrix;
    shifted.diagonal().array() -= z;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    if (singular(lu)) throw SingularSystemError("P - z is singular: z is numerically a resonance");
    const Eigen::MatrixXcd direct = lu.inverse();
    Eigen::MatrixXcd rhs = sys.e();
    if (sys.rank() > 0) rhs -= sys.e_plus() * emp.solve(sys.e_minus());
    return (direct - rhs).norm() / direct.norm();
}

GrushinFamily::GrushinFamily(const DiscretizedOperator& ref) : theta_(ref.meta.theta), schur_(ref.matrix) {
    const Absorber& ab = absorber_of(ref);
    const Eigen::MatrixXcd b = ab.basis.cast<cplx>();
    qb_ = schur_.q().adjoint() * b;
    qkb_ = qb_ * ab.weights.cast<cplx>().asDiagonal();
}

Eigen::MatrixXcd GrushinFamily::e_minus_plus(cplx z) const {
    Eigen::MatrixXcd t = schur_.t();
    t.diagonal().array() -= z;
    // Blocked ztrtrs is several times faster than Eigen's triangular solve at these sizes.
    Eigen::MatrixXcd x = qkb_;
    const lapack_int n = static_cast<lapack_int>(t.rows()), m_rhs = static_cast<lapack_int>(x.cols());
    const lapack_int info = LAPACKE_ztrtrs(LAPACK_COL_MAJOR, 'U', 'N', 'N', n, m_rhs, t.data(), n, x.data(), n);
    if (info != 0) throw SingularSystemError("z is an eigenvalue of the reference operator");
    Eigen::MatrixXcd m = cplx(0.0, -theta_) * (qb_.adjoint() * x);
    m.diagonal().array() -= 1.0;
    return m;
}

DeterminantValue GrushinFamily::determinant(cplx z, bool with_norm) const {
    const Eigen::MatrixXcd m = e_minus_plus(z);
    DeterminantValue d;
    d.z = z;
    if (m.rows() == 0) return d;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    cplx phase;
    log_det(lu, d.log_abs, phase);
    d.arg = std::arg(phase);
    if (with_norm) d.norm_emp = Eigen::BDCSVD<Eigen::MatrixXcd>(m).singularValues()(0);
    return d;
}

int GrushinFamily::poles_in(const Box& box) const {
    int c = 0;
    const Eigen::VectorXcd ev = schur_.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const cplx l = ev[i];
        if (l.real() > box.re_min && l.real() < box.re_max && l.imag() > box.im_min && l.imag() < box.im_max) ++c;
    }
    return c;
}

namespace {

struct EdgeWalk {
    double total_phase = 0.0;
    cplx moment = 0.0;
    int samples = 0;
    bool ok = true;
};

// Walks a straight edge, halving steps whose phase increment is too large.
void walk_edge(const GrushinFamily& f, cplx a, cplx b, const TraceOptions& opt, EdgeWalk& w) {
    std::function<void(cplx, cplx, const DeterminantValue&, const DeterminantValue&, int)> segment =
        [&](cplx za, cplx zb, const DeterminantValue& da, const DeterminantValue& db, int depth) {
            double dphi = std::remainder(db.arg - da.arg, 2.0 * M_PI);
            const double dlog = db.log_abs - da.log_abs;
            if ((std::abs(dphi) > opt.max_phase_step || std::abs(dlog) > 1.0) && depth < opt.max_depth) {
                const cplx zm = 0.5 * (za + zb);
                const DeterminantValue dm = f.determinant(zm);
                ++w.samples;
                segment(za, zm, da, dm, depth + 1);
                segment(zm, zb, dm, db, depth + 1);
                return;
            }
            if (std::abs(dphi) > opt.max_phase_step) w.ok = false;
            w.total_phase += dphi;
            w.moment += 0.5 * (za + zb) * cplx(dlog, dphi);
        };
    const int n = std::max(2, opt.initial_per_side);
    DeterminantValue prev = f.determinant(a);
    ++w.samples;
    for (int k = 1; k <= n; ++k) {
        const cplx z = a + (b - a) * (static_cast<double>(k) / n);
        const DeterminantValue cur = f.determinant(z);
        ++w.samples;
        segment(z - (b - a) / static_cast<double>(n), z, prev, cur, 0);
        prev = cur;
    }
}

BoxCount count_once(const GrushinFamily& f, const Box& box, const TraceOptions& opt) {
    BoxCount c;
    c.box = box;
    const cplx corners[4] = {{box.re_min, box.im_min}, {box.re_max, box.im_min}, {box.re_max, box.im_max}, {box.re_min, box.im_max}};
    EdgeWalk w;
    for (int s = 0; s < 4; ++s) walk_edge(f, corners[s], corners[(s + 1) % 4], opt, w);
    const double turns = w.total_phase / (2.0 * M_PI);
    c.winding = static_cast<int>(std::lround(turns));
    c.ok = w.ok && std::abs(turns - c.winding) < 0.05;
    c.samples = w.samples;
    c.moment = w.moment / cplx(0.0, 2.0 * M_PI);
    c.poles = f.poles_in(box);
    c.zeros = c.winding + c.poles;
    return c;
}

}  // namespace

BoxCount count_zeros(const GrushinFamily& family, const Box& box, const TraceOptions& options) {
    if (!(box.re_max > box.re_min && box.im_max > box.im_min)) throw ValidationError("degenerate counting box");
    BoxCount c = count_once(family, box, options);
    Box b = box;
    int retries = 0;
    while (!c.ok && retries < options.max_retries) {
        // A zero sits on the contour: nudge the edges outward and try again.
        ++retries;
        const double dx = 0.013 * retries * (box.re_max - box.re_min);
        const double dy = 0.017 * retries * (box.im_max - box.im_min);
        b = {box.re_min - dx, box.re_max + dx, box.im_min - dy, box.im_max + dy};
        c = count_once(family, b, options);
    }
    c.retries = retries;
    return c;
}

namespace {

// Secant iteration on D, with ratios formed from log-determinants to stay clear of overflow.
bool polish_zero(const GrushinFamily& f, const Box& box, cplx& z) {
    const double scale = std::max(box.re_max - box.re_min, box.im_max - box.im_min);
    cplx z0 = z, z1 = z + 1e-3 * scale * cplx(1.0, 0.7);
    DeterminantValue d0 = f.determinant(z0), d1 = f.determinant(z1);
    for (int it = 0; it < 40; ++it) {
        const cplx ratio = std::exp(cplx(d0.log_abs - d1.log_abs, d0.arg - d1.arg));
        if (ratio == cplx(1.0)) break;
        const cplx z2 = z1 - (z1 - z0) / (1.0 - ratio);
        if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag())) return false;
        z0 = z1;
        d0 = d1;
        z1 = z2;
        if (std::abs(z1 - z0) <= 1e-15 * std::max(1.0, std::abs(z1))) break;
        d1 = f.determinant(z1);
    }
    const double slack = 0.05 * scale;
    if (z1.real() < box.re_min - slack || z1.real() > box.re_max + slack || z1.imag() < box.im_min - slack ||
        z1.imag() > box.im_max + slack)
        return false;
    z = z1;
    return true;
}

}  // namespace

std::vector<LocatedZero> locate_zeros(const GrushinFamily& family, const Box& box, const TraceOptions& options) {
    std::vector<LocatedZero> out;
    const BoxCount c = count_zeros(family, box, options);
    if (c.zeros <= 0) return out;
    if (c.zeros == 1 && c.poles == 0 && c.ok) {
        cplx z = c.moment;
        polish_zero(family, c.box, z);
        out.push_back({z, 1});
        return out;
    }
    const double w = box.re_max - box.re_min, hgt = box.im_max - box.im_min;
    if (std::max(w, hgt) < options.min_box) {
        out.push_back({cplx(0.5 * (box.re_min + box.re_max), 0.5 * (box.im_min + box.im_max)), c.zeros});
        return out;
    }
    // Split along the longer side; the cut is shifted off-centre so it rarely hits a zero exactly.
    std::vector<Box> parts;
    if (w >= hgt) {
        const double m = box.re_min + 0.4937 * w;
        parts = {{box.re_min, m, box.im_min, box.im_max}, {m, box.re_max, box.im_min, box.im_max}};
    } else {
        const double m = box.im_min + 0.4937 * hgt;
        parts = {{box.re_min, box.re_max, box.im_min, m}, {box.re_min, box.re_max, m, box.im_max}};
    }
    for (const Box& p : parts) {
        auto sub = locate_zeros(family, p, options);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

DeterminantTrace determinant_trace(const GrushinFamily& family, const std::vector<cplx>& z_grid, const std::vector<Box>& boxes,
                                   const TraceOptions& options) {
    DeterminantTrace tr;
    const int m = family.rank();
    for (cplx z : z_grid) {
        const DeterminantValue d = family.determinant(z, true);
        tr.samples.push_back(d);
        tr.sup_norm_emp = std::max(tr.sup_norm_emp, d.norm_emp);
        if (d.norm_emp > 0) tr.hadamard_excess = std::max(tr.hadamard_excess, d.log_abs - m * std::log(d.norm_emp));
    }
    for (const Box& b : boxes) {
        tr.boxes.push_back(count_zeros(family, b, options));
        auto z = locate_zeros(family, b, options);
        tr.zeros.insert(tr.zeros.end(), z.begin(), z.end());
    }
    return tr;
}

}  // namespace resonette
