#include "resonette/distortion.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "resonette/errors.hpp"
#include "resonette/smooth.hpp"

namespace resonette {

namespace {

using boost::math::differentiation::make_fvar;
using GL = boost::math::quadrature::gauss<double, 20>;

template <class T>
T chi0(const T& s) {
    return smooth_step(s / std::log(2.0));
}

template <class T>
T density(const T& r, double r0, double ln_l, double lambda) {
    using std::exp;
    const T c1 = chi0(r - ln_l);
    return chi0(r - r0) * (1.0 - c1) * exp(r) + 2.0 * lambda * c1;
}

template <class T>
T phi0_prime(const T& s, double eps0) {
    return 2.0 - smooth_step((s + eps0) / (2.0 * eps0));
}

// Fixed 20-point rule: callers only integrate over cells no longer than the table step.
double integrate(double a, double b, double r0, double ln_l, double lambda) {
    if (b <= a) return 0.0;
    return GL::integrate([&](double t) { return density(t, r0, ln_l, lambda); }, a, b);
}

constexpr double kPhiStep = 0.02;

struct Phi0Table {
    double eps0 = 1.0 - std::log(2.0);
    std::vector<double> cum;
    Phi0Table() {
        const int n = static_cast<int>(std::ceil(2 * eps0 / kPhiStep));
        cum.assign(n + 1, 0.0);
        for (int j = 0; j < n; ++j) {
            const double a = -eps0 + j * kPhiStep;
            cum[j + 1] = cum[j] + GL::integrate([&](double t) { return phi0_prime(t, eps0); }, a, a + kPhiStep);
        }
    }
};

}  // namespace

double DistortionProfile::phi0_deriv(int k, double s) {
    const double eps0 = 1.0 - std::log(2.0);
    if (k == 0) return phi0(s);
    auto v = phi0_prime(make_fvar<double, 3>(s), eps0);
    return static_cast<double>(v.derivative(k - 1));
}

double DistortionProfile::phi0(double s) {
    const double eps0 = 1.0 - std::log(2.0);
    if (s <= -eps0) return 2.0 * s;
    if (s >= eps0) return s;
    static const Phi0Table table;
    const int j = std::min(static_cast<int>((s + eps0) / kPhiStep), static_cast<int>(table.cum.size()) - 2);
    const double a = -eps0 + j * kPhiStep;
    return -2.0 * eps0 + table.cum[j] + GL::integrate([&](double t) { return phi0_prime(t, eps0); }, a, s);
}

DistortionProfile::DistortionProfile(double lambda, double r0, const ProfileOptions& options)
    : lambda_(lambda), r0_(r0), eps0_(1.0 - std::log(2.0)), step_(options.table_step) {
    if (!(r0 >= 1.0)) throw ConstructionError("R0 must be at least 1");
    if (!(lambda > 1.0)) throw ConstructionError("lambda must exceed 1");
    ln_l_ = std::log(lambda);
    ln2l_ = std::log(2.0 * lambda);
    if (ln_l_ <= r0_) throw ConstructionError("lambda too small: ln(lambda) must exceed R0");

    const int n = static_cast<int>(std::ceil((ln2l_ - r0_) / step_)) + 1;
    table_.assign(n + 1, 0.0);
    for (int j = 0; j < n; ++j)
        table_[j + 1] = table_[j] + integrate(r0_ + j * step_, r0_ + (j + 1) * step_, r0_, ln_l_, lambda_);
    alpha_ = 2.0 * lambda_ * ln2l_ - g(ln2l_);

    // g extended linearly beyond ln 2 lambda; solve g(r) = lambda r.
    auto gap = [&](double r) { return (r <= ln2l_ ? g(r) : 2.0 * lambda_ * r - alpha_) - lambda_ * r; };
    double lo = options.strict_bracket ? 2.0 * ln_l_ - 1.0 : ln2l_;
    double hi = options.strict_bracket ? 2.0 * ln_l_ - eps0_ : 2.0 * ln_l_;
    if (!(gap(lo) <= 0.0 && gap(hi) >= 0.0))
        throw ConstructionError("lambda too small: r_lambda not bracketed in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    boost::math::tools::eps_tolerance<double> tol(50);
    boost::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::bisect(gap, lo, hi, tol, iters);
    r_lambda_ = 0.5 * (a + b);
    if (!(ln2l_ <= r_lambda_ - eps0_ + 1e-12) || !(r_lambda_ + eps0_ <= 2.0 * ln_l_ + 1e-12))
        throw ConstructionError("lambda too small: glued profile would not be smooth and linear beyond 2 ln(lambda)");
}

double DistortionProfile::g(double r) const {
    if (r <= r0_) return 0.0;
    if (r > ln2l_) throw DomainError("g tabulated only up to ln(2 lambda)");
    const int j = std::min(static_cast<int>((r - r0_) / step_), static_cast<int>(table_.size()) - 2);
    const double rj = r0_ + j * step_;
    return table_[j] + integrate(rj, r, r0_, ln_l_, lambda_);
}

double DistortionProfile::big_g(double r) const { return density(r, r0_, ln_l_, lambda_); }

double DistortionProfile::f_deriv(int k, double r) const {
    if (k < 0 || k > 4) throw UnsupportedOrderError("profile derivatives available up to order 4");
    if (r <= r0_) return 0.0;
    if (r <= ln2l_) {
        if (k == 0) return g(r);
        auto v = density(make_fvar<double, 3>(r), r0_, ln_l_, lambda_);
        return static_cast<double>(v.derivative(k - 1));
    }
    const double s = r - r_lambda_;
    if (k == 0) return lambda_ * phi0(s) + alpha_;
    return lambda_ * phi0_deriv(k, s);
}

std::shared_ptr<const DistortionProfile> build_f_lambda(double lambda, double r0, const ProfileOptions& options) {
    return std::make_shared<const DistortionProfile>(lambda, r0, options);
}

std::shared_ptr<const DistortionProfile> profile_for(double h, double n1, double r0, const ProfileOptions& options) {
    return build_f_lambda(std::pow(h, -n1), r0, options);
}

DistortionMap::DistortionMap(std::shared_ptr<const DistortionProfile> profile, double theta)
    : profile_(std::move(profile)), theta_(theta) {
    if (!profile_) throw ValidationError("distortion map needs a profile");
    if (theta < 0) throw DomainError("distortion angle must be non-negative");
}

cplx DistortionMap::phi(double x) const {
    const double r = std::abs(x);
    return cplx(x, theta_ * std::copysign(profile_->b(r), x));
}

cplx DistortionMap::dphi(double x) const { return cplx(1.0, theta_ * profile_->b_deriv(1, std::abs(x))); }

cplx DistortionMap::d2phi(double x) const {
    return cplx(0.0, theta_ * std::copysign(profile_->b_deriv(2, std::abs(x)), x));
}

Eigen::MatrixXd DistortionMap::field_derivative(const Eigen::VectorXd& x) const {
    const int n = static_cast<int>(x.size());
    const double r = x.norm();
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    if (r == 0.0) return f;
    const Eigen::MatrixXd pi = x * x.transpose() / (r * r);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return profile_->b_deriv(1, r) * pi + profile_->a(r) * (id - pi);
}

Eigen::VectorXcd DistortionMap::phi(const Eigen::VectorXd& x) const {
    const double r = x.norm();
    Eigen::VectorXcd out = x.cast<cplx>();
    if (r > 0) out += cplx(0.0, theta_ * profile_->a(r)) * x.cast<cplx>();
    return out;
}

Eigen::MatrixXcd DistortionMap::jacobian(const Eigen::VectorXd& x) const {
    const int n = static_cast<int>(x.size());
    return Eigen::MatrixXcd::Identity(n, n) + cplx(0.0, theta_) * field_derivative(x).cast<cplx>();
}

JacobianCheck jacobian_inequality_check(const DistortionMap& map, const std::vector<JacobianSample>& samples) {
    JacobianCheck out;
    out.worst_margin = samples.empty() ? 0.0 : -1e300;
    const double th = map.theta();
    for (const auto& s : samples) {
        const Eigen::MatrixXcd jt = map.jacobian(s.x).transpose();
        const Eigen::VectorXcd v = jt.partialPivLu().solve(s.xi.cast<cplx>());
        const cplx sq = (v.array() * v.array()).sum();
        const double a = map.profile().a(s.x.norm());
        const double margin = sq.imag() + th * a * s.xi.squaredNorm();
        out.worst_margin = std::max(out.worst_margin, margin);

        const Eigen::MatrixXd f = map.field_derivative(s.x);
        const int n = static_cast<int>(s.x.size());
        const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + th * th * f * f;
        const Eigen::MatrixXd minv = m.inverse();
        const double closed = -2.0 * th * s.xi.dot(f * minv * minv * s.xi);
        out.closed_form_deviation = std::max(out.closed_form_deviation, std::abs(closed - sq.imag()));
        ++out.samples;
    }
    return out;
}

LemmaCheck check_profile_conditions(const DistortionProfile& p, int n_grid, double tol, double c_cap) {
    LemmaCheck c;
    c.lambda = p.lambda();
    c.r0 = p.r0();
    const double lam = p.lambda();
    const double rmax = p.linear_radius() + 2.0;
    c.support_margin = 0.0;
    c.linearity_margin = 0.0;
    c.monotone_margin = 1e300;
    for (int i = 0; i < n_grid; ++i) {
        const double r = rmax * i / (n_grid - 1);
        const double f = p.f(r), f1 = p.f_deriv(1, r), f2 = p.f_deriv(2, r);
        if (r <= p.r0()) c.support_margin = std::min(c.support_margin, -std::abs(f) / lam);
        if (r >= p.linear_radius()) c.linearity_margin = std::min(c.linearity_margin, -std::abs(f - lam * r) / (lam * r));
        const double scale = lam * std::max(r, 1.0);
        c.monotone_margin = std::min({c.monotone_margin, f / scale, (r * f1 - f) / scale, (2 * lam * r - r * f1) / scale});
        c.c_iv = std::max(c.c_iv, (f1 + std::abs(f2)) / (1.0 + f));
        for (int k = 1; k <= 4; ++k) c.c_v = std::max(c.c_v, std::abs(p.f_deriv(k, r)) / lam);
    }
    // Convexity of g on [0, ln 2 lambda]: exact g'' = G' on the dense grid, and second differences
    // on a coarse grid where rounding stays below the tolerance.
    c.convexity_margin = 1e300;
    for (int i = 0; i < n_grid; ++i) {
        const double r = p.ln_2lambda() * i / (n_grid - 1);
        c.convexity_margin = std::min(c.convexity_margin, p.f_deriv(2, r) / lam);
    }
    const int coarse = 200;
    const double hstep = p.ln_2lambda() / coarse;
    for (int i = 1; i < coarse; ++i) {
        const double d2 = (p.g((i + 1) * hstep) - 2 * p.g(i * hstep) + p.g((i - 1) * hstep)) / (hstep * hstep);
        c.convexity_margin = std::min(c.convexity_margin, d2 / lam);
    }
    const double l2 = p.ln_2lambda();
    c.alpha_lower = 2 * lam * l2 - (1 + 2 * std::log(2.0)) * lam;
    c.alpha_upper = 2 * lam * l2 - 2 * lam + 2 * std::exp(p.r0());
    c.alpha_in_bracket = c.alpha_lower <= p.alpha_lambda() && p.alpha_lambda() <= c.alpha_upper;
    const double left = p.g(l2), right = lam * DistortionProfile::phi0(l2 - p.r_lambda()) + p.alpha_lambda();
    const double sl = p.big_g(l2), sr = lam * DistortionProfile::phi0_deriv(1, l2 - p.r_lambda());
    c.c1_jump = std::max(std::abs(left - right) / std::abs(left), std::abs(sl - sr) / std::abs(sl));
    c.passed = c.support_margin >= -tol && c.linearity_margin >= -tol && c.monotone_margin >= -tol &&
               c.convexity_margin >= -tol && c.c_iv <= c_cap && c.c_v <= c_cap && c.alpha_in_bracket && c.c1_jump <= tol;
    return c;
}

}  // namespace resonette
