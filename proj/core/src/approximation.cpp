#include "resonette/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "resonette/errors.hpp"
#include "resonette/fit.hpp"
#include "resonette/smooth.hpp"

namespace resonette {

namespace {

constexpr cplx I(0.0, 1.0);

struct Rule {
    std::vector<double> x, w;
};

template <unsigned P>
Rule make_rule() {
    using G = boost::math::quadrature::gauss<double, P>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(w[i]);
        } else {
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
        }
    }
    return r;
}

const Rule& gauss_rule(int points) {
    static const Rule r8 = make_rule<8>();
    static const Rule r16 = make_rule<16>();
    static const Rule r20 = make_rule<20>();
    static const Rule r30 = make_rule<30>();
    switch (points) {
        case 8: return r8;
        case 16: return r16;
        case 20: return r20;
        case 30: return r30;
        default: throw ValidationError("points_per_panel must be one of 8, 16, 20, 30");
    }
}

double default_s_max(const PotentialSpec& v, const ContourSettings& cs) {
    if (cs.s_max > 0) return cs.s_max;
    return std::min(40.0 / v.nu, std::log(std::max(v.negligible_radius, std::exp(1.0))) + 1.0);
}

void check_nu_tilde(const PotentialSpec& v, double nu_tilde) {
    if (!(nu_tilde > 0.0 && nu_tilde < v.nu))
        throw DomainError("nu_tilde must lie in (0, nu)");
}

}  // namespace

AlmostAnalyticExtension::AlmostAnalyticExtension(PotentialSpec source, int order, double sector_c)
    : source_(std::move(source)), order_(order), sector_c_(sector_c) {
    if (order < 0 || order > source_.max_order)
        throw UnsupportedOrderError("Taylor order " + std::to_string(order) + " exceeds available derivatives (" +
                                    std::to_string(source_.max_order) + ")");
}

cplx AlmostAnalyticExtension::eval_c(cplx x) const {
    const double a = x.real(), b = x.imag();
    if (std::abs(b) > sector_c_ * std::sqrt(1.0 + a * a)) throw DomainError("almost-analytic extension evaluated outside |Im x| <= C<Re x>");
    if (b == 0.0) return source_.eval(a);
    const auto d = source_.jet(a, order_);
    cplx sum = 0.0, p = 1.0;
    double fact = 1.0;
    for (int k = 0; k <= order_; ++k) {
        if (k > 0) {
            p *= I * b;
            fact *= k;
        }
        sum += p * d[k] / fact;
    }
    return sum;
}

cplx AlmostAnalyticExtension::dbar(cplx x) const {
    if (order_ + 1 > source_.max_order) throw UnsupportedOrderError("d-bar defect needs one derivative beyond the Taylor order");
    const double a = x.real(), b = x.imag();
    double fact = 1.0;
    for (int k = 2; k <= order_; ++k) fact *= k;
    return 0.5 * std::pow(I * b, order_) * source_.deriv(order_ + 1, a) / fact;
}

cplx AlmostAnalyticExtension::eval_log(cplx s, int omega) const { return eval_c(static_cast<double>(omega) * std::exp(s)); }

AlmostAnalyticExtension almost_analytic_extend(const PotentialSpec& v, int order) { return AlmostAnalyticExtension(v, order); }

double SectorFunction::eval_real(double x) const {
    return eval_sector(cplx(std::abs(x), 0.0), x < 0 ? -1 : 1).real();
}

ExactContinuation::ExactContinuation(PotentialSpec v) : v_(std::move(v)) {
    if (!v_.has_analytic()) throw DomainError("potential " + v_.name + " has no exact continuation");
}

cplx ExactContinuation::eval_sector(cplx r, int omega) const { return v_.analytic(static_cast<double>(omega) * r); }

std::vector<AnalyticApproximation::Node> AnalyticApproximation::upper_nodes(double mu, double s_max,
                                                                             const ContourSettings& cs, int points) {
    const Rule& rule = gauss_rule(points);
    std::vector<Node> nodes;
    const double panel = cs.panel_over_mu * mu;
    // Top leg, traversed leftward from s_max to -2 mu at height 2 mu.
    {
        const double a = -2.0 * mu, b = s_max;
        const int np = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
        const double len = (b - a) / np;
        for (int p = 0; p < np; ++p) {
            const double c = a + (p + 0.5) * len;
            for (std::size_t q = 0; q < rule.x.size(); ++q)
                nodes.push_back({cplx(c + 0.5 * len * rule.x[q], 2.0 * mu), -0.5 * len * rule.w[q]});
        }
    }
    // Upper half of the left leg, traversed downward.
    {
        const double a = 0.0, b = 2.0 * mu;
        const int np = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
        const double len = (b - a) / np;
        for (int p = 0; p < np; ++p) {
            const double c = a + (p + 0.5) * len;
            for (std::size_t q = 0; q < rule.x.size(); ++q)
                nodes.push_back({cplx(-2.0 * mu, c + 0.5 * len * rule.x[q]), -I * 0.5 * len * rule.w[q]});
        }
    }
    return nodes;
}

cplx AnalyticApproximation::contour_sum(const std::vector<Node>& nodes, cplx s) const {
    // The lower half of the contour is the mirror image, with conjugate weights.
    if (s.imag() == 0.0) {
        double acc = 0.0;
        for (const auto& n : nodes) acc += 2.0 * (n.weight / (n.s - s)).real();
        return acc;
    }
    cplx acc = 0.0;
    for (const auto& n : nodes) acc += n.weight / (n.s - s) + std::conj(n.weight) / (std::conj(n.s) - s);
    return acc;
}

AnalyticApproximation::AnalyticApproximation(const PotentialSpec& v, double mu, const ApproximationParams& params)
    : ext_(v, params.order), params_(params), mu_(mu) {
    nu_tilde_ = params.nu_tilde > 0 ? params.nu_tilde : 0.5 * v.nu;
    check_nu_tilde(v, nu_tilde_);
    if (!(mu > 0.0 && mu <= params.mu_max)) throw DomainError("approximation angle mu must lie in (0, mu_max]");
    s_max_ = default_s_max(v, params.contour);

    const auto& cs = params.contour;
    std::vector<Node> coarse_nodes[2];
    for (int d = 0; d < 2; ++d) {
        const int omega = d == 0 ? 1 : -1;
        nodes_[d] = upper_nodes(mu, s_max_, cs, cs.points_per_panel);
        for (auto& n : nodes_[d]) n.weight *= std::exp(nu_tilde_ * n.s) * ext_.eval_log(n.s, omega) / (2.0 * std::numbers::pi * I);
        coarse_nodes[d] = upper_nodes(mu, s_max_, cs, 8);
        for (auto& n : coarse_nodes[d]) n.weight *= std::exp(nu_tilde_ * n.s) * ext_.eval_log(n.s, omega) / (2.0 * std::numbers::pi * I);
    }

    // Self-consistency estimate against the 8-point rule on the same panels, plus the truncated tail.
    double est = 0.0;
    for (double s : {0.0, 0.5 * s_max_, 1.0}) {
        if (s > s_max_) continue;
        for (int d = 0; d < 2; ++d) {
            cplx fine = contour_sum(nodes_[d], s), coarse = contour_sum(coarse_nodes[d], s);
            est = std::max(est, std::abs(fine - coarse) * std::exp(-nu_tilde_ * s));
        }
    }
    const cplx s_end(s_max_, 2.0 * mu);
    const double g_end = std::abs(std::exp(nu_tilde_ * s_end) * ext_.eval_log(s_end, 1));
    est += g_end / (std::numbers::pi * (v.nu - nu_tilde_) * mu);
    error_estimate_ = est;
    if (est > cs.tolerance) throw AccuracyError("contour quadrature did not converge", est);
}

double AnalyticApproximation::chi1(double t) const { return smooth_cutoff(t, -1.0, 0.0, params_.glue_sharpness); }

cplx AnalyticApproximation::v1(cplx s, int omega) const {
    if (s.real() < -mu_ || std::abs(s.imag()) >= 2.0 * mu_) throw DomainError("V^mu_1 evaluated outside Re s >= -mu, |Im s| < 2 mu");
    return std::exp(-nu_tilde_ * s) * contour_sum(nodes_[omega > 0 ? 0 : 1], s);
}

cplx AnalyticApproximation::v2(cplx s, int omega) const {
    if (s.real() <= -mu_) return ext_.eval_log(s, omega);
    if (s.real() >= 0.0) return v1(s, omega);
    if (s.imag() != 0.0) throw DomainError("glue region is only defined for real log-radius");
    const double c = chi1(s.real() / mu_);
    return c * ext_.eval_log(s, omega) + (1.0 - c) * v1(s, omega);
}

cplx AnalyticApproximation::eval_sector(cplx r, int omega) const {
    if (r == cplx(0.0)) return ext_.source().eval(0.0);
    const cplx s = std::log(r);
    if (std::abs(s.imag()) >= 2.0 * mu_) throw DomainError("radius outside the sector |arg r| < 2 mu");
    return v2(s, omega);
}

std::shared_ptr<const AnalyticApproximation> build_approximation(const PotentialSpec& v, double mu,
                                                                 const ApproximationParams& params) {
    return std::make_shared<const AnalyticApproximation>(v, mu, params);
}

ContourValue contour_v1(const AlmostAnalyticExtension& ext, double mu, double nu_tilde, cplx s, int omega,
                        const ContourSettings& settings) {
    if (s.real() < -mu || std::abs(s.imag()) >= 2.0 * mu) throw DomainError("contour_v1: s outside Re s >= -mu, |Im s| < 2 mu");
    const auto& v = ext.source();
    check_nu_tilde(v, nu_tilde);
    const double s_max = default_s_max(v, settings);
    const Rule& fine = gauss_rule(settings.points_per_panel);
    const Rule& coarse = gauss_rule(8);
    const double panel = settings.panel_over_mu * mu;
    const cplx norm = 1.0 / (2.0 * std::numbers::pi * I);

    auto leg = [&](const Rule& rule, cplx start, cplx end) {
        const double length = std::abs(end - start);
        const int np = std::max(1, static_cast<int>(std::ceil(length / panel)));
        const cplx step = (end - start) / static_cast<double>(np);
        cplx acc = 0.0;
        for (int p = 0; p < np; ++p) {
            const cplx c = start + (p + 0.5) * step;
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                const cplx sp = c + 0.5 * rule.x[q] * step;
                acc += 0.5 * rule.w[q] * step * std::exp(nu_tilde * sp) * ext.eval_log(sp, omega) / (sp - s);
            }
        }
        return acc;
    };
    auto integral = [&](const Rule& rule) {
        const cplx a(s_max, 2 * mu), b(-2 * mu, 2 * mu), c(-2 * mu, -2 * mu), d(s_max, -2 * mu);
        return norm * std::exp(-nu_tilde * s) * (leg(rule, a, b) + leg(rule, b, c) + leg(rule, c, d));
    };
    ContourValue out;
    out.value = integral(fine);
    const cplx rough = integral(coarse);
    const cplx s_end(s_max, 2.0 * mu);
    const double g_end = std::abs(std::exp(nu_tilde * s_end) * ext.eval_log(s_end, omega));
    const double dist = std::max(mu, std::abs(s_max - s.real()));
    out.error_estimate = std::abs(out.value - rough) +
                         std::abs(std::exp(-nu_tilde * s)) * g_end / (std::numbers::pi * (v.nu - nu_tilde) * dist);
    if (out.error_estimate > settings.tolerance) throw AccuracyError("contour_v1 quadrature did not converge", out.error_estimate);
    return out;
}

DecayFitReport verify_approximation(const PotentialSpec& v, const ApproximationParams& params,
                                    const std::vector<double>& mu_grid, const std::vector<double>& x_grid,
                                    double n_floor) {
    if (x_grid.empty()) throw ValidationError("verify_approximation: empty x grid");
    if (mu_grid.size() < 2) throw ValidationError("verify_approximation: mu grid needs at least two values");
    DecayFitReport rep;
    rep.mu_grid = mu_grid;
    rep.n_floor = n_floor;
    const double noise = 1e-13 * std::max(1.0, v.sup_abs());
    std::vector<double> mus, errs;
    for (double mu : mu_grid) {
        const auto approx = build_approximation(v, mu, params);
        double worst = 0.0;
        for (double x : x_grid) {
            const double diff = approx->eval_real(x) - v.eval(x);
            worst = std::max(worst, std::pow(1.0 + x * x, 0.5 * approx->nu_tilde()) * std::abs(diff));
        }
        rep.sup_errors.push_back(worst);
        if (worst > noise) {
            mus.push_back(mu);
            errs.push_back(worst);
        }
    }
    if (mus.size() < 2) {
        rep.below_tolerance = true;
        rep.passed = true;
        return rep;
    }
    const auto f = fit_loglog(mus, errs);
    rep.slope = f.slope;
    rep.intercept = f.intercept;
    rep.rms_residual = f.rms_residual;
    rep.passed = rep.slope >= n_floor;
    return rep;
}

}  // namespace resonette
