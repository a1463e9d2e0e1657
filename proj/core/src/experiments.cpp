#include "resonette/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "resonette/distortion.hpp"
#include "resonette/errors.hpp"
#include "resonette/spectrum.hpp"

namespace resonette {

double ShapeModel::harmonic_level(int k) const { return std::sqrt(0.5 * hessian) * (2 * k + 1); }

double agmon_distance(const PotentialSpec& v, double lambda0, double a, double b) {
    if (!(a < b)) throw ValidationError("agmon_distance needs a < b");
    auto f = [&](double x) { return std::sqrt(std::max(v.eval(x) - lambda0, 0.0)); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13, &err);
}

ShapeModel make_shape_model(const PotentialSpec& v) {
    ShapeModel m;
    m.potential = v;
    m.x0 = 0.0;
    m.lambda0 = v.eval(0.0);
    m.hessian = v.deriv(2, 0.0);
    if (!(std::abs(v.deriv(1, 0.0)) < 1e-12) || !(m.hessian > 0.0))
        throw ValidationError("shape model needs a nondegenerate minimum at the origin");
    // Barrier top: first local maximum of V on (0, R).
    const double r = v.negligible_radius;
    const int n = 20000;
    double top = -1.0;
    for (int i = 1; i < n; ++i) {
        const double x = r * i / n;
        if (v.deriv(1, x) <= 0.0) {
            top = x;
            break;
        }
    }
    if (top < 0 || !(v.eval(top) > m.lambda0)) throw ValidationError("shape model: no island around the well");
    double lo = top, hi = top;
    while (v.eval(hi) > m.lambda0) {
        hi += 0.25;
        if (hi > r) throw ValidationError("shape model: V stays above lambda0; no exterior region");
    }
    auto g = [&](double x) { return v.eval(x) - m.lambda0; };
    auto tol = [](double a, double b) { return std::abs(b - a) < 1e-15; };
    const auto root = boost::math::tools::bisect(g, lo, hi, tol);
    m.x_b = 0.5 * (root.first + root.second);
    double top_x = top;
    {
        // Refine the maximum by bisection on V'.
        auto d = [&](double x) { return v.deriv(1, x); };
        double a = 0.5 * top, b = top;
        if (d(a) > 0 && d(b) <= 0) {
            const auto t = boost::math::tools::bisect(d, a, b, tol);
            top_x = 0.5 * (t.first + t.second);
        }
    }
    m.barrier = top_x;
    m.s0 = agmon_distance(v, m.lambda0, m.x0, m.x_b);
    return m;
}

ShapeConfig default_shape_config() {
    ShapeConfig c;
    c.potential = make_potential("well_in_island", {});
    c.approx.order = 6;
    return c;
}

ShapeReport run_shape_experiment(const std::vector<double>& h_list, const ShapeConfig& config) {
    if (h_list.size() < 3) throw ValidationError("shape experiment needs at least three values of h");
    ShapeReport rep;
    rep.model = make_shape_model(config.potential);
    rep.h_list = h_list;
    const ShapeModel& m = rep.model;
    const double e0 = m.harmonic_level(0), e1 = m.harmonic_level(1);
    int kmax = 0;
    for (int k : config.levels) kmax = std::max(kmax, k);
    double eps = std::min(0.5 * e1, (m.harmonic_level(kmax + 1) - m.harmonic_level(kmax)) / 3.0);
    if (config.eps > 0) {
        if (config.eps > eps) throw ValidationError("shape experiment: eps exceeds the admissible level spacing");
        eps = config.eps;
    }
    rep.eps = eps;
    rep.target_slope = -2.0 * m.s0;
    (void)e0;

    std::vector<double> fit_h, fit_defect, fit_inv, fit_logim;
    for (double h : h_list) {
        const double mu = std::min(std::pow(h, config.delta), config.mu_cap);
        const double theta = mu;
        const double mu_tilde = std::pow(h, 2.0 + config.delta);
        auto profile = profile_for(h, config.n1, config.r0);
        auto v = build_approximation(config.potential, mu, config.approx);
        for (int parity = 0; parity < 2; ++parity) {
            std::vector<int> wanted;
            for (int k : config.levels)
                if (k % 2 == parity) wanted.push_back(k);
            if (wanted.empty()) continue;
            const Geometry g = parity == 0 ? Geometry::half_even : Geometry::half_odd;
            ResonanceProblem pb{v, profile, h, auto_grid(h, profile->linear_radius(), g, config.dx_over_h, config.margin, config.scheme), {}};
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int k : wanted) {
                lo = std::min(lo, m.lambda0 + (m.harmonic_level(k) - eps) * h);
                hi = std::max(hi, m.lambda0 + (m.harmonic_level(k) + eps) * h);
            }
            SpectrumOptions so;
            so.lambda0 = m.lambda0;
            const ResonanceSet res = compute_resonances(pb, theta, Window{lo, hi, m.lambda0 * mu_tilde}, so);
            for (int k : wanted) {
                ShapeRow row;
                row.h = h;
                row.mu = mu;
                row.theta = theta;
                row.mu_tilde = mu_tilde;
                row.level = k;
                row.predicted = m.lambda0 + m.harmonic_level(k) * h;
                double best = std::numeric_limits<double>::infinity();
                for (const auto& e : res.entries) {
                    const double d = std::abs(e.value.real() - row.predicted);
                    if (d <= eps * h) {
                        row.in_window += e.multiplicity;
                        // The resonance nearest the real axis is the one attached to the level.
                        if (-e.value.imag() < best) {
                            best = -e.value.imag();
                            row.rho = e.value;
                            row.residual = e.residual;
                            row.found = true;
                        }
                    }
                }
                if (!row.found) {
                    std::ostringstream s;
                    s << "level " << k << " missing at h=" << h;
                    rep.missing.push_back(s.str());
                } else {
                    row.defect = std::abs(row.rho.real() - row.predicted);
                    if (row.in_window != 1) rep.windows_ok = false;
                    if (!(row.rho.imag() < 0.0)) rep.widths_negative = false;
                    if (k == 0) {
                        fit_h.push_back(h);
                        fit_defect.push_back(row.defect);
                        fit_inv.push_back(1.0 / h);
                        fit_logim.push_back(std::log(std::abs(row.rho.imag())));
                    }
                }
                rep.rows.push_back(row);
            }
        }
    }
    // Level ordering per h, and width monotonicity per level in 1/h.
    for (double h : h_list) {
        double prev = -std::numeric_limits<double>::infinity();
        for (int k = 0; k <= kmax; ++k)
            for (const auto& r : rep.rows)
                if (r.h == h && r.level == k && r.found) {
                    if (!(r.rho.real() > prev)) rep.ordering_ok = false;
                    prev = r.rho.real();
                }
    }
    for (int k : config.levels) {
        std::vector<std::pair<double, double>> hw;
        for (const auto& r : rep.rows)
            if (r.level == k && r.found) hw.push_back({r.h, std::abs(r.rho.imag())});
        std::sort(hw.begin(), hw.end());
        for (std::size_t i = 1; i < hw.size(); ++i)
            if (!(hw[i].second > hw[i - 1].second)) rep.widths_monotone = false;
    }
    if (fit_h.size() >= 2) {
        rep.defect_fit = fit_loglog(fit_h, fit_defect);
        rep.im_fit = fit_line(fit_inv, fit_logim);
        rep.im_rel_error = std::abs(rep.im_fit.slope - rep.target_slope) / std::abs(rep.target_slope);
        rep.defect_ok = rep.defect_fit.slope >= config.defect_slope_min;
        rep.im_ok = rep.im_rel_error <= config.im_slope_rel_tol;
    }
    return rep;
}

namespace {

double support_scale(const PotentialSpec& v) {
    const double sup = v.sup_abs();
    if (sup == 0.0) return 1.0;
    const double r = v.negligible_radius;
    const int n = 20000;
    for (int i = n; i >= 0; --i) {
        const double x = r * i / n;
        if (std::abs(v.eval(x)) > 1e-6 * sup || std::abs(v.eval(-x)) > 1e-6 * sup) return std::max(x, 1.0);
    }
    return 1.0;
}

}  // namespace

ClassicalCheck classical_nontrapping_check(const PotentialSpec& v, double lambda0, double t_max, int samples) {
    ClassicalCheck c;
    const double support = support_scale(v);
    c.escape_radius = 3.0 * support;
    c.t_max = t_max;
    const double dt = 1e-3 * std::max(1.0, support) / std::sqrt(std::max(lambda0, 1e-3));
    auto rhs = [&](double x, double xi, double& dx, double& dxi) {
        dx = 2.0 * xi;
        dxi = -v.deriv(1, x);
    };
    for (int i = 0; i < samples; ++i) {
        const double x0 = -support + 2.0 * support * i / (samples - 1);
        const double kinetic = lambda0 - v.eval(x0);
        if (kinetic < 0.0) continue;
        for (int sign : {1, -1}) {
            if (kinetic == 0.0 && sign < 0) continue;
            double x = x0, xi = sign * std::sqrt(kinetic), t = 0.0;
            ++c.samples;
            bool escaped = false;
            while (t < t_max) {
                double k1x, k1p, k2x, k2p, k3x, k3p, k4x, k4p;
                rhs(x, xi, k1x, k1p);
                rhs(x + 0.5 * dt * k1x, xi + 0.5 * dt * k1p, k2x, k2p);
                rhs(x + 0.5 * dt * k2x, xi + 0.5 * dt * k2p, k3x, k3p);
                rhs(x + dt * k3x, xi + dt * k3p, k4x, k4p);
                x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
                xi += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
                t += dt;
                if (std::abs(x) > c.escape_radius) {
                    escaped = true;
                    break;
                }
            }
            if (escaped) {
                c.longest_escape = std::max(c.longest_escape, t);
            } else {
                if (c.trapped == 0) {
                    c.trapped_x = x0;
                    c.trapped_xi = sign * std::sqrt(kinetic);
                }
                ++c.trapped;
            }
        }
    }
    c.non_trapping = c.trapped == 0 && c.samples > 0;
    return c;
}

NontrapConfig default_nontrap_config() {
    NontrapConfig c;
    c.potential = make_potential("sech2", {});
    c.approx.order = 6;
    return c;
}

bool NontrapReport::passed() const {
    if (!classical.non_trapping || rows.empty()) return false;
    for (const auto& r : rows)
        if (r.count != 0) return false;
    return true;
}

NontrapReport run_nontrapping_experiment(const std::vector<double>& h_list, const NontrapConfig& config) {
    NontrapReport rep;
    rep.classical = classical_nontrapping_check(config.potential, config.lambda0, config.t_max);
    if (!rep.classical.non_trapping) {
        std::ostringstream s;
        s << "energy " << config.lambda0 << " is trapping for " << config.potential.name << ": sample x=" << rep.classical.trapped_x
          << ", xi=" << rep.classical.trapped_xi << " stays inside radius " << rep.classical.escape_radius;
        throw PreconditionError(s.str());
    }
    const bool flat = config.potential.name == "free";
    for (double h : h_list) {
        NontrapRow row;
        row.h = h;
        row.mu = std::min(config.c_mu * h * std::log(1.0 / h), config.approx.mu_max);
        const double theta = row.mu;
        auto profile = profile_for(h, config.n1, config.r0);
        std::shared_ptr<const SectorFunction> v;
        if (flat)
            v = std::make_shared<ExactContinuation>(config.potential);
        else
            v = build_approximation(config.potential, row.mu, config.approx);
        const double re_lo = config.lambda0 - 2.0 * config.eps, re_hi = config.lambda0 + 2.0 * config.eps;
        const double depth = config.lambda0 * row.mu;
        row.min_distance = std::numeric_limits<double>::infinity();
        for (Geometry g : {Geometry::half_even, Geometry::half_odd}) {
            const GridSpec grid = auto_grid(h, profile->linear_radius(), g, config.dx_over_h, config.margin, config.scheme);
            const DiscretizedOperator op = assemble_distorted(*v, DistortionMap(profile, theta), h, grid);
            const Eigen::VectorXcd ev = eigenvalues(op.matrix);
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                const cplx z = ev[i];
                const double dx = std::max({re_lo - z.real(), z.real() - re_hi, 0.0});
                const double dy = std::max({-depth - z.imag(), z.imag() - 1e-10, 0.0});
                if (dx == 0.0 && dy == 0.0) {
                    ++row.count;
                    row.inside.push_back(z);
                    row.min_distance = 0.0;
                } else {
                    row.min_distance = std::min(row.min_distance, std::hypot(dx, dy));
                }
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace resonette
