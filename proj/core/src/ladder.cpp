#include "resonette/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "resonette/errors.hpp"

namespace resonette {

double omega_diagnostic(double theta) { return theta * std::sqrt(std::log(1.0 / theta)); }

std::vector<cplx> LimitSet::expanded() const {
    std::vector<cplx> out;
    for (const auto& e : entries)
        for (int m = 0; m < e.multiplicity; ++m) out.push_back(e.rho);
    return out;
}

PropertyPInstance check_property_P(const ResonanceSet& res, const Interval& i, const Interval& j, double mu_tilde, double mu,
                                   double delta, double lambda0, double h) {
    if (!(i.hi >= i.lo) || !(j.hi >= j.lo)) throw ValidationError("property P: malformed interval");
    if (!(mu_tilde > 0.0)) throw PreconditionError("property P: mu_tilde must be positive");
    if (!(mu_tilde <= mu)) throw PreconditionError("property P: need mu_tilde <= mu");
    if (!(mu <= std::pow(h, delta))) throw PreconditionError("property P: need mu <= h^delta");
    if (!(j.lo <= i.lo && i.hi <= j.hi)) throw PreconditionError("property P: I must lie inside J");
    const double diam = std::max(j.hi, lambda0) - std::min(j.lo, lambda0);
    if (!(diam <= std::pow(h, delta))) throw PreconditionError("property P: diam(J u {lambda0}) exceeds h^delta");
    const double depth = lambda0 * mu_tilde;
    if (res.window.re_min > j.lo || res.window.re_max < j.hi || res.window.tau < depth * (1.0 - 1e-12))
        throw ValidationError("property P: resonance set does not cover J - i[0, lambda0 mu_tilde]");

    PropertyPInstance p;
    p.mu_tilde = mu_tilde;
    p.mu = mu;
    p.delta = delta;
    p.lambda0 = lambda0;
    p.h = h;
    p.i = i;
    p.j = j;
    for (const auto& e : res.entries) {
        if (!j.contains(e.value.real()) || e.value.imag() < -depth) continue;
        p.count += e.multiplicity;
        if (!i.contains(e.value.real())) p.outside_i.push_back(e.value);
    }
    p.separation = std::min(i.lo - j.lo, j.hi - i.hi);
    p.literal_threshold = std::pow(h, -delta) * omega_h(mu_tilde, h, 1);
    p.diagnostic_threshold = omega_diagnostic(mu_tilde);
    p.verdict.containment = p.outside_i.empty();
    p.verdict.count = p.count <= static_cast<int>(std::floor(1.0 / delta + 1e-12));
    p.verdict.separation_literal = p.separation >= p.literal_threshold;
    p.verdict.separation_diagnostic = p.separation >= p.diagnostic_threshold && p.separation > 0.0;
    return p;
}

LadderConfig default_ladder_config(double h) {
    LadderConfig c;
    c.potential = make_potential("well_in_island", {});
    c.h = h;
    c.approx.order = 3;
    c.approx.contour.panel_over_mu = 2.0;
    // J spans almost h^delta starting just below lambda0; I keeps the diagnostic separation on both sides.
    const double sep = 1.05 * omega_diagnostic(c.mu_tilde);
    c.j = {c.lambda0 - sep, c.lambda0 - sep + 0.97 * std::pow(h, c.delta)};
    c.i = {c.j.lo + sep, c.j.hi - sep};
    return c;
}

namespace {

struct Tracked {
    LimitEntry entry;
    cplx image;  // latest b_k value
    bool alive = true;
};

std::string dump_sets(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::ostringstream s;
    s.precision(15);
    s << "tracked images:";
    for (cplx z : a) s << " (" << z.real() << "," << z.imag() << ")";
    s << "\nrung set:";
    for (cplx z : b) s << " (" << z.real() << "," << z.imag() << ")";
    return s.str();
}

class Ladder {
public:
    explicit Ladder(const LadderConfig& c) : c_(c), ext_(c.potential, c.approx.order) {
        profile_ = profile_for(c.h, c.n1, c.r0);
        grid_ = auto_grid(c.h, profile_->linear_radius(), c.geometry, c.dx_over_h, c.margin, c.scheme);
    }

    double mu(int k) const { return c_.mu_tilde * std::pow(c_.h, k * c_.n1); }
    bool saturated(double m) const { return std::pow(m, c_.approx.order + 1) < c_.saturation; }

    std::shared_ptr<const SectorFunction> sector(double m) const {
        if (saturated(m)) return std::make_shared<TaylorSector>(ext_, m);
        return build_approximation(c_.potential, m, c_.approx);
    }

    DiscretizedOperator assemble(const SectorFunction& v, double theta, double m) const {
        DiscretizedOperator op = assemble_distorted(v, DistortionMap(profile_, theta), c_.h, grid_);
        op.meta.mu = m;
        return op;
    }

    // Tracks lambda from one operator to the next by inverse iteration and Newton refinement.
    static cplx follow(const DiscretizedOperator& op, cplx lambda) {
        Eigenpair p = inverse_iteration(op.matrix, lambda, 3);
        p = refine_eigenpair(op.matrix, p);
        return p.value;
    }

    const LadderConfig& c_;
    AlmostAnalyticExtension ext_;
    std::shared_ptr<const DistortionProfile> profile_;
    GridSpec grid_;
};

}  // namespace

LadderResult run_ladder(const LadderConfig& config) {
    if (config.kmax < 1) throw ValidationError("ladder needs kmax >= 1");
    if (!(config.j.hi > config.j.lo)) throw ValidationError("ladder needs a non-empty J");
    LadderResult out;
    out.config = config;
    out.ratio_bound = std::pow(config.h, config.n1 * config.n_match);
    Ladder L(config);
    const double jw = config.j.width();
    const int cap = static_cast<int>(std::floor(1.0 / config.delta + 1e-12));

    SpectrumOptions so;
    so.lambda0 = config.lambda0;
    so.residuals = false;

    // Property P at rung 0: P^mu_tilde with theta = mu_tilde and the theta-stability filter.
    {
        auto v0 = L.sector(L.mu(0));
        ResonanceProblem pb{v0, L.profile_, config.h, L.grid_, {}};
        const double depth = config.lambda0 * config.mu_tilde;
        Window w{config.j.lo, config.j.hi, depth};
        SpectrumOptions ps = so;
        ResonanceSet r0 = compute_resonances(pb, config.mu_tilde, w, ps);
        out.property = check_property_P(r0, config.i, config.j, config.mu_tilde, config.mu_tilde, config.delta,
                                        config.lambda0, config.h);
        if (config.require_property && !out.property.verdict.holds_diagnostic())
            throw PreconditionError("property P fails at rung 0 (diagnostic mode)");
    }

    std::vector<Tracked> tracked;
    Interval jprime = config.j;
    std::shared_ptr<const SectorFunction> cur = L.sector(L.mu(0));
    out.stop_reason = "kmax";
    for (int k = 0; k <= config.kmax; ++k) {
        const double mk = L.mu(k), mk1 = L.mu(k + 1), mk2 = L.mu(k + 2);
        if (k > 0 && mk < config.mu_floor) {
            out.stop_reason = "mu_floor";
            break;
        }
        LadderRung rung;
        rung.k = k;
        rung.mu = mk;
        rung.mu_next = mk1;
        rung.theta = mk1;
        rung.saturated = L.saturated(mk) && L.saturated(mk1);
        rung.tolerance = config.c_match * std::pow(mk, config.n_match);
        jprime = {jprime.lo + config.shrink * jw, jprime.hi - config.shrink * jw};
        if (!(jprime.hi > jprime.lo)) throw ValidationError("ladder window J' collapsed; reduce the shrink fraction");
        rung.window_re = jprime;

        const DiscretizedOperator op = L.assemble(*cur, rung.theta, mk);
        const Eigen::VectorXcd ev = eigenvalues(op.matrix);

        // tau_{k+2} from the depths in the bracket [mu_{k+2}, 2 mu_{k+2}].
        rung.tau_lo = mk2;
        rung.tau_hi = 2.0 * mk2;
        std::vector<cplx> probe;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (jprime.contains(ev[i].real()) && ev[i].imag() <= 1e-12 && ev[i].imag() >= -1.5 * rung.tau_hi) probe.push_back(ev[i]);
        rung.gap = find_gap(rung.tau_lo, rung.tau_hi, probe, cap);
        rung.tau = rung.gap.tau;

        SpectrumOptions rs = so;
        rs.refine = true;
        rung.set = resonances_from_eigenvalues(op, ev, nullptr, 0.0, Window{jprime.lo, jprime.hi, rung.tau}, rs);
        rung.set.mu = mk;

        // Diagnostic re-verification of P(mu_{k+1}, mu_k; I, J'_{k+1}).
        {
            const double depth = config.lambda0 * mk1;
            if (depth < 2.0 * config.lambda0 * rung.theta) {
                ResonanceSet deep = resonances_from_eigenvalues(op, ev, nullptr, 0.0, Window{jprime.lo, jprime.hi, depth}, so);
                Interval i = {std::max(config.i.lo, jprime.lo), std::min(config.i.hi, jprime.hi)};
                try {
                    rung.property = check_property_P(deep, i, jprime, mk1, mk, config.delta, config.lambda0, config.h);
                } catch (const PreconditionError&) {
                }
            }
        }

        // Link the previous images (angle theta_{k-1}) to the spectrum at theta_k. Chains whose linked
        // value lies outside the rung window are Case B, frozen at their image.
        if (k > 0) {
            std::vector<int> alive;
            for (int t = 0; t < static_cast<int>(tracked.size()); ++t)
                if (tracked[t].alive) alive.push_back(t);
            std::vector<cplx> imgs;
            for (int t : alive) imgs.push_back(tracked[t].image);
            std::vector<cplx> cands;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                if (std::abs(ev[i].real() - 0.5 * (jprime.lo + jprime.hi)) < jw && ev[i].imag() > -4.0 * rung.theta)
                    cands.push_back(ev[i]);
            MatchResult link = match_points(imgs, cands, std::numeric_limits<double>::infinity());
            std::vector<char> used(cands.size(), 0);
            for (const auto& p : link.pairs) {
                // The partner must be unambiguous: nearer than half the distance to any other candidate.
                double second = std::numeric_limits<double>::infinity();
                for (std::size_t q = 0; q < cands.size(); ++q)
                    if (static_cast<int>(q) != p.target) second = std::min(second, std::abs(cands[q] - cands[p.target]));
                if (!(p.distance < 0.5 * second))
                    throw LadderAbort("ladder: ambiguous link at rung " + std::to_string(k), dump_sets(imgs, cands));
                used[p.target] = 1;
                Tracked& tr = tracked[alive[p.source]];
                const cplx now = cands[p.target];
                rung.link_drift = std::max(rung.link_drift, p.distance);
                if (jprime.contains(now.real()) && now.imag() >= -rung.tau) {
                    tr.entry.history.push_back(now);
                    continue;
                }
                tr.alive = false;
                tr.entry.tag = LadderCase::B;
                tr.entry.exit_rung = k - 1;
                tr.entry.exit_reason = jprime.contains(now.real()) ? "depth" : "real part";
                tr.entry.rho = tr.image;
            }
            // Every member of Lambda_k must continue a chain.
            for (const auto& e : rung.set.entries) {
                int linked = 0;
                for (std::size_t q = 0; q < cands.size(); ++q)
                    if (used[q] && std::abs(cands[q] - e.value) <= 1e-6 * std::max(1.0, std::abs(e.value)) + 1e-3 * rung.tau) ++linked;
                if (linked < e.multiplicity)
                    throw LadderAbort("ladder: rung " + std::to_string(k) + " has a resonance without a predecessor",
                                      dump_sets(imgs, rung.set.expanded()));
            }
            // Use the refined values of Lambda_k for the chains that stay.
            for (int t : alive) {
                Tracked& tr = tracked[t];
                if (!tr.alive) continue;
                cplx& last = tr.entry.history.back();
                double best = std::numeric_limits<double>::infinity();
                cplx pick = last;
                for (const auto& e : rung.set.entries)
                    if (std::abs(e.value - last) < best) {
                        best = std::abs(e.value - last);
                        pick = e.value;
                    }
                last = pick;
            }
        } else {
            // One tracked chain per unit of multiplicity.
            for (const auto& e : rung.set.entries)
                for (int m = 0; m < e.multiplicity; ++m) {
                    Tracked tr;
                    tr.entry.history.push_back(e.value);
                    tracked.push_back(tr);
                }
        }

        // Images b_k(lambda) on P^{mu_{k+1}} at the same angle.
        std::shared_ptr<const SectorFunction> next = L.sector(mk1);
        std::vector<cplx> values;
        for (const auto& tr : tracked)
            if (tr.alive) values.push_back(tr.entry.history.back());
        std::vector<cplx> images(values.size());
        if (rung.saturated) {
            images = values;
        } else if (!values.empty()) {
            const DiscretizedOperator op_next = L.assemble(*next, rung.theta, mk1);
            bool multiple = false;
            for (const auto& e : rung.set.entries) multiple = multiple || e.multiplicity > 1;
            if (multiple) {
                const Eigen::VectorXcd ev2 = eigenvalues(op_next.matrix);
                std::vector<cplx> cands;
                for (Eigen::Index i = 0; i < ev2.size(); ++i) cands.push_back(ev2[i]);
                MatchResult mr = match_points(values, cands, rung.tolerance);
                for (const auto& p : mr.pairs) images[p.source] = cands[p.target];
            } else {
                for (std::size_t i = 0; i < values.size(); ++i) images[i] = Ladder::follow(op_next, values[i]);
            }
            if (config.intermediate_checks) {
                const double mid = std::sqrt(mk * mk1);
                auto vm = L.sector(mid);
                const DiscretizedOperator op_mid = L.assemble(*vm, rung.theta, mid);
                double worst = 0.0;
                for (cplx v : values) worst = std::max(worst, std::abs(Ladder::follow(op_mid, v) - v));
                rung.intermediate_distance = worst;
            }
        }
        rung.match = match_points(values, images, rung.tolerance);
        if (!rung.match.success)
            throw LadderAbort("ladder: rung " + std::to_string(k) + " images moved beyond c mu_k^N_match", dump_sets(values, images));
        std::size_t idx = 0;
        for (auto& tr : tracked) {
            if (!tr.alive) continue;
            const double m = std::abs(images[idx] - values[idx]);
            tr.image = images[idx];
            tr.entry.movements.push_back(m);
            rung.images.push_back(images[idx]);
            rung.movement.push_back(m);
            rung.max_movement = std::max(rung.max_movement, m);
            ++idx;
        }
        out.movements.push_back(rung.max_movement);
        out.rungs.push_back(std::move(rung));
        cur = next;

        bool any_alive = false;
        for (const auto& tr : tracked) any_alive = any_alive || tr.alive;
        if (!any_alive) {
            out.stop_reason = "empty";
            break;
        }
        if (out.rungs.back().saturated) {
            out.stop_reason = "saturated";
            break;
        }
    }

    const double q = out.ratio_bound;
    for (auto& tr : tracked) {
        if (tr.alive) {
            tr.entry.tag = LadderCase::A;
            tr.entry.rho = tr.image;
            const double last = tr.entry.movements.empty() ? 0.0 : tr.entry.movements.back();
            tr.entry.tail_bound = last * q / (1.0 - q);
        }
    }
    // Merge copies of a multiple entry back together.
    for (const auto& tr : tracked) {
        bool merged = false;
        for (auto& e : out.limit.entries)
            if (e.rho == tr.entry.rho && e.tag == tr.entry.tag) {
                ++e.multiplicity;
                merged = true;
                break;
            }
        if (!merged) out.limit.entries.push_back(tr.entry);
    }
    out.limit.window = config.j;
    out.limit.depth = out.rungs.empty() ? 0.0 : out.rungs.front().tau;
    for (std::size_t k = 1; k < out.movements.size(); ++k)
        out.ratios.push_back(out.movements[k - 1] > 0 ? out.movements[k] / out.movements[k - 1] : 0.0);
    return out;
}

CrosscheckReport uniqueness_crosscheck(const LimitSet& a, const LimitSet& b, double real_tol) {
    CrosscheckReport rep;
    const auto pa = a.expanded(), pb = b.expanded();
    rep.match = match_points(pa, pb, std::numeric_limits<double>::infinity());
    rep.real_parts_agree = rep.match.unmatched_source.empty() && rep.match.unmatched_target.empty();
    for (const auto& p : rep.match.pairs) {
        CrosscheckPair c;
        c.a = pa[p.source];
        c.b = pb[p.target];
        c.distance = p.distance;
        c.im = std::max(std::abs(c.a.imag()), std::abs(c.b.imag()));
        if (c.im > 0) {
            for (int q = 0; q < 3; ++q) c.ratio[q] = c.distance / std::pow(c.im, q + 1);
            c.flagged = c.distance > c.im;
            rep.max_ratio3 = std::max(rep.max_ratio3, c.ratio[2]);
        } else {
            c.flagged = c.distance > real_tol;
            if (c.flagged) rep.real_parts_agree = false;
        }
        rep.flagged = rep.flagged || c.flagged;
        rep.pairs.push_back(c);
    }
    if (!rep.real_parts_agree) rep.flagged = true;
    return rep;
}

}  // namespace resonette
