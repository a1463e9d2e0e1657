#include "resonette/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "resonette/errors.hpp"

namespace resonette {

int ResonanceSet::total_count() const {
    int c = 0;
    for (const auto& e : entries) c += e.multiplicity;
    return c;
}

std::vector<cplx> ResonanceSet::expanded() const {
    std::vector<cplx> out;
    for (const auto& e : entries)
        for (int k = 0; k < e.multiplicity; ++k) out.push_back(e.value);
    return out;
}

DiscretizedOperator ResonanceProblem::assemble(double theta) const {
    if (!potential || !profile) throw ValidationError("resonance problem needs a potential and a distortion profile");
    return assemble_distorted(*potential, DistortionMap(profile, theta), h, grid, assembly);
}

std::string grid_fingerprint(const GridSpec& g) {
    std::ostringstream s;
    s << to_string(g.geometry) << ":" << g.x_min << ":" << g.x_max << ":" << g.n_points << ":o" << g.scheme;
    if (g.geometry == Geometry::radial) s << ":n" << g.dimension;
    return s.str();
}

ResonanceSet compute_resonances(const ResonanceProblem& problem, double theta, const Window& window,
                                const SpectrumOptions& options) {
    const DiscretizedOperator op = problem.assemble(theta);
    if (!options.stability_check) return compute_resonances(op, nullptr, window, options);
    double other = options.stability_factor * theta;
    if (other > problem.potential->mu_limit()) other = theta / options.stability_factor;
    const DiscretizedOperator comp = problem.assemble(other);
    return compute_resonances(op, &comp, window, options);
}

ResonanceSet compute_resonances(const DiscretizedOperator& op, const DiscretizedOperator* companion, const Window& window,
                                const SpectrumOptions& options) {
    const Eigen::VectorXcd ev = eigenvalues(op.matrix);
    if (!companion) return resonances_from_eigenvalues(op, ev, nullptr, 0.0, window, options);
    const Eigen::VectorXcd ev2 = eigenvalues(companion->matrix);
    return resonances_from_eigenvalues(op, ev, &ev2, companion->meta.theta, window, options);
}

ResonanceSet resonances_from_eigenvalues(const DiscretizedOperator& op, const Eigen::VectorXcd& ev,
                                         const Eigen::VectorXcd* companion_ev, double companion_theta, const Window& window,
                                         const SpectrumOptions& options) {
    const double theta = op.meta.theta;
    if (!(window.re_max > window.re_min) || window.tau < 0) throw ValidationError("malformed resonance window");
    if (theta > 0 && !(window.tau < 2.0 * options.lambda0 * theta))
        throw PreconditionError("window depth must stay below 2 lambda0 theta");
    ResonanceSet out;
    out.window = window;
    out.h = op.meta.h;
    out.mu = op.meta.mu;
    out.theta = theta;
    out.fingerprint = grid_fingerprint(op.grid);

    std::vector<cplx> kept;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const cplx l = ev[i];
        const double slack = options.imag_slack * std::max(1.0, std::abs(l));
        if (!window.contains(l, slack)) continue;
        if (companion_ev) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < companion_ev->size(); ++j) best = std::min(best, std::abs((*companion_ev)[j] - l));
            if (!(best < options.stability_tol * std::max(theta, companion_theta))) {
                out.rejected.push_back(l);
                continue;
            }
        }
        kept.push_back(l);
    }

    // Single-linkage clustering.
    std::sort(kept.begin(), kept.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    std::vector<int> label(kept.size(), -1);
    int clusters = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (label[i] >= 0) continue;
        label[i] = clusters;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < kept.size(); ++b) {
                if (label[b] >= 0) continue;
                if (std::abs(kept[a] - kept[b]) <= options.cluster_tol * std::max(1.0, std::abs(kept[a]))) {
                    label[b] = clusters;
                    stack.push_back(b);
                }
            }
        }
        ++clusters;
    }
    for (int c = 0; c < clusters; ++c) {
        ResonanceEntry e;
        cplx sum = 0.0;
        int m = 0;
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (label[i] == c) {
                sum += kept[i];
                ++m;
            }
        e.value = sum / static_cast<double>(m);
        e.multiplicity = m;
        if (options.residuals || options.refine) {
            Eigenpair p = inverse_iteration(op.matrix, e.value, 3);
            if (options.refine && m == 1) p = refine_eigenpair(op.matrix, p);
            e.residual = p.residual;
            if (options.refine && m == 1) e.value = p.value;
        }
        if (e.value.imag() > 0.0) e.value.imag(0.0);
        out.entries.push_back(e);
    }
    return out;
}

namespace {

const std::vector<std::pair<double, double>>& gl16() {
    static const std::vector<std::pair<double, double>> rule = [] {
        using G = boost::math::quadrature::gauss<double, 16>;
        std::vector<std::pair<double, double>> r;
        for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
            r.emplace_back(G::abscissa()[i], G::weights()[i]);
            r.emplace_back(-G::abscissa()[i], G::weights()[i]);
        }
        return r;
    }();
    return rule;
}

}  // namespace

ProjectorReport contour_projector(const SchurForm& schur, const Box& box, int nodes_per_side, double gap_floor) {
    const Eigen::VectorXcd ev = schur.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const cplx l = ev[i];
        const double dx = std::max({box.re_min - l.real(), l.real() - box.re_max, 0.0});
        const double dy = std::max({box.im_min - l.imag(), l.imag() - box.im_max, 0.0});
        double d;
        if (dx == 0.0 && dy == 0.0)
            d = std::min({l.real() - box.re_min, box.re_max - l.real(), l.imag() - box.im_min, box.im_max - l.imag()});
        else
            d = std::hypot(dx, dy);
        gap = std::min(gap, d);
    }
    if (gap < gap_floor)
        throw DomainError("contour passes within " + std::to_string(gap) + " of the spectrum; choose the box with find_gap");

    const Eigen::Index n = schur.size();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    const cplx corners[4] = {{box.re_min, box.im_min}, {box.re_max, box.im_min}, {box.re_max, box.im_max}, {box.re_min, box.im_max}};
    const int panels = std::max(1, (nodes_per_side + 15) / 16);
    for (int side = 0; side < 4; ++side) {
        const cplx a = corners[side], b = corners[(side + 1) % 4];
        const cplx step = (b - a) / static_cast<double>(panels);
        for (int p = 0; p < panels; ++p) {
            const cplx c = a + (p + 0.5) * step;
            for (const auto& [x, w] : gl16()) {
                const cplx z = c + 0.5 * x * step;
                acc += (0.5 * w) * step * schur.triangular_resolvent(z);
            }
        }
    }
    acc /= cplx(0.0, 2.0 * M_PI);

    ProjectorReport rep;
    rep.boundary_gap = gap;
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(acc);
    const Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > 0.5) ++rep.rank;
        if (i < 16) rep.singular_values.push_back(s[i]);
    }
    rep.idempotency = (acc * acc - acc).norm();
    rep.projector = schur.q() * acc * schur.q().adjoint();
    return rep;
}

ProjectorReport contour_projector(const DiscretizedOperator& op, const Box& box, int nodes_per_side, double gap_floor) {
    return contour_projector(SchurForm(op.matrix), box, nodes_per_side, gap_floor);
}

ProductBoundReport probe_product_bound(const SchurForm& schur, const ResonanceSet& res, const std::vector<cplx>& z_grid,
                                       double gap_floor) {
    ProductBoundReport rep;
    const auto rho = res.expanded();
    for (cplx z : z_grid) {
        bool near = false;
        for (cplx r : rho) near = near || std::abs(z - r) < gap_floor;
        if (near) {
            ++rep.skipped;
            continue;
        }
        ProductSample s;
        s.z = z;
        const double sigma = schur.sigma_min(z);
        s.resolvent_norm = sigma > 0 ? 1.0 / sigma : std::numeric_limits<double>::infinity();
        double prod = 1.0;
        for (cplx r : rho) prod *= std::abs(z - r);
        s.product = s.resolvent_norm * prod;
        rep.sup = std::max(rep.sup, s.product);
        rep.samples.push_back(s);
    }
    return rep;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m = static_cast<int>(cost[0].size());
    if (m < n) throw ValidationError("hungarian: more rows than columns");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assign(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) assign[p[j] - 1] = j - 1;
    return assign;
}

namespace {

// Size of a maximum matching using only edges with cost <= t (augmenting paths).
int matching_size(const std::vector<std::vector<double>>& d, double t) {
    const int n = static_cast<int>(d.size());
    const int m = n ? static_cast<int>(d[0].size()) : 0;
    std::vector<int> match_col(m, -1);
    int size = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<char> seen(m, 0);
        std::function<bool(int)> augment = [&](int r) {
            for (int j = 0; j < m; ++j) {
                if (d[r][j] > t || seen[j]) continue;
                seen[j] = 1;
                if (match_col[j] < 0 || augment(match_col[j])) {
                    match_col[j] = r;
                    return true;
                }
            }
            return false;
        };
        if (augment(i)) ++size;
    }
    return size;
}

}  // namespace

MatchResult match_points(const std::vector<cplx>& source, const std::vector<cplx>& target, double alpha, double c_match) {
    MatchResult res;
    res.alpha = alpha;
    res.c_match = c_match;
    const bool flip = source.size() > target.size();
    const auto& rows = flip ? target : source;
    const auto& cols = flip ? source : target;
    const int n = static_cast<int>(rows.size()), m = static_cast<int>(cols.size());
    if (n > 0) {
        std::vector<std::vector<double>> d(n, std::vector<double>(m));
        std::vector<double> values;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                d[i][j] = std::abs(rows[i] - cols[j]);
                values.push_back(d[i][j]);
            }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::size_t lo = 0, hi = values.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (matching_size(d, values[mid]) == n)
                hi = mid;
            else
                lo = mid + 1;
        }
        const double bottleneck = values[lo];
        const double big = 1e6 * (values.back() + 1.0);
        std::vector<std::vector<double>> cost = d;
        for (auto& row : cost)
            for (auto& c : row)
                if (c > bottleneck) c = big;
        const auto assign = hungarian(cost);
        std::vector<char> used(m, 0);
        for (int i = 0; i < n; ++i) {
            const int j = assign[i];
            used[j] = 1;
            MatchPair p{flip ? j : i, flip ? i : j, d[i][j]};
            res.pairs.push_back(p);
            res.max_distance = std::max(res.max_distance, p.distance);
        }
        for (int j = 0; j < m; ++j)
            if (!used[j]) (flip ? res.unmatched_source : res.unmatched_target).push_back(j);
    } else {
        for (int j = 0; j < m; ++j) (flip ? res.unmatched_source : res.unmatched_target).push_back(j);
    }
    std::sort(res.pairs.begin(), res.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.source < b.source; });
    res.success = res.unmatched_source.empty() && res.unmatched_target.empty() && res.max_distance <= c_match * alpha;
    return res;
}

MatchResult match_sets(const ResonanceSet& source, const ResonanceSet& target, double alpha, double c_match) {
    return match_points(source.expanded(), target.expanded(), alpha, c_match);
}

GapResult find_gap(double d1, double d2, const std::vector<cplx>& resonances, int cap) {
    if (!(d1 < d2)) throw ValidationError("find_gap needs d1 < d2");
    GapResult g;
    const int count = static_cast<int>(resonances.size());
    g.bound = (d2 - d1) / (4.0 * std::max(1, cap));
    std::vector<double> depth;
    for (cplx r : resonances) depth.push_back(-r.imag());
    if (depth.empty()) {
        g.tau = 0.5 * (d1 + d2);
        g.distance = std::numeric_limits<double>::infinity();
        return g;
    }
    auto dist = [&](double t) {
        double best = std::numeric_limits<double>::infinity();
        for (double d : depth) best = std::min(best, std::abs(t - d));
        return best;
    };
    // The distance to the depths peaks at the interval ends or halfway between neighbouring depths.
    std::vector<double> cand{d1, d2};
    std::sort(depth.begin(), depth.end());
    for (std::size_t i = 0; i + 1 < depth.size(); ++i) {
        const double m = 0.5 * (depth[i] + depth[i + 1]);
        if (m > d1 && m < d2) cand.push_back(m);
    }
    g.distance = -1.0;
    for (double t : cand) {
        const double d = dist(t);
        if (d > g.distance) {
            g.distance = d;
            g.tau = t;
        }
    }
    g.bound_holds = count > cap || g.distance >= g.bound;
    return g;
}

GapResult find_gap(double d1, double d2, const ResonanceSet& res, int cap) { return find_gap(d1, d2, res.expanded(), cap); }

double omega_h(double theta, double h, int n) {
    return theta * std::sqrt(std::log(1.0 / theta) + std::pow(h, -n) * std::pow(std::log(1.0 / h), n + 1));
}

}  // namespace resonette
