#include "resonette/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "resonette/errors.hpp"
#include "resonette/linalg.hpp"
#include "resonette/smooth.hpp"

namespace resonette {

namespace {

struct Stencil {
    std::vector<int> inner_offsets;
    std::vector<double> inner;
    std::vector<int> outer_offsets;
    std::vector<double> outer;
};

const Stencil& stencil(int scheme) {
    static const Stencil s2{{0, 1}, {-1.0, 1.0}, {-1, 0}, {-1.0, 1.0}};
    static const Stencil s4{{-1, 0, 1, 2},
                            {1.0 / 24, -27.0 / 24, 27.0 / 24, -1.0 / 24},
                            {-2, -1, 0, 1},
                            {1.0 / 24, -27.0 / 24, 27.0 / 24, -1.0 / 24}};
    return scheme == 2 ? s2 : s4;
}

struct Folded {
    int index;
    double sign;
};

double origin_parity(const GridSpec& g) {
    switch (g.geometry) {
        case Geometry::half_even: return 1.0;
        case Geometry::half_odd: return -1.0;
        case Geometry::radial:
            if (g.dimension % 2 == 1) return ((g.dimension - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
            return -1.0;
        case Geometry::full_line: return -1.0;
    }
    return -1.0;
}

// Ghost nodes are reflected: parity at the origin for half-line grids, odd at Dirichlet walls.
Folded fold(int j, const GridSpec& g) {
    const int n = g.n_points;
    if (j >= 0 && j < n) return {j, 1.0};
    if (j < 0) return {-1 - j, origin_parity(g)};
    return {2 * n - 1 - j, -1.0};
}

// -h^2 L_i D^T (1/J_mid) D (w u), with (L, w) = (1/J, 1) or (J^-1/2, J^-1/2).
Eigen::MatrixXcd kinetic(const GridSpec& g, double h, const std::function<cplx(double)>& jac, DistortionForm form) {
    const int n = g.n_points;
    const double dx = g.spacing();
    const Stencil& st = stencil(g.scheme);
    auto pos = [&](double j) { return g.x_min + (j + 0.5) * dx; };
    auto left = [&](int i) {
        const cplx jv = jac(pos(i));
        return form == DistortionForm::plain ? 1.0 / jv : 1.0 / std::sqrt(jv);
    };
    auto weight = [&](int j) { return form == DistortionForm::plain ? cplx(1.0) : 1.0 / std::sqrt(jac(pos(j))); };
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const double pre = -h * h / (dx * dx);
    for (int i = 0; i < n; ++i) {
        const cplx li = left(i);
        for (std::size_t a = 0; a < st.outer.size(); ++a) {
            const int mid = i + st.outer_offsets[a];
            const cplx jm = jac(pos(mid + 0.5));
            for (std::size_t b = 0; b < st.inner.size(); ++b) {
                const int j = mid + st.inner_offsets[b];
                const Folded f = fold(j, g);
                m(i, f.index) += pre * li * st.outer[a] / jm * st.inner[b] * weight(j) * f.sign;
            }
        }
    }
    return m;
}

void check_wall(const GridSpec& g, const DistortionMap& map, double margin) {
    const double reach = g.geometry == Geometry::full_line ? std::min(-g.x_min, g.x_max) : g.x_max;
    if (map.theta() > 0 && reach < map.profile().linear_radius() + margin)
        throw ValidationError("grid box must extend past the linear region of the distortion (" +
                              std::to_string(map.profile().linear_radius() + margin) + ")");
}

double radial_coefficient(const GridSpec& g) {
    if (g.geometry != Geometry::radial) return 0.0;
    const double n = g.dimension;
    return (n - 1.0) * (n - 3.0) / 4.0;
}

}  // namespace

std::vector<double> GridSpec::nodes() const {
    std::vector<double> x(n_points);
    const double dx = spacing();
    for (int i = 0; i < n_points; ++i) x[i] = x_min + (i + 0.5) * dx;
    return x;
}

void GridSpec::validate() const {
    if (n_points < 64) throw ValidationError("grid needs at least 64 points");
    if (scheme != 2 && scheme != 4) throw ValidationError("finite-difference scheme must be 2 or 4");
    if (!(x_max > x_min)) throw ValidationError("grid box is empty");
    if (geometry != Geometry::full_line && x_min != 0.0) throw ValidationError("half-line grids start at 0");
    if (geometry == Geometry::radial && dimension < 1) throw ValidationError("radial dimension must be positive");
}

std::string to_string(Geometry g) {
    switch (g) {
        case Geometry::full_line: return "full";
        case Geometry::half_even: return "even";
        case Geometry::half_odd: return "odd";
        case Geometry::radial: return "radial";
    }
    return "?";
}

Geometry geometry_from_string(const std::string& s) {
    if (s == "full") return Geometry::full_line;
    if (s == "even") return Geometry::half_even;
    if (s == "odd") return Geometry::half_odd;
    if (s == "radial") return Geometry::radial;
    throw ValidationError("unknown geometry '" + s + "' (expected full, even, odd or radial)");
}

GridSpec auto_grid(double h, double linear_radius, Geometry geometry, double dx_over_h, double margin, int scheme) {
    GridSpec g;
    g.geometry = geometry;
    g.scheme = scheme;
    g.x_max = linear_radius + margin;
    g.x_min = geometry == Geometry::full_line ? -g.x_max : 0.0;
    g.n_points = std::max(64, static_cast<int>(std::ceil((g.x_max - g.x_min) / (dx_over_h * h))));
    return g;
}

DiscretizedOperator assemble_distorted(const SectorFunction& v, const DistortionMap& map, double h, const GridSpec& grid,
                                       const AssemblyOptions& options) {
    grid.validate();
    if (map.theta() > v.mu_limit() * (1.0 + 1e-12)) throw DomainError("distortion angle exceeds the approximation angle");
    check_wall(grid, map, options.wall_margin);
    DiscretizedOperator op;
    op.grid = grid;
    op.meta.h = h;
    op.meta.mu = v.mu_limit();
    op.meta.theta = map.theta();
    op.meta.kind = OperatorKind::distorted;
    op.meta.form = options.form;
    if (grid.spacing() > options.max_dx_over_h * h)
        op.meta.warnings.push_back("grid spacing " + std::to_string(grid.spacing()) + " exceeds " +
                                   std::to_string(options.max_dx_over_h) + " h");
    op.matrix = kinetic(grid, h, [&](double x) { return map.dphi(x); }, options.form);
    const double rc = radial_coefficient(grid);
    const auto x = grid.nodes();
    for (int i = 0; i < grid.n_points; ++i) {
        const cplx r = map.phi(std::abs(x[i]));
        cplx d = v.eval_sector(r, x[i] < 0 ? -1 : 1);
        if (rc != 0.0) d += h * h * rc / (r * r);
        op.matrix(i, i) += d;
    }
    return op;
}

DiscretizedOperator assemble_free(const DistortionMap& map, double h, const GridSpec& grid, const AssemblyOptions& options) {
    grid.validate();
    check_wall(grid, map, options.wall_margin);
    DiscretizedOperator op;
    op.grid = grid;
    op.meta.h = h;
    op.meta.theta = map.theta();
    op.meta.kind = OperatorKind::free;
    op.meta.form = options.form;
    op.matrix = kinetic(grid, h, [&](double x) { return map.dphi(x); }, options.form);
    const double rc = radial_coefficient(grid);
    if (rc != 0.0) {
        const auto x = grid.nodes();
        for (int i = 0; i < grid.n_points; ++i) {
            const cplx r = map.phi(x[i]);
            op.matrix(i, i) += h * h * rc / (r * r);
        }
    }
    return op;
}

DiscretizedOperator assemble_uniform_dilation(const PotentialSpec& v, double theta, double h, const GridSpec& grid) {
    grid.validate();
    DiscretizedOperator op;
    op.grid = grid;
    op.meta.h = h;
    op.meta.theta = theta;
    op.meta.mu = theta;
    op.meta.kind = OperatorKind::distorted;
    const cplx rot = std::polar(1.0, theta);
    op.matrix = kinetic(grid, h, [&](double) { return rot; }, DistortionForm::plain);
    const double rc = radial_coefficient(grid);
    const auto x = grid.nodes();
    for (int i = 0; i < grid.n_points; ++i) {
        const cplx r = rot * x[i];
        op.matrix(i, i) += v.eval_analytic(r) + (rc != 0.0 ? h * h * rc / (r * r) : cplx(0.0));
    }
    return op;
}

DiscretizedOperator assemble_real(const std::function<double(double)>& v, double h, const GridSpec& grid) {
    grid.validate();
    DiscretizedOperator op;
    op.grid = grid;
    op.meta.h = h;
    op.meta.kind = OperatorKind::distorted;
    op.matrix = kinetic(grid, h, [](double) { return cplx(1.0); }, DistortionForm::plain);
    const double rc = radial_coefficient(grid);
    const auto x = grid.nodes();
    for (int i = 0; i < grid.n_points; ++i) op.matrix(i, i) += v(x[i]) + (rc != 0.0 ? h * h * rc / (x[i] * x[i]) : 0.0);
    return op;
}

Eigen::MatrixXd auxiliary_oscillator(const GridSpec& grid, double h, double big_r) {
    Eigen::MatrixXd m = kinetic(grid, h, [](double) { return cplx(1.0); }, DistortionForm::plain).real();
    m = 0.5 * (m + m.transpose()).eval();
    const double rc = radial_coefficient(grid);
    const auto x = grid.nodes();
    for (int i = 0; i < grid.n_points; ++i) m(i, i) += x[i] * x[i] / (big_r * big_r) + (rc != 0.0 ? h * h * rc / (x[i] * x[i]) : 0.0);
    return m;
}

ReferenceOptions reference_options_for(const PotentialSpec& v, double lambda0, double n1) {
    ReferenceOptions o;
    o.lambda0 = lambda0;
    o.n1 = n1;
    o.sup_v = v.sup_abs();
    o.sup_grad = v.sup_gradient();
    return o;
}

DiscretizedOperator assemble_reference(const DiscretizedOperator& op, const ReferenceOptions& options) {
    if (op.meta.kind != OperatorKind::distorted) throw PreconditionError("reference operator needs a distorted operator");
    const double c0 = options.c0 > 0 ? options.c0 : 1.0 + options.sup_grad;
    if (!(c0 > options.sup_grad)) throw PreconditionError("absorber strength C0 must exceed sup |V'|");
    const double h = op.meta.h;
    Absorber ab;
    ab.c0 = c0;
    ab.big_r = 2.0 * options.n1 * std::log(1.0 / h);
    ab.cutoff = 1.0 + 2.0 * options.lambda0 + options.sup_v;
    const Eigen::MatrixXd osc = auxiliary_oscillator(op.grid, h, ab.big_r);
    const double upper = ab.cutoff * (1.0 + options.taper);
    auto [energies, vectors] = symmetric_eigen_below(osc, upper);
    std::vector<int> keep;
    std::vector<double> chi;
    for (Eigen::Index k = 0; k < energies.size(); ++k) {
        const double c = smooth_cutoff(energies[k], ab.cutoff, upper);
        if (c > 0.0) {
            keep.push_back(static_cast<int>(k));
            chi.push_back(c);
        }
    }
    const int m = static_cast<int>(keep.size());
    ab.basis.resize(op.grid.n_points, m);
    ab.weights.resize(m);
    ab.energies.resize(m);
    for (int k = 0; k < m; ++k) {
        ab.basis.col(k) = vectors.col(keep[k]);
        ab.weights[k] = c0 * chi[k];
        ab.energies[k] = energies[keep[k]];
    }
    DiscretizedOperator ref = op;
    ref.meta.kind = OperatorKind::reference;
    const Eigen::MatrixXd k = ab.basis * ab.weights.asDiagonal() * ab.basis.transpose();
    ref.matrix -= cplx(0.0, op.meta.theta) * k.cast<cplx>();
    ref.absorber = std::move(ab);
    return ref;
}

double numerical_range_distance(const Eigen::MatrixXcd& a, int angles, double* best_angle, double lo, double hi) {
    auto support = [&](double phi) {
        const cplx e = std::polar(1.0, phi);
        const Eigen::MatrixXcd r = e * a;
        const Eigen::MatrixXcd herm = 0.5 * (r + r.adjoint());
        return hermitian_lowest(herm).first;
    };
    double best = -1e300, arg = lo;
    const double step = (hi - lo) / std::max(1, angles - 1);
    for (int k = 0; k < angles; ++k) {
        const double phi = lo + k * step;
        const double f = support(phi);
        if (f > best) {
            best = f;
            arg = phi;
        }
    }
    boost::uintmax_t iters = 60;
    const auto res = boost::math::tools::brent_find_minima([&](double phi) { return -support(phi); }, arg - step, arg + step,
                                                           40, iters);
    if (-res.second > best) {
        best = -res.second;
        arg = res.first;
    }
    if (best_angle) *best_angle = arg;
    return best;
}

NumericalRangeReport numerical_range_bound(const DiscretizedOperator& op, cplx z, int trials, double lambda0, double n1,
                                           unsigned seed) {
    if (op.meta.kind == OperatorKind::reference) throw PreconditionError("numerical range bound applies to the distorted operator");
    if (z.real() < 0.5 * lambda0 || z.real() > 2.0 * lambda0) throw PreconditionError("Re z must lie in [lambda0/2, 2 lambda0]");
    const double floor = std::pow(op.meta.h, n1) * op.meta.theta;
    if (z.imag() < floor * (1.0 - 1e-12)) throw PreconditionError("Im z must be at least h^n1 theta");
    const Eigen::Index n = op.matrix.rows();
    Eigen::MatrixXcd a = op.matrix;
    a.diagonal().array() -= z;

    NumericalRangeReport rep;
    rep.z = z;
    rep.target = 0.5 * z.imag();
    rep.exact_min = std::max(0.0, numerical_range_distance(a, 13, &rep.best_angle, 0.0, std::numbers::pi));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    rep.sampled_min = 1e300;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd u(n);
        for (Eigen::Index i = 0; i < n; ++i) u[i] = cplx(g(rng), g(rng));
        u.normalize();
        rep.sampled_min = std::min(rep.sampled_min, std::abs(u.dot(a * u)));
    }
    rep.margin = rep.exact_min - rep.target;
    return rep;
}

ResolventBoundReport reference_resolvent_bound(const DiscretizedOperator& ref, const std::vector<cplx>& z_grid) {
    ResolventBoundReport rep;
    rep.theta = ref.meta.theta;
    const SchurForm schur(ref.matrix);
    double sup = 0.0;
    for (cplx z : z_grid) {
        ResolventSample s;
        s.z = z;
        const double sigma = schur.sigma_min(z);
        if (!(sigma > 0.0)) {
            s.norm = std::numeric_limits<double>::infinity();
            s.flagged = true;
        } else {
            s.norm = 1.0 / sigma;
            sup = std::max(sup, s.norm);
        }
        rep.samples.push_back(s);
    }
    rep.sup_theta_norm = rep.theta * sup;
    return rep;
}

double fit_resolvent_constant(const std::vector<ResolventBoundReport>& sweep) {
    double c = 0.0;
    for (const auto& r : sweep) c = std::max(c, r.sup_theta_norm);
    return c;
}

}  // namespace resonette
