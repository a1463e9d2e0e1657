#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "resonette/errors.hpp"
#include "resonette/spectrum.hpp"

using namespace resonette;

namespace {

double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
    std::vector<int> perm(cost[0].size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < cost.size(); ++i) s += cost[i][perm[i]];
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Scan of t -> min |t - depth| on a fine grid.
double scan_gap(double d1, double d2, const std::vector<cplx>& res) {
    double best = 0.0;
    for (int k = 0; k <= 200000; ++k) {
        const double t = d1 + (d2 - d1) * k / 200000.0;
        double d = 1e300;
        for (cplx r : res) d = std::min(d, std::abs(t + r.imag()));
        best = std::max(best, d);
    }
    return best;
}

}  // namespace

TEST_CASE("hungarian matches exhaustive search") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4, m = n + trial % 3;
        std::vector<std::vector<double>> c(n, std::vector<double>(m));
        for (auto& row : c)
            for (auto& x : row) x = u(rng);
        const auto a = hungarian(c);
        double s = 0.0;
        std::vector<int> cols = a;
        std::sort(cols.begin(), cols.end());
        CHECK(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
        for (int i = 0; i < n; ++i) s += c[i][a[i]];
        CHECK(s == doctest::Approx(brute_force_assignment(c)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(hungarian({{1.0}, {2.0}}), ValidationError);
}

TEST_CASE("bottleneck matching of shifted sets") {
    const std::vector<cplx> a{{1.0, -0.1}, {1.2, -0.05}, {1.5, -0.2}};
    const MatchResult same = match_points(a, a, 1e-3);
    CHECK(same.success);
    CHECK(same.max_distance == 0.0);
    std::vector<cplx> b = a;
    std::reverse(b.begin(), b.end());
    for (auto& x : b) x += cplx(0.0, 1e-4);
    const MatchResult shifted = match_points(a, b, 1e-4, 1.5);
    CHECK(shifted.success);
    CHECK(shifted.max_distance == doctest::Approx(1e-4).epsilon(1e-9));
    for (const auto& p : shifted.pairs) CHECK(std::abs(a[p.source] - b[p.target]) < 2e-4);
    CHECK_FALSE(match_points(a, b, 1e-5).success);
    b.pop_back();
    const MatchResult missing = match_points(a, b, 1.0);
    CHECK_FALSE(missing.success);
    CHECK(missing.unmatched_source.size() == 1);
}

TEST_CASE("find_gap picks the widest depth gap") {
    const GapResult empty = find_gap(0.02, 0.06, std::vector<cplx>{}, 3);
    CHECK(empty.tau == doctest::Approx(0.04));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(0.0, 0.08);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<cplx> res;
        for (int k = 0; k < 3; ++k) res.push_back(cplx(1.0, -d(rng)));
        const GapResult g = find_gap(0.02, 0.06, res, 3);
        CHECK(g.tau >= 0.02);
        CHECK(g.tau <= 0.06);
        CHECK(g.distance == doctest::Approx(scan_gap(0.02, 0.06, res)).epsilon(1e-4));
        CHECK(g.distance >= 0.04 / 12.0);
        CHECK(g.bound_holds);
    }
    CHECK_THROWS_AS(find_gap(0.06, 0.02, std::vector<cplx>{}, 3), ValidationError);
}

TEST_CASE("contour projector recovers the rank of a non-normal matrix") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    const int n = 30;
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        t(i, i) = cplx(0.1 * i, -0.01 * (i % 5));
        for (int j = i + 1; j < n; ++j) t(i, j) = 0.3 * cplx(g(rng), g(rng));
    }
    Eigen::MatrixXcd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = cplx(g(rng), g(rng));
    const Eigen::MatrixXcd a = s * t * s.inverse();
    const SchurForm schur(a);
    const ProjectorReport r = contour_projector(schur, Box{0.95, 1.25, -0.1, 0.1}, 48);
    CHECK(r.rank == 3);
    CHECK(r.idempotency < 1e-6);
    CHECK(std::abs(r.projector.trace() - cplx(3.0, 0.0)) < 1e-6);
    CHECK_THROWS_AS(contour_projector(schur, Box{1.0, 1.25, -0.1, 0.1}, 48), DomainError);
}

TEST_CASE("omega_h follows its closed form") {
    const double th = 0.05, h = 0.1;
    CHECK(omega_h(th, h) == doctest::Approx(th * std::sqrt(std::log(20.0) + 10.0 * std::pow(std::log(10.0), 2))));
    CHECK(omega_h(th, h, 2) == doctest::Approx(th * std::sqrt(std::log(20.0) + 100.0 * std::pow(std::log(10.0), 3))));
}

TEST_CASE("free operator has no resonances in the window") {
    const double h = 0.1, theta = 0.1;
    const auto p = profile_for(h, 1.1, 1.0);
    const GridSpec g = auto_grid(h, p->linear_radius(), Geometry::half_even, 0.2, 3.0, 4);
    const auto op = assemble_free(DistortionMap(p, theta), h, g);
    const auto comp = assemble_free(DistortionMap(p, theta / 1.25), h, g);
    const ResonanceSet s = compute_resonances(op, &comp, Window{0.7, 0.9, 0.06});
    CHECK(s.total_count() == 0);
    CHECK_THROWS_AS(compute_resonances(op, &comp, Window{0.7, 0.9, 0.2}), PreconditionError);
    CHECK_THROWS_AS(compute_resonances(op, &comp, Window{0.9, 0.7, 0.05}), ValidationError);
}

TEST_CASE("gaussian barrier resonance is theta independent and matches the projector") {
    const double h = 0.1, mu = 0.1;
    const auto p = profile_for(h, 1.1, 1.0);
    ResonanceProblem prob;
    prob.potential = build_approximation(make_potential("gaussian_barrier"), mu, {});
    prob.profile = p;
    prob.h = h;
    prob.grid = auto_grid(h, p->linear_radius(), Geometry::half_even, 0.2, 3.0, 4);
    const Window w{0.55, 0.75, 0.05};
    const ResonanceSet a = compute_resonances(prob, 0.1, w);
    const ResonanceSet b = compute_resonances(prob, 0.07, w);
    REQUIRE(a.total_count() == b.total_count());
    const MatchResult m = match_sets(a, b, 1e-6);
    CHECK(m.success);
    for (const auto& e : a.entries) CHECK(e.residual < 1e-8);
    const ProjectorReport r = contour_projector(prob.assemble(0.1), Box{w.re_min, w.re_max, -w.tau, 0.5 * w.tau});
    CHECK(r.rank == a.total_count());
}
