#include <doctest.h>

#include <cmath>
#include <vector>

#include "resonette/approximation.hpp"
#include "resonette/errors.hpp"
#include "resonette/fit.hpp"

using namespace resonette;

namespace {

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
    return x;
}

double sup_weighted_error(const AnalyticApproximation& a, const PotentialSpec& v, const std::vector<double>& xs) {
    double w = 0.0;
    for (double x : xs) w = std::max(w, std::pow(1.0 + x * x, 0.5 * a.nu_tilde()) * std::abs(a.eval_real(x) - v.eval(x)));
    return w;
}

}  // namespace

TEST_CASE("taylor extension of a gaussian converges at order N+1 off the axis") {
    const PotentialSpec v = make_potential("gaussian_barrier");
    const AlmostAnalyticExtension ext(v, 4);
    // Oracle: closed-form continuation exp(-z^2).
    auto err = [&](double y) { return std::abs(ext.eval_c(cplx(1.0, y)) - 0.8 * std::exp(-cplx(1.0, y) * cplx(1.0, y))); };
    const double e1 = err(0.05), e2 = err(0.025);
    CHECK(e1 < 1e-5);
    CHECK(std::log2(e1 / e2) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("dbar of the extension matches finite differences") {
    for (const char* name : {"gaussian_barrier", "bump"}) {
        const PotentialSpec v = make_potential(name);
        const AlmostAnalyticExtension ext(v, 3);
        const double d = 1e-5;
        for (cplx z : {cplx(0.7, 0.1), cplx(1.3, -0.2), cplx(-0.4, 0.05)}) {
            const cplx fx = (ext.eval_c(z + d) - ext.eval_c(z - d)) / (2 * d);
            const cplx fy = (ext.eval_c(z + cplx(0, d)) - ext.eval_c(z - cplx(0, d))) / (2 * d);
            const cplx fd = 0.5 * (fx + cplx(0, 1) * fy);
            CHECK(std::abs(fd - ext.dbar(z)) < 1e-6 * std::max(1.0, std::abs(ext.dbar(z))));
        }
    }
}

TEST_CASE("V^mu of an entire potential tracks its continuation inside the sector") {
    const PotentialSpec v = make_potential("gaussian_barrier");
    const double mu = 0.05;
    const auto a = build_approximation(v, mu, {});
    for (double r : {0.5, 1.0, 1.7}) {
        const cplx z = std::polar(r, mu);
        CHECK(std::abs(a->eval_sector(z, 1) - v.eval_analytic(z)) < 1e-4);
    }
}

TEST_CASE("V^mu is holomorphic in the sector") {
    const PotentialSpec v = make_potential("well_in_island");
    const auto a = build_approximation(v, 0.1, {});
    const double d = 1e-5;
    for (cplx z : {std::polar(0.8, 0.05), std::polar(1.5, -0.12), std::polar(3.0, 0.15)}) {
        const cplx fx = (a->eval_sector(z + d, 1) - a->eval_sector(z - d, 1)) / (2 * d);
        const cplx fy = (a->eval_sector(z + cplx(0, d), 1) - a->eval_sector(z - cplx(0, d), 1)) / (2 * d);
        CHECK(std::abs(0.5 * (fx + cplx(0, 1) * fy)) < 1e-6 * std::max(1.0, std::abs(fx)));
    }
}

TEST_CASE("even potentials give the same V^mu in both directions") {
    const PotentialSpec v = make_potential("well_in_island");
    const auto a = build_approximation(v, 0.1, {});
    for (double r : {0.3, 1.1, 2.5}) CHECK(std::abs(a->eval_sector(r, 1) - a->eval_sector(r, -1)) < 1e-13);
    CHECK(a->eval_real(-1.3) == doctest::Approx(a->eval_real(1.3)).epsilon(1e-13));
}

TEST_CASE("approximation error of an entire potential decays faster than mu^4 for N = 4") {
    const PotentialSpec v = make_potential("gaussian_barrier");
    ApproximationParams p;
    p.order = 4;
    p.contour.panel_over_mu = 0.5;
    p.contour.tolerance = 1e-6;
    const auto rep = verify_approximation(v, p, {0.1, 0.05, 0.025, 0.0125}, grid(-4, 4, 201), 4.0);
    CHECK_FALSE(rep.below_tolerance);
    CHECK(rep.slope >= 4.0);
    CHECK(rep.passed);
}

TEST_CASE("compact bump reaches the order-N regime once mu resolves its support edge") {
    // Near |x| = width the Taylor radius of convergence shrinks to zero, so the sup error
    // only enters its power law for small mu; successive slopes rise towards N + 1.
    const PotentialSpec v = make_potential("bump");
    ApproximationParams p;
    p.order = 4;
    p.contour.panel_over_mu = 0.5;
    p.contour.tolerance = 1e-6;
    const auto xs = grid(-3, 3, 601);
    std::vector<double> mus{0.025, 0.0125, 0.00625}, errs;
    for (double mu : mus) errs.push_back(sup_weighted_error(*build_approximation(v, mu, p), v, xs));
    const double s1 = std::log2(errs[0] / errs[1]), s2 = std::log2(errs[1] / errs[2]);
    CHECK(s2 > s1);
    CHECK(s2 >= 3.5);
}

TEST_CASE("TaylorSector is the extension itself") {
    const PotentialSpec v = make_potential("sech2");
    const AlmostAnalyticExtension ext(v, 5);
    const TaylorSector t(ext, 0.01);
    const cplx z = std::polar(1.2, 0.005);
    CHECK(t.eval_sector(z, 1) == ext.eval_c(z));
    CHECK(t.eval_sector(z, -1) == ext.eval_c(-z));
    CHECK(t.mu_limit() == 0.01);
}

TEST_CASE("contour evaluation rejects points outside the strip") {
    const PotentialSpec v = make_potential("gaussian_barrier");
    const AlmostAnalyticExtension ext(v, 4);
    CHECK_THROWS_AS(contour_v1(ext, 0.1, 1.0, cplx(0.0, 0.25), 1), DomainError);
    CHECK_THROWS_AS(contour_v1(ext, 0.1, 1.0, cplx(-0.5, 0.0), 1), DomainError);
    const ContourValue c = contour_v1(ext, 0.1, 1.0, cplx(0.3, 0.05), 1);
    CHECK(c.error_estimate < 1e-8);
}

TEST_CASE("verify_approximation validates its grids") {
    const PotentialSpec v = make_potential("gaussian_barrier");
    CHECK_THROWS_AS(verify_approximation(v, {}, {0.1, 0.05}, {}, 4.0), ValidationError);
    CHECK_THROWS_AS(verify_approximation(v, {}, {0.1}, {0.0}, 4.0), ValidationError);
}

TEST_CASE("fit_loglog recovers a planted power law") {
    std::vector<double> x{0.1, 0.05, 0.025}, y;
    for (double t : x) y.push_back(3.0 * std::pow(t, 4.5));
    const LinearFit f = fit_loglog(x, y);
    CHECK(f.slope == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("unknown potentials are rejected") {
    CHECK_THROWS_AS(make_potential("cubic"), ValidationError);
    CHECK_THROWS_AS(make_potential("gaussian_barrier", {{"depth", 1.0}}), ValidationError);
}
