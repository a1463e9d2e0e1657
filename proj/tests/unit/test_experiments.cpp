#include <doctest.h>

#include <cmath>

#include "resonette/errors.hpp"
#include "resonette/experiments.hpp"

using namespace resonette;

namespace {

// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double dx = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
    return s * dx / 3.0;
}

}  // namespace

TEST_CASE("agmon distance of a parabola") {
    const PotentialSpec v = make_custom_potential("parabola", 0.0, 4, 10.0, [](double x, int order, double* out) {
        out[0] = 1.0 + x * x;
        if (order >= 1) out[1] = 2.0 * x;
        if (order >= 2) out[2] = 2.0;
        for (int k = 3; k <= order; ++k) out[k] = 0.0;
    });
    CHECK(agmon_distance(v, 1.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(agmon_distance(v, 2.0, 0.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(agmon_distance(v, 1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("shape model of the well in an island") {
    const PotentialSpec v = make_potential("well_in_island");
    const ShapeModel m = make_shape_model(v);
    // (1 + x^2) exp(-x^2/2): minimum 1 at 0, V''(0) = 1, barrier top at x = 1.
    CHECK(m.lambda0 == doctest::Approx(1.0));
    CHECK(m.hessian == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.barrier == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(v.eval(m.x_b) - 1.0) < 1e-13);
    CHECK(m.x_b == doctest::Approx(1.5852010652445).epsilon(1e-11));
    const double s0 = simpson([](double x) { return std::sqrt(std::max((1 + x * x) * std::exp(-x * x / 2) - 1.0, 0.0)); }, 0.0,
                              m.x_b, 200000);
    CHECK(m.s0 == doctest::Approx(s0).epsilon(1e-7));
    CHECK(m.s0 == doctest::Approx(0.5016349446290).epsilon(1e-10));
    CHECK(m.harmonic_level(0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(m.harmonic_level(2) == doctest::Approx(5.0 * std::sqrt(0.5)));
    CHECK_THROWS_AS(make_shape_model(make_potential("gaussian_barrier")), ValidationError);
}

TEST_CASE("classical flow escapes for barriers and is trapped in the island") {
    CHECK(classical_nontrapping_check(make_potential("sech2"), 1.0).non_trapping);
    CHECK(classical_nontrapping_check(make_potential("free"), 1.0).non_trapping);
    const ClassicalCheck c = classical_nontrapping_check(make_potential("well_in_island"), 1.05);
    CHECK_FALSE(c.non_trapping);
    CHECK(c.trapped > 0);
    CHECK(std::abs(c.trapped_x) < 1.6);
}

TEST_CASE("trapping potentials are rejected by the non-trapping experiment") {
    NontrapConfig c = default_nontrap_config();
    c.potential = make_potential("well_in_island");
    CHECK_THROWS_AS(run_nontrapping_experiment({0.1}, c), PreconditionError);
}

TEST_CASE("shape experiment validates its inputs") {
    CHECK_THROWS_AS(run_shape_experiment({0.1, 0.08}, default_shape_config()), ValidationError);
}
