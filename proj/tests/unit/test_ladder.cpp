#include <doctest.h>

#include <cmath>

#include "resonette/errors.hpp"
#include "resonette/ladder.hpp"

using namespace resonette;

namespace {

ResonanceSet covering_set(std::vector<cplx> values) {
    ResonanceSet s;
    s.window = Window{0.7, 1.3, 0.2};
    for (cplx v : values) s.entries.push_back({v, 1, 0.0});
    return s;
}

LimitSet limits(const std::vector<cplx>& values) {
    LimitSet l;
    for (cplx v : values) {
        LimitEntry e;
        e.rho = v;
        l.entries.push_back(e);
    }
    return l;
}

}  // namespace

TEST_CASE("property P holds vacuously on an empty window") {
    const Interval i{0.9, 1.1}, j{0.8, 1.2};
    const PropertyPInstance p = check_property_P(covering_set({}), i, j, 0.05, 0.1, 0.1, 1.0, 0.1);
    CHECK(p.count == 0);
    CHECK(p.verdict.containment);
    CHECK(p.verdict.count);
    CHECK(p.separation == doctest::Approx(0.1));
    CHECK(p.diagnostic_threshold == doctest::Approx(omega_diagnostic(0.05)));
    CHECK(p.verdict.separation_diagnostic);
    CHECK(p.verdict.holds_diagnostic());
    // The literal threshold h^-delta omega_h is far above any desk-scale separation.
    CHECK(p.literal_threshold > 4.0 * p.separation);
    CHECK_FALSE(p.verdict.holds_literal());
}

TEST_CASE("property P counts only the box and flags escapes from I") {
    const Interval i{0.9, 1.1}, j{0.8, 1.2};
    const auto s = covering_set({{1.0, -0.01}, {0.85, -0.02}, {1.0, -0.1}, {1.25, -0.01}});
    const PropertyPInstance p = check_property_P(s, i, j, 0.05, 0.1, 0.1, 1.0, 0.1);
    CHECK(p.count == 2);
    REQUIRE(p.outside_i.size() == 1);
    CHECK(p.outside_i[0] == cplx(0.85, -0.02));
    CHECK_FALSE(p.verdict.containment);
}

TEST_CASE("I equal to J has no separation") {
    const Interval j{0.8, 1.2};
    const PropertyPInstance p = check_property_P(covering_set({}), j, j, 0.05, 0.1, 0.1, 1.0, 0.1);
    CHECK(p.separation == 0.0);
    CHECK_FALSE(p.verdict.separation_diagnostic);
}

TEST_CASE("property P preconditions") {
    const Interval i{0.9, 1.1}, j{0.8, 1.2};
    const auto s = covering_set({});
    CHECK_THROWS_AS(check_property_P(s, i, j, 0.2, 0.1, 0.1, 1.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(check_property_P(s, i, j, 0.05, 0.9, 0.1, 1.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(check_property_P(s, j, i, 0.05, 0.1, 0.1, 1.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(check_property_P(s, {0.9, 1.1}, {0.1, 1.2}, 0.05, 0.1, 0.1, 1.0, 0.1), PreconditionError);
    ResonanceSet shallow = s;
    shallow.window.tau = 0.01;
    CHECK_THROWS_AS(check_property_P(shallow, i, j, 0.05, 0.1, 0.1, 1.0, 0.1), ValidationError);
}

TEST_CASE("omega diagnostic") {
    CHECK(omega_diagnostic(0.1) == doctest::Approx(0.1 * std::sqrt(std::log(10.0))));
    CHECK(omega_diagnostic(0.01) < omega_diagnostic(0.1));
}

TEST_CASE("crosscheck flags a planted |Im|^(1/2) disagreement") {
    const std::vector<cplx> rho{{1.01, -1e-4}, {1.1, -4e-3}};
    std::vector<cplx> close, planted;
    for (cplx r : rho) {
        close.push_back(r + std::pow(std::abs(r.imag()), 3.0));
        planted.push_back(r + std::pow(std::abs(r.imag()), 0.5));
    }
    const CrosscheckReport ok = uniqueness_crosscheck(limits(rho), limits(close));
    CHECK_FALSE(ok.flagged);
    CHECK(ok.max_ratio3 == doctest::Approx(1.0).epsilon(1e-3));
    const CrosscheckReport bad = uniqueness_crosscheck(limits(rho), limits(planted));
    CHECK(bad.flagged);
    for (const auto& p : bad.pairs) CHECK(p.flagged);
    // Different counts cannot agree.
    CHECK(uniqueness_crosscheck(limits(rho), limits({rho[0]})).flagged);
    // Real limits must coincide.
    CHECK(uniqueness_crosscheck(limits({{1.0, 0.0}}), limits({{1.0 + 1e-6, 0.0}})).flagged);
}

TEST_CASE("ladder configuration is validated") {
    LadderConfig c = default_ladder_config(0.09);
    CHECK(c.i.lo > c.j.lo);
    CHECK(c.i.hi < c.j.hi);
    CHECK(c.j.width() <= std::pow(c.h, c.delta));
    c.kmax = 0;
    CHECK_THROWS_AS(run_ladder(c), ValidationError);
    c = default_ladder_config(0.09);
    c.j = {1.0, 1.0};
    CHECK_THROWS_AS(run_ladder(c), ValidationError);
}

TEST_CASE("short ladder keeps the shape resonance and contracts") {
    LadderConfig c = default_ladder_config(0.09);
    c.kmax = 3;
    const LadderResult r = run_ladder(c);
    REQUIRE(r.rungs.size() >= 2);
    REQUIRE_FALSE(r.limit.entries.empty());
    for (const auto& e : r.limit.entries) {
        CHECK(e.rho.imag() <= 0.0);
        CHECK(c.i.contains(e.rho.real()));
    }
    for (double ratio : r.ratios) CHECK(ratio <= 2.0 * r.ratio_bound);
    for (const auto& rung : r.rungs) CHECK(rung.match.success);
}
