#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "resonette/approximation.hpp"
#include "resonette/operator.hpp"
#include "resonette/potential.hpp"
#include "resonette/spectrum.hpp"

namespace resonette {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct PropertyPVerdict {
    bool containment = false;
    bool count = false;
    bool separation_literal = false;
    bool separation_diagnostic = false;
    bool holds_literal() const { return containment && count && separation_literal; }
    bool holds_diagnostic() const { return containment && count && separation_diagnostic; }
};

struct PropertyPInstance {
    double mu_tilde = 0.0, mu = 0.0, delta = 0.0, lambda0 = 0.0, h = 0.0;
    Interval i, j;
    int count = 0;
    double separation = 0.0;            // dist(I, R \ J)
    double literal_threshold = 0.0;     // h^-delta omega_h(mu_tilde)
    double diagnostic_threshold = 0.0;  // mu_tilde sqrt(ln 1/mu_tilde)
    std::vector<cplx> outside_i;        // resonances in the box whose real part leaves I
    PropertyPVerdict verdict;
};

// Property P(mu_tilde, mu; I, J) evaluated on a resonance set whose window covers J - i[0, lambda0 mu_tilde].
PropertyPInstance check_property_P(const ResonanceSet& res, const Interval& i, const Interval& j, double mu_tilde, double mu,
                                   double delta, double lambda0, double h);

// Desk-scale stand-in for omega_h: theta sqrt(ln 1/theta).
double omega_diagnostic(double theta);

struct LadderConfig {
    PotentialSpec potential;
    double h = 0.05;
    double n1 = 1.1;
    double r0 = 1.0;
    double lambda0 = 1.0;
    double mu_tilde = 0.1;
    double delta = 0.1;
    Interval i{0.0, 0.0};
    Interval j{0.0, 0.0};
    ApproximationParams approx;
    int n_match = 3;
    double c_match = 10.0;
    int kmax = 6;
    double mu_floor = 1e-8;
    // Below this value of mu^(N+1) the rung uses V~ directly.
    double saturation = 1e-14;
    double shrink = 0.02;
    Geometry geometry = Geometry::half_even;
    double dx_over_h = 0.2;
    double margin = 3.0;
    int scheme = 4;
    bool require_property = true;
    // Thm 2.2 check at mu' = sqrt(mu_k mu_{k+1}) on each unsaturated rung.
    bool intermediate_checks = false;
};

LadderConfig default_ladder_config(double h);

struct LadderRung {
    int k = 0;
    double mu = 0.0, mu_next = 0.0, theta = 0.0;
    Interval window_re;
    double tau = 0.0;
    double tau_lo = 0.0, tau_hi = 0.0;
    GapResult gap;
    bool saturated = false;       // both V^mu_k and V^mu_{k+1} replaced by V~
    ResonanceSet set;             // Lambda_k
    std::vector<cplx> images;     // b_k applied to each entry of Lambda_k
    std::vector<double> movement; // |b_k(lambda) - lambda|
    double max_movement = 0.0;
    double tolerance = 0.0;       // c_match mu_k^N_match
    MatchResult match;
    double intermediate_distance = -1.0;
    // Largest shift of a tracked value between theta_{k-1} and theta_k (box effect at small angles).
    double link_drift = 0.0;
    PropertyPInstance property;   // diagnostic re-verification on this rung
};

enum class LadderCase { A, B };

struct LimitEntry {
    cplx rho;
    int multiplicity = 1;
    LadderCase tag = LadderCase::A;
    int exit_rung = -1;  // k_j, -1 when never exited
    std::string exit_reason;
    double tail_bound = 0.0;
    std::vector<cplx> history;
    std::vector<double> movements;
};

struct LimitSet {
    std::vector<LimitEntry> entries;
    Interval window;
    double depth = 0.0;
    std::vector<cplx> expanded() const;
};

struct LadderResult {
    LadderConfig config;
    PropertyPInstance property;
    std::vector<LadderRung> rungs;
    LimitSet limit;
    std::string stop_reason;
    // Largest tracked movement per rung and successive ratios.
    std::vector<double> movements;
    std::vector<double> ratios;
    double ratio_bound = 0.0;  // h^(n1 N_match)
};

LadderResult run_ladder(const LadderConfig& config);

struct CrosscheckPair {
    cplx a, b;
    double distance = 0.0;
    double im = 0.0;
    double ratio[3] = {0.0, 0.0, 0.0};  // distance / |Im|^p for p = 1, 2, 3
    bool flagged = false;
};

struct CrosscheckReport {
    MatchResult match;
    std::vector<CrosscheckPair> pairs;
    bool real_parts_agree = true;
    bool flagged = false;
    double max_ratio3 = 0.0;
};

// Pairs are flagged when they differ by more than |Im lambda| (or at all, beyond real_tol, on the real axis).
CrosscheckReport uniqueness_crosscheck(const LimitSet& a, const LimitSet& b, double real_tol = 1e-10);

}  // namespace resonette
