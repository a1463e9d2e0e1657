#pragma once

#include <complex>
#include <string>
#include <vector>

#include "resonette/approximation.hpp"
#include "resonette/fit.hpp"
#include "resonette/operator.hpp"
#include "resonette/potential.hpp"

namespace resonette {

// Point well in an island, in one dimension.
struct ShapeModel {
    PotentialSpec potential;
    double x0 = 0.0;
    double lambda0 = 0.0;
    double x_b = 0.0;      // outer root of V = lambda0
    double barrier = 0.0;  // location of the barrier top
    double hessian = 0.0;  // V''(x0)
    double s0 = 0.0;       // Agmon distance from x0 to x_b
    // e_k for -d^2/dx^2 + V''(x0) x^2 / 2.
    double harmonic_level(int k) const;
};

ShapeModel make_shape_model(const PotentialSpec& v);

// int_a^b sqrt((V - lambda0)_+) dx by adaptive quadrature.
double agmon_distance(const PotentialSpec& v, double lambda0, double a, double b);

struct ShapeConfig {
    PotentialSpec potential;
    double delta = 0.1;
    double n1 = 1.1;
    double r0 = 1.0;
    // Distortion angle; theta = mu = min(h^delta, mu_cap).
    double mu_cap = 0.1;
    std::vector<int> levels{0};
    double dx_over_h = 0.2;
    double margin = 3.0;
    int scheme = 4;
    ApproximationParams approx;
    // Half-width of the level windows in units of h; 0 selects the largest admissible value.
    double eps = 0.0;
    double defect_slope_min = 1.4;
    double im_slope_rel_tol = 0.15;
};

ShapeConfig default_shape_config();

struct ShapeRow {
    double h = 0.0, mu = 0.0, theta = 0.0, mu_tilde = 0.0;
    int level = 0;
    bool found = false;
    cplx rho;
    double predicted = 0.0;  // lambda0 + e_k h
    double defect = 0.0;     // |Re rho - predicted|
    double residual = 0.0;
    int in_window = 0;       // resonances in the level window (expected 1)
};

struct ShapeReport {
    ShapeModel model;
    double eps = 0.0;
    std::vector<double> h_list;
    std::vector<ShapeRow> rows;
    std::vector<std::string> missing;
    LinearFit defect_fit;  // log defect vs log h, level 0
    LinearFit im_fit;      // log |Im rho| vs 1/h, level 0
    double target_slope = 0.0;  // -2 S0
    double im_rel_error = 0.0;
    bool defect_ok = false;
    bool im_ok = false;
    bool widths_negative = true;
    bool widths_monotone = true;
    bool ordering_ok = true;
    bool windows_ok = true;
    bool passed() const {
        return missing.empty() && defect_ok && im_ok && widths_negative && widths_monotone && ordering_ok && windows_ok;
    }
};

ShapeReport run_shape_experiment(const std::vector<double>& h_list, const ShapeConfig& config);

struct ClassicalCheck {
    bool non_trapping = true;
    int samples = 0;
    int trapped = 0;
    double trapped_x = 0.0, trapped_xi = 0.0;
    double escape_radius = 0.0;
    double t_max = 0.0;
    double longest_escape = 0.0;
};

// RK4 flow of p = xi^2 + V(x) from samples of p^-1(lambda0); a sample is trapped if it stays inside
// the escape radius (3x the support scale) up to t_max.
ClassicalCheck classical_nontrapping_check(const PotentialSpec& v, double lambda0, double t_max = 100.0, int samples = 401);

struct NontrapConfig {
    PotentialSpec potential;
    double lambda0 = 1.0;
    double eps = 0.05;
    // mu = c_mu h ln(1/h), theta = mu.
    double c_mu = 0.5;
    double n1 = 1.1;
    double r0 = 1.0;
    double dx_over_h = 0.2;
    double margin = 3.0;
    int scheme = 4;
    double t_max = 100.0;
    ApproximationParams approx;
};

NontrapConfig default_nontrap_config();

struct NontrapRow {
    double h = 0.0, mu = 0.0;
    int count = 0;             // eigenvalues in the box, both parity sectors
    double min_distance = 0.0; // smallest distance from any eigenvalue to the box
    std::vector<cplx> inside;
};

struct NontrapReport {
    ClassicalCheck classical;
    std::vector<NontrapRow> rows;
    bool passed() const;
};

// Throws PreconditionError naming the trapped sample when the classical check fails.
NontrapReport run_nontrapping_experiment(const std::vector<double>& h_list, const NontrapConfig& config);

}  // namespace resonette
