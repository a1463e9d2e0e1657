#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace resonette {

using cplx = std::complex<double>;

// A named smooth even potential on the line (or radial profile) with derivative jets.
struct PotentialSpec {
    std::string name;
    std::map<std::string, double> params;
    double nu = 2.0;
    int max_order = 8;
    // Beyond this radius |V| is below double precision relative to its scale.
    double negligible_radius = 10.0;
    // Fills out[0..order] with V, V', ..., V^(order) at x.
    std::function<void(double x, int order, double* out)> jet_fn;
    // Exact holomorphic continuation, present only for entire (or meromorphic) builtins.
    std::function<cplx(cplx)> analytic;

    double eval(double x) const;
    double deriv(int k, double x) const;
    std::vector<double> jet(double x, int order) const;
    bool has_analytic() const { return static_cast<bool>(analytic); }
    cplx eval_analytic(cplx z) const;

    // Sampled sup over [-R, R] with R = negligible_radius.
    double sup_abs() const;
    double sup_gradient() const;
    double param(const std::string& key) const;
};

// Builtins: gaussian_barrier, bump, well_in_island, sech2, free.
// Unknown names or parameters raise ValidationError.
PotentialSpec make_potential(const std::string& name, const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_potentials();

// Potential given by a user callable of the jet (used for tests and polynomial windows).
PotentialSpec make_custom_potential(std::string name, double nu, int max_order, double negligible_radius,
                                    std::function<void(double, int, double*)> jet_fn,
                                    std::function<cplx(cplx)> analytic = {});

}  // namespace resonette
