#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "resonette/potential.hpp"

namespace resonette {

// Truncated Taylor resummation V~(x + iy) = sum_{k<=N} (iy)^k V^(k)(x) / k!.
class AlmostAnalyticExtension {
public:
    // sector_c bounds the admissible |Im x| <= sector_c * <Re x>.
    AlmostAnalyticExtension(PotentialSpec source, int order, double sector_c = 4.0);

    cplx eval_c(cplx x) const;
    // d-bar derivative, equal to (iy)^N V^(N+1)(x) / (2 N!). Needs N+1 <= max_order.
    cplx dbar(cplx x) const;
    // Value in log-radial coordinates, x = omega * exp(s).
    cplx eval_log(cplx s, int omega) const;

    int order() const { return order_; }
    const PotentialSpec& source() const { return source_; }

private:
    PotentialSpec source_;
    int order_;
    double sector_c_;
};

AlmostAnalyticExtension almost_analytic_extend(const PotentialSpec& v, int order);

struct ContourSettings {
    // Gauss-Legendre panels of length panel_over_mu * mu.
    double panel_over_mu = 1.0;
    int points_per_panel = 16;
    // Truncation of the horizontal legs; 0 selects min(40/nu, ln(negligible radius) + 1).
    double s_max = 0.0;
    double tolerance = 1e-8;
};

struct ContourValue {
    cplx value;
    double error_estimate = 0.0;
};

// Single-point evaluation of V^mu_1(s, omega), with an error estimate from a coarser
// rule plus the truncated tail. Throws DomainError outside Re s >= -mu, |Im s| < 2 mu
// and AccuracyError when the estimate exceeds settings.tolerance.
ContourValue contour_v1(const AlmostAnalyticExtension& ext, double mu, double nu_tilde, cplx s, int omega,
                        const ContourSettings& settings = {});

// Holomorphic function on the sector |arg r| < 2 mu_limit, in direction omega = +-1.
class SectorFunction {
public:
    virtual ~SectorFunction() = default;
    virtual cplx eval_sector(cplx r, int omega) const = 0;
    virtual double mu_limit() const = 0;
    double eval_real(double x) const;
};

// Exact continuation of an entire builtin, used by the uniform-dilation oracle.
class ExactContinuation : public SectorFunction {
public:
    explicit ExactContinuation(PotentialSpec v);
    cplx eval_sector(cplx r, int omega) const override;
    double mu_limit() const override { return 1e300; }
    const PotentialSpec& source() const { return v_; }

private:
    PotentialSpec v_;
};

// V~ itself on a sector of half-angle 2 mu; stands in for V^mu once mu^(N+1) is below rounding.
class TaylorSector : public SectorFunction {
public:
    TaylorSector(AlmostAnalyticExtension ext, double mu) : ext_(std::move(ext)), mu_(mu) {}
    cplx eval_sector(cplx r, int omega) const override { return ext_.eval_c(static_cast<double>(omega) * r); }
    double mu_limit() const override { return mu_; }

private:
    AlmostAnalyticExtension ext_;
    double mu_;
};

struct ApproximationParams {
    int order = 6;
    // 0 selects nu / 2.
    double nu_tilde = 0.0;
    // Sharpness of the exp(-c/t) step used for chi_1; different values give independent constructions.
    double glue_sharpness = 1.0;
    double mu_max = 0.25;
    ContourSettings contour;
};

class AnalyticApproximation : public SectorFunction {
public:
    AnalyticApproximation(const PotentialSpec& v, double mu, const ApproximationParams& params);

    cplx eval_sector(cplx r, int omega) const override;
    double mu_limit() const override { return mu_; }

    // Pieces of the glued construction in log coordinates.
    cplx v1(cplx s, int omega) const;
    cplx v2(cplx s, int omega) const;
    double chi1(double t) const;

    double mu() const { return mu_; }
    double nu_tilde() const { return nu_tilde_; }
    double s_max() const { return s_max_; }
    std::size_t node_count() const { return 2 * nodes_[0].size(); }
    double error_estimate() const { return error_estimate_; }
    const AlmostAnalyticExtension& extension() const { return ext_; }
    const ApproximationParams& params() const { return params_; }

private:
    struct Node {
        cplx s;
        cplx weight;
    };
    static std::vector<Node> upper_nodes(double mu, double s_max, const ContourSettings& cs, int points);
    cplx contour_sum(const std::vector<Node>& nodes, cplx s) const;

    AlmostAnalyticExtension ext_;
    ApproximationParams params_;
    double mu_;
    double nu_tilde_;
    double s_max_;
    // Upper-half nodes with precomputed weights exp(nu~ s') V~_1(s') w / (2 pi i), per direction.
    std::vector<Node> nodes_[2];
    double error_estimate_ = 0.0;
};

std::shared_ptr<const AnalyticApproximation> build_approximation(const PotentialSpec& v, double mu,
                                                                 const ApproximationParams& params = {});

struct DecayFitReport {
    std::vector<double> mu_grid;
    std::vector<double> sup_errors;
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double n_floor = 0.0;
    // All errors sit at the quadrature tolerance, so no slope is meaningful.
    bool below_tolerance = false;
    bool passed = false;
};

// Fits log max_x |<x>^nu~ (V^mu - V)(x)| against log mu. Throws ValidationError on empty grids.
DecayFitReport verify_approximation(const PotentialSpec& v, const ApproximationParams& params,
                                    const std::vector<double>& mu_grid, const std::vector<double>& x_grid,
                                    double n_floor);

}  // namespace resonette
