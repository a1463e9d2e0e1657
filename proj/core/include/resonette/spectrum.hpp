#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "resonette/linalg.hpp"
#include "resonette/operator.hpp"

namespace resonette {

// The box J' - i[0, tau].
struct Window {
    double re_min = 0.0;
    double re_max = 0.0;
    double tau = 0.0;
    bool contains(cplx z, double imag_slack = 0.0) const {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= -tau && z.imag() <= imag_slack;
    }
};

struct ResonanceEntry {
    cplx value;
    int multiplicity = 1;
    double residual = 0.0;
};

struct ResonanceSet {
    std::vector<ResonanceEntry> entries;
    Window window;
    double h = 0.0, mu = 0.0, theta = 0.0;
    std::string fingerprint;
    // Eigenvalues inside the window that failed the theta-stability test.
    std::vector<cplx> rejected;

    int total_count() const;
    std::vector<cplx> expanded() const;
};

struct SpectrumOptions {
    double lambda0 = 1.0;
    double stability_factor = 1.25;
    // Relative to theta.
    double stability_tol = 1e-3;
    // Relative to max(1, |lambda|).
    double cluster_tol = 1e-8;
    double imag_slack = 1e-10;
    bool residuals = true;
    // Newton refinement with extended-precision residuals.
    bool refine = false;
    bool stability_check = true;
};

// Everything needed to reassemble P^mu_theta at another angle.
struct ResonanceProblem {
    std::shared_ptr<const SectorFunction> potential;
    std::shared_ptr<const DistortionProfile> profile;
    double h = 0.1;
    GridSpec grid;
    AssemblyOptions assembly;

    DiscretizedOperator assemble(double theta) const;
};

std::string grid_fingerprint(const GridSpec& g);

ResonanceSet compute_resonances(const ResonanceProblem& problem, double theta, const Window& window,
                                const SpectrumOptions& options = {});
// From eigenvalues already computed for `op`; `companion_ev` are those of the same operator at another angle.
ResonanceSet resonances_from_eigenvalues(const DiscretizedOperator& op, const Eigen::VectorXcd& ev,
                                         const Eigen::VectorXcd* companion_ev, double companion_theta, const Window& window,
                                         const SpectrumOptions& options = {});
// Variant with caller-supplied operators; `companion` is the same operator at a different angle.
ResonanceSet compute_resonances(const DiscretizedOperator& op, const DiscretizedOperator* companion, const Window& window,
                                const SpectrumOptions& options = {});

struct Box {
    double re_min, re_max, im_min, im_max;
};

struct ProjectorReport {
    int rank = 0;
    std::vector<double> singular_values;  // leading values, descending
    double idempotency = 0.0;             // ||Pi^2 - Pi||_F
    double boundary_gap = 0.0;
    Eigen::MatrixXcd projector;
};

// Riesz projector by Gauss-Legendre quadrature on the sides of the box.
ProjectorReport contour_projector(const SchurForm& schur, const Box& box, int nodes_per_side = 32, double gap_floor = 1e-8);
ProjectorReport contour_projector(const DiscretizedOperator& op, const Box& box, int nodes_per_side = 32,
                                  double gap_floor = 1e-8);

struct ProductSample {
    cplx z;
    double resolvent_norm = 0.0;
    double product = 0.0;  // ||(P - z)^-1|| * prod |z - rho|
};

struct ProductBoundReport {
    std::vector<ProductSample> samples;
    double sup = 0.0;
    int skipped = 0;
};

ProductBoundReport probe_product_bound(const SchurForm& schur, const ResonanceSet& res, const std::vector<cplx>& z_grid,
                                       double gap_floor);

struct MatchPair {
    int source = 0;
    int target = 0;
    double distance = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;  // indices into the multiplicity-expanded lists
    std::vector<int> unmatched_source, unmatched_target;
    double max_distance = 0.0;
    double alpha = 0.0;
    double c_match = 1.0;
    bool success = false;
};

// Minimum bottleneck assignment (Hungarian on the thresholded costs).
MatchResult match_points(const std::vector<cplx>& source, const std::vector<cplx>& target, double alpha, double c_match = 1.0);
MatchResult match_sets(const ResonanceSet& source, const ResonanceSet& target, double alpha, double c_match = 1.0);

// Plain Hungarian algorithm on a rectangular cost matrix (rows <= cols); returns column per row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

struct GapResult {
    double tau = 0.0;
    double distance = 0.0;
    double bound = 0.0;  // (d2 - d1) / (4N)
    bool bound_holds = true;
};

// Picks tau in [d1, d2] farthest from the depths -Im(rho).
GapResult find_gap(double d1, double d2, const std::vector<cplx>& resonances, int cap);
GapResult find_gap(double d1, double d2, const ResonanceSet& res, int cap);

// omega_h(theta) = theta (ln(1/theta) + h^-n (ln 1/h)^(n+1))^(1/2)
double omega_h(double theta, double h, int n = 1);

}  // namespace resonette
