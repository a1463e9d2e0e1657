#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resonette/approximation.hpp"
#include "resonette/distortion.hpp"

namespace resonette {

enum class Geometry { full_line, half_even, half_odd, radial };

// Dirichlet box, cell-centred nodes. Half-line geometries impose parity at the origin;
// radial uses the reduced function u = r^((n-1)/2) psi.
struct GridSpec {
    Geometry geometry = Geometry::half_even;
    double x_min = 0.0;
    double x_max = 10.0;
    int n_points = 512;
    int scheme = 4;
    int dimension = 1;

    double spacing() const { return (x_max - x_min) / n_points; }
    std::vector<double> nodes() const;
    void validate() const;
};

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

// Grid reaching past the linear part of the distortion by `margin`, with spacing dx_over_h * h.
GridSpec auto_grid(double h, double linear_radius, Geometry geometry, double dx_over_h = 0.125, double margin = 3.0,
                   int scheme = 4);

enum class OperatorKind { distorted, reference, free };
// plain: u -> u(Phi(x)); symmetric: with the square-root Jacobian weight (complex-symmetric matrix).
enum class DistortionForm { plain, symmetric };

struct OperatorMeta {
    double h = 0.0;
    double mu = 0.0;
    double theta = 0.0;
    OperatorKind kind = OperatorKind::distorted;
    DistortionForm form = DistortionForm::plain;
    std::vector<std::string> warnings;
};

struct Absorber {
    Eigen::MatrixXd basis;     // n x M orthonormal oscillator eigenvectors
    Eigen::VectorXd weights;   // C0 * chi(E_k)
    Eigen::VectorXd energies;  // oscillator eigenvalues E_k
    double c0 = 0.0;
    double big_r = 0.0;
    double cutoff = 0.0;
    int rank() const { return static_cast<int>(basis.cols()); }
};

struct DiscretizedOperator {
    Eigen::MatrixXcd matrix;
    GridSpec grid;
    OperatorMeta meta;
    std::optional<Absorber> absorber;
    int absorber_rank() const { return absorber ? absorber->rank() : 0; }
};

struct AssemblyOptions {
    DistortionForm form = DistortionForm::plain;
    double max_dx_over_h = 0.25;
    // Smallest allowed gap between the box wall and the linear region of the distortion.
    double wall_margin = 0.5;
};

DiscretizedOperator assemble_distorted(const SectorFunction& v, const DistortionMap& map, double h, const GridSpec& grid,
                                       const AssemblyOptions& options = {});
DiscretizedOperator assemble_free(const DistortionMap& map, double h, const GridSpec& grid, const AssemblyOptions& options = {});

// Oracle: x -> e^{i theta} x on the whole box, potential continued exactly.
DiscretizedOperator assemble_uniform_dilation(const PotentialSpec& v, double theta, double h, const GridSpec& grid);

// Undistorted operator with a real potential sampled on the grid (theta = 0).
DiscretizedOperator assemble_real(const std::function<double(double)>& v, double h, const GridSpec& grid);

struct ReferenceOptions {
    double lambda0 = 1.0;
    double n1 = 1.1;
    // 0 selects 1 + sampled sup |V'|.
    double c0 = 0.0;
    double sup_v = 0.0;
    double sup_grad = 0.0;
    // chi decays from 1 to 0 over [L, L (1 + taper)], L = 1 + 2 lambda0 + sup|V|.
    double taper = 0.5;
};

// P~ = P - i C0 theta chi(h^2 D^2 + R^-2 x^2), R = 2 n1 ln(1/h).
DiscretizedOperator assemble_reference(const DiscretizedOperator& op, const ReferenceOptions& options);
ReferenceOptions reference_options_for(const PotentialSpec& v, double lambda0, double n1);

// Discretised h^2 D^2 + R^-2 x^2 on the operator's grid (real symmetric).
Eigen::MatrixXd auxiliary_oscillator(const GridSpec& grid, double h, double big_r);

struct NumericalRangeReport {
    cplx z;
    // min over unit u of |<(P - z) u, u>|, exact through the rotated Hermitian part.
    double exact_min = 0.0;
    // Upper bound from random unit vectors.
    double sampled_min = 0.0;
    double target = 0.0;  // Im z / 2
    double margin = 0.0;  // exact_min - target
    double best_angle = 0.0;
};

NumericalRangeReport numerical_range_bound(const DiscretizedOperator& op, cplx z, int trials, double lambda0, double n1,
                                           unsigned seed = 7);

// Support function value max over angles of lambda_min(Herm(e^{i phi} A)), scanned on `angles` points
// and refined by Brent; exposed for the brute-force oracle in tests.
double numerical_range_distance(const Eigen::MatrixXcd& a, int angles, double* best_angle = nullptr,
                                double lo = 0.0, double hi = 2.0 * 3.14159265358979323846);

struct ResolventSample {
    cplx z;
    double norm = 0.0;  // ||(z - P~)^{-1}||, infinite when singular
    bool flagged = false;
};

struct ResolventBoundReport {
    double theta = 0.0;
    std::vector<ResolventSample> samples;
    double sup_theta_norm = 0.0;  // theta * max finite norm
};

ResolventBoundReport reference_resolvent_bound(const DiscretizedOperator& ref, const std::vector<cplx>& z_grid);
// Fitted constant across a theta sweep: max of theta * ||resolvent||.
double fit_resolvent_constant(const std::vector<ResolventBoundReport>& sweep);

}  // namespace resonette
