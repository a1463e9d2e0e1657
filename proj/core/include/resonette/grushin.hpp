#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "resonette/linalg.hpp"
#include "resonette/operator.hpp"
#include "resonette/spectrum.hpp"

namespace resonette {

// Grushin problem for P - z bordered by the absorber basis of the reference operator P~ = P - i theta K.
class GrushinSystem {
public:
    GrushinSystem(const DiscretizedOperator& ref, cplx z);

    cplx z() const { return z_; }
    double theta() const { return theta_; }
    int rank() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXcd& basis() const { return basis_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    Eigen::VectorXcd r_plus(const Eigen::VectorXcd& u) const;
    Eigen::VectorXcd r_minus(const Eigen::VectorXcd& coeffs) const;
    const Eigen::MatrixXcd& e_minus_plus() const { return emp_; }
    Eigen::MatrixXcd e_plus() const;   // n x M
    Eigen::MatrixXcd e_minus() const;  // M x n
    Eigen::MatrixXcd e() const;        // n x n, (1 - T_M)(P~ - z)^-1
    // (P~ - z)^-1 x from the cached factorization.
    Eigen::MatrixXcd reference_solve(const Eigen::MatrixXcd& x) const;

    cplx determinant() const;
    double log_abs_determinant() const { return log_abs_d_; }
    double norm_e_minus_plus() const;
    double basis_orthonormality() const;

private:
    cplx z_;
    double theta_ = 0.0;
    Eigen::MatrixXcd ref_matrix_;
    Eigen::MatrixXcd basis_;
    Eigen::VectorXd weights_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    Eigen::MatrixXcd y_;  // (P~ - z)^-1 K e
    Eigen::MatrixXcd emp_;
    double log_abs_d_ = 0.0;
    cplx phase_d_ = 1.0;
};

GrushinSystem build_grushin(const DiscretizedOperator& dist, const DiscretizedOperator& ref, cplx z);

// Relative residual of (P - z)^-1 = E - E+ (E-+)^-1 E- in the Frobenius norm.
double verify_resolvent_identity(const GrushinSystem& sys, const DiscretizedOperator& dist, cplx z);

struct DeterminantValue {
    cplx z;
    double log_abs = 0.0;  // log |D(z)|
    double arg = 0.0;      // arg D(z) in (-pi, pi]
    double norm_emp = 0.0; // ||E-+(z)||_2
};

// E-+(z) on many shifts through one Schur factorisation of P~.
class GrushinFamily {
public:
    explicit GrushinFamily(const DiscretizedOperator& ref);

    Eigen::MatrixXcd e_minus_plus(cplx z) const;
    DeterminantValue determinant(cplx z, bool with_norm = false) const;
    // Eigenvalues of P~ inside the box: poles of D.
    int poles_in(const Box& box) const;
    int rank() const { return static_cast<int>(qb_.cols()); }
    double theta() const { return theta_; }

private:
    double theta_ = 0.0;
    SchurForm schur_;
    Eigen::MatrixXcd qb_;   // Q^H e
    Eigen::MatrixXcd qkb_;  // Q^H K e
};

struct BoxCount {
    Box box;
    int winding = 0;
    int poles = 0;
    int zeros = 0;
    int samples = 0;
    int retries = 0;
    bool ok = true;
    // Sum of zeros minus poles inside, from the contour integral of z dlog D.
    cplx moment = 0.0;
};

struct LocatedZero {
    cplx value;
    int multiplicity = 1;
};

struct DeterminantTrace {
    std::vector<DeterminantValue> samples;
    std::vector<BoxCount> boxes;
    std::vector<LocatedZero> zeros;
    double sup_norm_emp = 0.0;
    // max over samples of log|D| - M log ||E-+||; never positive.
    double hadamard_excess = -1e300;
};

struct TraceOptions {
    int initial_per_side = 24;
    double max_phase_step = 0.5;
    int max_depth = 40;
    int max_retries = 3;
    // Boxes smaller than this stop being subdivided during localisation.
    double min_box = 1e-6;
};

BoxCount count_zeros(const GrushinFamily& family, const Box& box, const TraceOptions& options = {});
std::vector<LocatedZero> locate_zeros(const GrushinFamily& family, const Box& box, const TraceOptions& options = {});
DeterminantTrace determinant_trace(const GrushinFamily& family, const std::vector<cplx>& z_grid,
                                   const std::vector<Box>& boxes, const TraceOptions& options = {});

}  // namespace resonette
