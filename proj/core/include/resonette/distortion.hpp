#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace resonette {

using cplx = std::complex<double>;

struct ProfileOptions {
    // Require r_lambda inside the conservative bracket [2 ln(lambda) - 1, 2 ln(lambda) - eps0].
    // Otherwise only the conditions that make the glued profile valid are checked.
    bool strict_bracket = false;
    // Step of the cumulative quadrature table for g.
    double table_step = 0.02;
};

// f_lambda of the distortion lemma and the derived fields b = f/lambda, a = b/r.
class DistortionProfile {
public:
    DistortionProfile(double lambda, double r0, const ProfileOptions& options = {});

    double f(double r) const { return f_deriv(0, r); }
    // k-th derivative of f_lambda, 0 <= k <= 4.
    double f_deriv(int k, double r) const;
    double g(double r) const;
    // The generating density G = g'.
    double big_g(double r) const;

    double b(double r) const { return f(r) / lambda_; }
    double b_deriv(int k, double r) const { return f_deriv(k, r) / lambda_; }
    double a(double r) const { return r > 0 ? b(r) / r : 0.0; }

    double lambda() const { return lambda_; }
    double r0() const { return r0_; }
    double eps0() const { return eps0_; }
    double alpha_lambda() const { return alpha_; }
    double r_lambda() const { return r_lambda_; }
    double ln_2lambda() const { return ln2l_; }
    // Beyond this radius b(r) = r.
    double linear_radius() const { return 2.0 * std::log(lambda_); }

    static double phi0(double s);
    static double phi0_deriv(int k, double s);

private:
    double lambda_, r0_, eps0_, ln_l_, ln2l_;
    double alpha_ = 0.0, r_lambda_ = 0.0;
    double step_;
    std::vector<double> table_;
};

// lambda = h^(-n1).
std::shared_ptr<const DistortionProfile> build_f_lambda(double lambda, double r0, const ProfileOptions& options = {});
std::shared_ptr<const DistortionProfile> profile_for(double h, double n1, double r0, const ProfileOptions& options = {});

class DistortionMap {
public:
    DistortionMap(std::shared_ptr<const DistortionProfile> profile, double theta);

    // 1D (or radial) map x -> x + i theta b(|x|) sgn x and its derivative.
    cplx phi(double x) const;
    cplx dphi(double x) const;
    cplx d2phi(double x) const;
    // n-dimensional map and Jacobian I + i theta F with F = b' pi_x + a (I - pi_x).
    Eigen::VectorXcd phi(const Eigen::VectorXd& x) const;
    Eigen::MatrixXcd jacobian(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd field_derivative(const Eigen::VectorXd& x) const;

    double theta() const { return theta_; }
    const DistortionProfile& profile() const { return *profile_; }
    std::shared_ptr<const DistortionProfile> profile_ptr() const { return profile_; }

private:
    std::shared_ptr<const DistortionProfile> profile_;
    double theta_;
};

struct JacobianSample {
    Eigen::VectorXd x;
    Eigen::VectorXd xi;
};

struct JacobianCheck {
    // max over samples of Im[(tdPhi)^-1 xi]^2 + theta a(|x|) |xi|^2
    double worst_margin = 0.0;
    // max deviation between the direct solve and -2 theta F (1 + theta^2 F^2)^-2 xi.xi
    double closed_form_deviation = 0.0;
    std::size_t samples = 0;
};

JacobianCheck jacobian_inequality_check(const DistortionMap& map, const std::vector<JacobianSample>& samples);

struct LemmaCheck {
    double lambda = 0.0, r0 = 0.0;
    double support_margin = 0.0;    // -max |f| on [0, R0]
    double linearity_margin = 0.0;  // -max |f - lambda r| / (lambda r) beyond 2 ln lambda
    double monotone_margin = 0.0;   // min of f, r f' - f, 2 lambda r - r f' (scaled by lambda r)
    double c_iv = 0.0;              // max (f' + |f''|) / (1 + f)
    double c_v = 0.0;               // max_k<=4 |f^(k)| / lambda
    double convexity_margin = 0.0;  // min second difference of g on [0, ln 2 lambda], scaled
    double alpha_lower = 0.0, alpha_upper = 0.0;
    bool alpha_in_bracket = false;
    double c1_jump = 0.0;           // relative value and slope jump at ln 2 lambda
    bool passed = false;
};

// Dense-grid check of the five profile conditions, the alpha bracket and C1 matching.
LemmaCheck check_profile_conditions(const DistortionProfile& p, int n_grid = 10000, double tol = 1e-10,
                                    double c_cap = 1000.0);

}  // namespace resonette
