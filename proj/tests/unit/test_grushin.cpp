#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "resonette/errors.hpp"
#include "resonette/grushin.hpp"
#include "resonette/linalg.hpp"

using namespace resonette;

namespace {

// P and P~ = P - i theta K built by hand on an arbitrary 64-point grid.
struct Toy {
    DiscretizedOperator dist, ref;
};

Toy make_toy(const Eigen::MatrixXcd& p, const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights, double theta) {
    Toy t;
    t.dist.matrix = p;
    t.dist.grid.n_points = static_cast<int>(p.rows());
    t.dist.meta.theta = theta;
    t.ref = t.dist;
    t.ref.meta.kind = OperatorKind::reference;
    Absorber ab;
    ab.basis = basis;
    ab.weights = weights;
    ab.c0 = weights.maxCoeff();
    t.ref.absorber = ab;
    const Eigen::MatrixXd k = basis * weights.asDiagonal() * basis.transpose();
    t.ref.matrix -= cplx(0.0, theta) * k.cast<cplx>();
    return t;
}

Toy random_toy(int n, int m, double theta, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = 0.05 * cplx(g(rng), g(rng));
    for (int i = 0; i < n; ++i) p(i, i) += cplx(0.2 * i, -0.01 * i);
    Eigen::MatrixXd r(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) r(i, j) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ() * Eigen::MatrixXd::Identity(n, m);
    return make_toy(p, q, Eigen::VectorXd::Constant(m, 2.0), theta);
}

}  // namespace

TEST_CASE("rank-one toy: E-+ has the closed form -(p - z)/(p - i theta c - z)") {
    const int n = 64;
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) p(i, i) = cplx(0.5 + 0.1 * i, -0.02 * i);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, 1);
    e(3, 0) = 1.0;
    const double theta = 0.1, c = 1.5;
    const Toy t = make_toy(p, e, Eigen::VectorXd::Constant(1, c), theta);
    const cplx p3 = p(3, 3);
    for (cplx z : {cplx(0.7, 0.01), cplx(0.85, -0.1), cplx(1.2, 0.3)}) {
        const GrushinSystem s(t.ref, z);
        const cplx oracle = -(p3 - z) / (p3 - cplx(0.0, theta * c) - z);
        CHECK(std::abs(s.e_minus_plus()(0, 0) - oracle) < 1e-13);
        CHECK(std::abs(s.determinant() - oracle) < 1e-13);
        CHECK(verify_resolvent_identity(s, t.dist, z) < 1e-12);
    }
    // z at the eigenvalue of P~ makes the bordered system singular.
    CHECK_THROWS_AS(GrushinSystem(t.ref, p3 - cplx(0.0, theta * c)), SingularSystemError);
}

TEST_CASE("bordered inverse reproduces the resolvent for a random operator") {
    const Toy t = random_toy(80, 5, 0.2, 17);
    for (cplx z : {cplx(1.03, 0.07), cplx(3.3, -0.11), cplx(7.7, 0.02)}) {
        const GrushinSystem s = build_grushin(t.dist, t.ref, z);
        CHECK(s.basis_orthonormality() < 1e-12);
        CHECK(verify_resolvent_identity(s, t.dist, z) < 1e-10);
        // det E-+ = (-1)^M det(P - z) / det(P~ - z), evaluated independently by LU.
        Eigen::MatrixXcd a = t.dist.matrix, b = t.ref.matrix;
        a.diagonal().array() -= z;
        b.diagonal().array() -= z;
        const cplx ratio = -Eigen::PartialPivLU<Eigen::MatrixXcd>(a).determinant() / Eigen::PartialPivLU<Eigen::MatrixXcd>(b).determinant();
        CHECK(std::abs(s.determinant() - ratio) < 1e-9 * std::abs(ratio));
    }
}

TEST_CASE("argument principle counts eigenvalues of P and locates them") {
    const Toy t = random_toy(60, 4, 0.3, 23);
    const GrushinFamily fam(t.ref);
    const Eigen::VectorXcd ev = eigenvalues(t.dist.matrix);
    for (const Box& box : {Box{0.9, 2.1, -0.5, 0.5}, Box{3.05, 4.45, -0.6, 0.4}, Box{10.0, 11.0, 2.0, 3.0}}) {
        int expected = 0;
        std::vector<cplx> inside;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev[i].real() > box.re_min && ev[i].real() < box.re_max && ev[i].imag() > box.im_min && ev[i].imag() < box.im_max) {
                ++expected;
                inside.push_back(ev[i]);
            }
        const BoxCount c = count_zeros(fam, box);
        CHECK(c.ok);
        CHECK(c.zeros == expected);
        const auto zeros = locate_zeros(fam, box);
        int total = 0;
        for (const auto& z : zeros) {
            total += z.multiplicity;
            double best = 1e300;
            for (cplx e : inside) best = std::min(best, std::abs(e - z.value));
            CHECK(best < 1e-8);
        }
        CHECK(total == expected);
    }
}

TEST_CASE("family evaluator agrees with the direct system") {
    const Toy t = random_toy(50, 3, 0.15, 41);
    const GrushinFamily fam(t.ref);
    for (cplx z : {cplx(2.0, 0.3), cplx(5.1, -0.2)}) {
        const GrushinSystem s(t.ref, z);
        CHECK((fam.e_minus_plus(z) - s.e_minus_plus()).norm() < 1e-11);
        const DeterminantValue d = fam.determinant(z, true);
        CHECK(d.log_abs == doctest::Approx(s.log_abs_determinant()).epsilon(1e-11));
        CHECK(d.norm_emp == doctest::Approx(s.norm_e_minus_plus()).epsilon(1e-11));
    }
}

TEST_CASE("shape resonance of the well in an island is a zero of D") {
    const double h = 0.12, theta = 0.1;
    const auto p = profile_for(h, 1.1, 1.0);
    const PotentialSpec pot = make_potential("well_in_island");
    const auto v = build_approximation(pot, 0.1, {});
    const auto op = assemble_distorted(*v, DistortionMap(p, theta), h, auto_grid(h, p->linear_radius(), Geometry::half_even, 0.2, 3.0, 4));
    const auto ref = assemble_reference(op, reference_options_for(pot, 1.0, 1.1));

    for (cplx z : {cplx(0.95, 0.02), cplx(1.1, -0.03), cplx(1.2, 0.001)}) {
        const GrushinSystem s = build_grushin(op, ref, z);
        CHECK(verify_resolvent_identity(s, op, z) < 1e-8);
    }
    const GrushinFamily fam(ref);
    const Box box{1.0, 1.15, -0.01, 0.005};
    const BoxCount c = count_zeros(fam, box);
    CHECK(c.winding == 1);
    CHECK(c.zeros == 1);
    const auto zs = locate_zeros(fam, box);
    REQUIRE(zs.size() == 1);
    const Eigenpair e = inverse_iteration(op.matrix, zs[0].value, 3);
    CHECK(std::abs(e.value - zs[0].value) < 1e-9);
    CHECK(zs[0].value.imag() < 0.0);
}

TEST_CASE("Grushin inputs are validated") {
    const Toy t = random_toy(40, 2, 0.1, 5);
    CHECK_THROWS_AS(GrushinSystem(t.dist, cplx(1.0, 0.0)), ValidationError);
    DiscretizedOperator other = t.dist;
    other.meta.theta = 0.2;
    CHECK_THROWS_AS(build_grushin(other, t.ref, cplx(1.0, 0.1)), ValidationError);
    const GrushinFamily fam(t.ref);
    CHECK_THROWS_AS(count_zeros(fam, Box{1.0, 1.0, 0.0, 1.0}), ValidationError);
}
