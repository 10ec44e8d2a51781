#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gen.hpp"
#include "ringwave/errors.hpp"
#include "ringwave/lattice.hpp"

using namespace ringwave;

TEST_CASE("second-difference matrix spectrum against a dense eigensolve") {
    for (int n = 3; n <= 16; ++n) {
        CAPTURE(n);
        const Mat a = second_difference_matrix(n);
        Vec dense = Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues();
        std::vector<double> formula;
        for (int k = 1; k <= n; ++k) formula.push_back(circulant_eigenvalue(n, k));
        std::sort(formula.begin(), formula.end());
        for (int i = 0; i < n; ++i) CHECK(std::abs(dense[i] - formula[static_cast<std::size_t>(i)]) <= 1e-11);

        const CirculantBasis b = circulant_basis(n);
        const CMat gram = b.vectors.adjoint() * b.vectors;
        CHECK((gram - CMat::Identity(n, n)).norm() <= 1e-12);
        for (int k = 1; k <= n; ++k) {
            const CVec e = b.vector(k);
            CHECK((a.cast<std::complex<double>>() * e - b.eigenvalue(k) * e).norm() <= 1e-12);
        }
    }
}

TEST_CASE("mode coordinates round trip") {
    testgen::for_cases(20, 3, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 12);
        const CirculantBasis b = circulant_basis(n);
        CVec x(n);
        for (int j = 0; j < n; ++j) x[j] = {rng.normal(), rng.normal()};
        CHECK((from_mode_coords(b, to_mode_coords(b, x)) - x).norm() <= 1e-12);
    });
}

TEST_CASE("gradient and Hessian agree with finite differences") {
    testgen::for_cases(30, 5, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 9);
        const LatticeModel m(n, PotentialSpec::pendulum(rng.uniform(0.5, 2.0)),
                             rng.coin() ? PotentialSpec::fpu(rng.uniform(-1, 1)) : PotentialSpec::toda());
        Vec q(n);
        for (int j = 0; j < n; ++j) q[j] = rng.uniform(-0.8, 0.8);
        const Vec g = m.grad_V(q);
        const Mat h = m.hessian_V(q);
        const double eps = 1e-6;
        for (int j = 0; j < n; ++j) {
            Vec e = Vec::Zero(n);
            e[j] = eps;
            CHECK(g[j] == doctest::Approx((m.potential(q + e) - m.potential(q - e)) / (2 * eps)).epsilon(1e-7));
            const Vec col = (m.grad_V(q + e) - m.grad_V(q - e)) / (2 * eps);
            CHECK((h.col(j) - col).norm() <= 1e-6 * std::max(1.0, col.norm()));
        }
        CHECK((h - h.transpose()).norm() == 0.0);
        Vec y = Vec::Random(n);
        CHECK((m.hessian_apply(q, y) - h * y).norm() <= 1e-12 * std::max(1.0, (h * y).norm()));
    });
}

TEST_CASE("Hessian at equilibrium is U'' I + W''(0) A") {
    const LatticeModel m(7, PotentialSpec::pendulum(1.5), PotentialSpec::fpu(0.4));
    const Mat expect = 2.25 * Mat::Identity(7, 7) + second_difference_matrix(7);
    CHECK((m.hessian_V(m.equilibrium_vector()) - expect).norm() <= 1e-14);
    CHECK(m.onsite_curvature() == doctest::Approx(2.25));
    CHECK(m.coupling_curvature() == 1.0);
}

TEST_CASE("hertz cradle has zero coupling curvature") {
    const LatticeModel m(5, PotentialSpec::pendulum(1.0), PotentialSpec::hertz());
    CHECK(m.coupling_curvature() == 0.0);
    Vec q(5);
    q << 0.1, -0.2, 0.3, 0.0, 0.05;
    CHECK(std::isfinite(m.potential(q)));
}

TEST_CASE("reflection classification") {
    CHECK(LatticeModel(5, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic()).reflection() == Reflection::Plain);
    CHECK(LatticeModel(5, PotentialSpec::pendulum(1.0), PotentialSpec::hertz()).reflection() == Reflection::Signed);
    CHECK(LatticeModel(6, PotentialSpec::zero(), PotentialSpec::fpu(1.0), 0.0, true).reflection() ==
          Reflection::Signed);
    CHECK(LatticeModel(5, PotentialSpec::polynomial({0, 0, 0.5, 0.2}, Role::Onsite), PotentialSpec::toda())
              .reflection() == Reflection::Broken);
}

TEST_CASE("constructor guards") {
    CHECK_THROWS_AS(LatticeModel(2, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic()), ConfigError);
    CHECK_THROWS_AS(LatticeModel(5, PotentialSpec::harmonic(), PotentialSpec::harmonic()), ConfigError);
    CHECK_THROWS_AS(LatticeModel(5, PotentialSpec::pendulum(1.0), PotentialSpec::polynomial({0, 1, 1}, Role::Coupling)),
                    ConfigError);
    CHECK_THROWS_AS(LatticeModel(5, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic(), 0.0, true), ConfigError);
    const LatticeModel m(4, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic());
    Vec bad = Vec::Zero(4);
    bad[2] = NAN;
    CHECK_THROWS(m.grad_V(bad));
}

TEST_CASE("matrix csv export") {
    std::ostringstream os;
    Mat m(2, 2);
    m << 1.0, -0.5, 0.25, 2.0;
    write_matrix_csv(os, m);
    const std::string text = os.str();
    CHECK(text == "1,-0.5\n0.25,2\n");
}

TEST_CASE("hand-evaluated gradients and Hessians") {
    const LatticeModel free(3, PotentialSpec::zero(), PotentialSpec::harmonic(), 0.0, true);
    Vec q(3);
    q << 1, 0, 0;
    Vec expect(3);
    expect << 2, -1, -1;
    CHECK((free.grad_V(q) - expect).norm() <= 1e-15);

    const LatticeModel p4(4, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic());
    CHECK(p4.grad_V(Vec::Constant(4, std::numbers::pi)).norm() <= 1e-15);
    const Mat h = p4.hessian_V(Vec::Zero(4));
    for (int j = 0; j < 4; ++j) {
        CHECK(h(j, j) == 3.0);
        CHECK(h(j, (j + 1) % 4) == -1.0);
        CHECK(h(j, (j + 3) % 4) == -1.0);
        CHECK(h(j, (j + 2) % 4) == 0.0);
    }
    const LatticeModel p4w2(4, PotentialSpec::pendulum(2.0), PotentialSpec::harmonic());
    CHECK(p4w2.hessian_V(Vec::Zero(4))(0, 0) == doctest::Approx(6.0));
    CHECK(circulant_eigenvalue(4, 2) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(circulant_eigenvalue(4, 1) == doctest::Approx(2.0).epsilon(1e-15));
}
