#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gen.hpp"
#include "ringwave/errors.hpp"
#include "ringwave/continuation.hpp"
#include "ringwave/timedomain.hpp"

using namespace ringwave;

namespace {

const LatticeModel& linear_chain() {
    static const LatticeModel m(4, PotentialSpec::polynomial({0, 0, 0.5}, Role::Onsite), PotentialSpec::harmonic());
    return m;
}

/// q(t) = cos(sqrt(M) t) q0 + sin(sqrt(M) t) / sqrt(M) p0 with M = I + A.
Vec exact_q(const Vec& q0, const Vec& p0, double t) {
    const Mat m = Mat::Identity(4, 4) + second_difference_matrix(4);
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const Vec w = es.eigenvalues().cwiseSqrt();
    const Mat& v = es.eigenvectors();
    Vec c = v.transpose() * q0, s = v.transpose() * p0;
    for (int i = 0; i < 4; ++i) {
        const double ci = c[i], si = s[i];
        c[i] = ci * std::cos(w[i] * t) + si * std::sin(w[i] * t) / w[i];
    }
    return v * c;
}

}  // namespace

TEST_CASE("linear chain against the exact solution") {
    Vec q0(4), p0(4);
    q0 << 0.3, -0.1, 0.0, 0.2;
    p0 << 0.0, 0.1, -0.2, 0.05;
    const auto times = uniform_times(10.0, 20);
    CHECK(times.size() == 21);
    for (auto method : {Integrator::DormandPrince, Integrator::Fehlberg78, Integrator::Symplectic}) {
        IntegrateOptions opts;
        opts.method = method;
        opts.tol = 1e-12;
        const TrajectorySample s = integrate(linear_chain(), q0, p0, times, opts);
        for (std::size_t i = 0; i < times.size(); ++i) CHECK((s.q[i] - exact_q(q0, p0, times[i])).norm() <= 1e-8);
        CHECK(s.max_energy_drift <= 1e-8);
    }
}

TEST_CASE("normal-mode loop is periodic") {
    const int k = 1;
    const double nu = std::sqrt(1.0 + circulant_eigenvalue(4, k));
    LoopState x(4, 2, nu);
    for (int j = 0; j < 4; ++j) x.coeffs()(j, 1) = 0.1 * std::cos(std::numbers::pi * j * k / 2);
    const PeriodicityReport rep = verify_periodicity(linear_chain(), x);
    CHECK(rep.period == doctest::Approx(2 * std::numbers::pi / nu));
    CHECK(rep.return_distance <= 1e-9);
    CHECK(rep.max_deviation <= 1e-9);
    CHECK(rep.passed);

    x.set_nu(nu * 1.01);
    CHECK_FALSE(verify_periodicity(linear_chain(), x).passed);
}

TEST_CASE("integrators agree on a nonlinear lattice") {
    const LatticeModel m(5, PotentialSpec::pendulum(1.0), PotentialSpec::fpu(0.5));
    testgen::Rng rng(501);
    Vec q0(5), p0(5);
    for (int j = 0; j < 5; ++j) {
        q0[j] = rng.uniform(-0.5, 0.5);
        p0[j] = rng.uniform(-0.5, 0.5);
    }
    const auto times = uniform_times(5.0, 5);
    IntegrateOptions a, b, c;
    a.method = Integrator::Fehlberg78;
    a.tol = 1e-12;
    b.method = Integrator::DormandPrince;
    b.tol = 1e-12;
    c.method = Integrator::Symplectic;
    c.dt = 1e-3;
    const auto ra = integrate(m, q0, p0, times, a);
    const auto rb = integrate(m, q0, p0, times, b);
    const auto rc = integrate(m, q0, p0, times, c);
    CHECK((ra.q.back() - rb.q.back()).norm() <= 1e-9);
    CHECK((ra.q.back() - rc.q.back()).norm() <= 1e-9);
    CHECK((ra.p.back() - rc.p.back()).norm() <= 1e-9);
}

TEST_CASE("integration errors") {
    const Vec z = Vec::Zero(4);
    CHECK_THROWS_AS(integrate(linear_chain(), Vec::Zero(3), z, {0.0, 1.0}), PreconditionError);
    CHECK_THROWS_AS(integrate(linear_chain(), z, z, {1.0, 0.5}), PreconditionError);
    CHECK_THROWS_AS(integrate(linear_chain(), z, z, {-1.0}), PreconditionError);
    CHECK_THROWS_AS(uniform_times(1.0, 0), PreconditionError);

    // U = q^2/2 - q^4 escapes to infinity in finite time from q = 3.
    const LatticeModel blowup(3, PotentialSpec::polynomial({0, 0, 0.5, 0, -1.0}, Role::Onsite),
                              PotentialSpec::harmonic());
    CHECK_THROWS_AS(integrate(blowup, Vec::Constant(3, 3.0), Vec::Zero(3), {0.0, 10.0}), IntegrationError);
}

TEST_CASE("hertz compression integrates") {
    // The force is only C^1 at contact, which costs the 7(8) pair its order;
    // the 5(4) pair and the symplectic method keep the energy far better.
    const LatticeModel m(3, PotentialSpec::pendulum(1.0), PotentialSpec::hertz());
    Vec q0(3), p0 = Vec::Zero(3);
    q0 << 0.2, -0.2, 0.0;
    const auto times = uniform_times(20.0, 10);
    CHECK(integrate(m, q0, p0, times).max_energy_drift <= 1e-4);
    IntegrateOptions dp;
    dp.method = Integrator::DormandPrince;
    dp.tol = 1e-12;
    CHECK(integrate(m, q0, p0, times, dp).max_energy_drift <= 1e-9);
    IntegrateOptions sy;
    sy.method = Integrator::Symplectic;
    CHECK(integrate(m, q0, p0, times, sy).max_energy_drift <= 1e-9);
}

TEST_CASE("branch point passes and a corrupted copy fails") {
    const LatticeModel m(5, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic());
    const BranchPoint p = solve_at_amplitude(m, 1, BranchFamily::Traveling, 1e-2, 12);
    CHECK(verify_periodicity(m, p.loop).return_distance <= 1e-6);
    LoopState bad = p.loop;
    testgen::Rng rng(503);
    for (int l = 0; l <= bad.l0(); ++l)
        for (int j = 0; j < 5; ++j) bad.coeffs()(j, l) += std::complex<double>(1e-3 * rng.normal(), l ? 1e-3 * rng.normal() : 0.0);
    const PeriodicityReport rep = verify_periodicity(m, bad);
    CHECK(rep.return_distance > 1e-4);
    CHECK_FALSE(rep.passed);
}
