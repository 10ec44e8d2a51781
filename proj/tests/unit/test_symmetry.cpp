#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "gen.hpp"
#include "ringwave/errors.hpp"
#include "ringwave/galerkin.hpp"
#include "ringwave/symmetry.hpp"

using namespace ringwave;

namespace {

double loop_distance(const LoopState& a, const LoopState& b) { return (a.coeffs() - b.coeffs()).norm(); }

/// Direct time-domain reading of the action, independent of the coefficient formulas.
double pointwise(const GroupElement& g, const LoopState& x, int j, double t) {
    const int n = x.n();
    const int idx = (((g.reflect ? -j : j) + g.shift) % n + n) % n;
    const double phi = g.phase * std::numbers::pi / n;
    const double tau = g.reverse ? -(t + phi) : t + phi;
    return (g.negate ? -1.0 : 1.0) * x.value(idx, tau);
}

}  // namespace

TEST_CASE("action matches the pointwise definition") {
    testgen::for_cases(60, 101, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 9);
        const LoopState x = testgen::random_loop(rng, n, 4, 1.0);
        const GroupElement g = testgen::random_element(rng, n, true);
        const LoopState y = act(g, x);
        for (int s = 0; s < 5; ++s) {
            const double t = rng.uniform(0, 2 * std::numbers::pi);
            for (int j = 0; j < n; ++j) CHECK(std::abs(y.value(j, t) - pointwise(g, x, j, t)) <= 1e-12);
        }
    });
}

TEST_CASE("homomorphism, inverse and block consistency") {
    testgen::for_cases(250, 103, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 12);
        const LoopState x = testgen::random_loop(rng, n, 3, 1.0);
        const GroupElement g = testgen::random_element(rng, n, true);
        const GroupElement h = testgen::random_element(rng, n, true);
        CHECK(loop_distance(act(g * h, x), act(g, act(h, x))) <= 1e-12);
        CHECK((g * g.inverse()).is_identity());
        CHECK((g.inverse() * g).is_identity());

        const Vec packed = x.pack();
        const Vec moved = act(g, x).pack();
        for (int l = 0; l <= x.l0(); ++l) {
            const int off = l == 0 ? 0 : LoopState::packed_index(n, l, 0);
            const int len = l == 0 ? n : 2 * n;
            CHECK((action_block(g, l) * packed.segment(off, len) - moved.segment(off, len)).norm() <= 1e-12);
        }
    });
}

TEST_CASE("action keeps the mean real") {
    testgen::for_cases(50, 107, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 10);
        const LoopState y = act(testgen::random_element(rng, n, true), testgen::random_loop(rng, n, 3, 1.0));
        CHECK(y.coeffs().col(0).imag().norm() == 0.0);
    });
}

TEST_CASE("residual equivariance for plain models") {
    testgen::for_cases(60, 109, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 8);
        const LatticeModel m = testgen::random_plain_model(rng, n);
        const HarmonicBalance hb(m, 6);
        const LoopState x = testgen::random_loop(rng, n, 6, rng.uniform(0.5, 2.0), 0.2);
        const GroupElement g = testgen::random_element(rng, n, false);
        const LoopState fx = LoopState::unpack(hb.residual_packed(x), n, 6, x.nu());
        const LoopState lhs = LoopState::unpack(hb.residual_packed(act(g, x)), n, 6, x.nu());
        CHECK(loop_distance(lhs, act(g, fx)) <= 1e-10 * std::max(1.0, fx.coeffs().norm()));
    });
}

TEST_CASE("residual equivariance under the signed reflection") {
    const LatticeModel hertz(5, PotentialSpec::pendulum(1.0), PotentialSpec::hertz());
    const LatticeModel fpu(6, PotentialSpec::zero(), PotentialSpec::fpu(1.0), 0.0, true);
    testgen::for_cases(40, 113, [&](testgen::Rng& rng, int c) {
        const LatticeModel& m = c % 2 ? hertz : fpu;
        const int n = m.n();
        const HarmonicBalance hb(m, 6);
        const LoopState x = testgen::random_loop(rng, n, 6, 1.0, 0.2);
        const auto H = build_isotropy(m, c % 4 < 2 ? IsotropyLabel::SGlobal : IsotropyLabel::StGlobal);
        for (const auto& g : H.elements) {
            const LoopState fx = LoopState::unpack(hb.residual_packed(x), n, 6, x.nu());
            const LoopState lhs = LoopState::unpack(hb.residual_packed(act(g, x)), n, 6, x.nu());
            CHECK(loop_distance(lhs, act(g, fx)) <= 1e-10 * std::max(1.0, fx.coeffs().norm()));
        }
        // The unsigned reflection is not a symmetry of uneven coupling.
        const GroupElement kappa = GroupElement::make(n, true, 0, 0, false);
        const LoopState fx = LoopState::unpack(hb.residual_packed(x), n, 6, x.nu());
        const LoopState lhs = LoopState::unpack(hb.residual_packed(act(kappa, x)), n, 6, x.nu());
        CHECK(loop_distance(lhs, act(kappa, fx)) > 1e-6);
    });
}

TEST_CASE("fixed-point dimensions on the first harmonic") {
    for (int n = 3; n <= 12; ++n) {
        CAPTURE(n);
        const int s = fixed_space(build_isotropy(IsotropyLabel::SGlobal, n), 1, {1}).dim();
        const int st = fixed_space(build_isotropy(IsotropyLabel::StGlobal, n), 1, {1}).dim();
        CHECK(s == (n % 2 ? (n + 1) / 2 : n / 2 + 1));
        CHECK(st == (n % 2 ? (n - 1) / 2 : n / 2));
        CHECK(s == expected_dim_S(n));
        CHECK(st == expected_dim_St(n));
        // The signed variant agrees on odd harmonics.
        CHECK(fixed_space(build_isotropy(IsotropyLabel::SGlobal, n, 0, true), 1, {1}).dim() == s);
        CHECK(fixed_space(build_isotropy(IsotropyLabel::StGlobal, n, 0, true), 1, {1}).dim() == st);

        for (int k = 1; 2 * k <= n; ++k) {
            CAPTURE(k);
            CHECK(mode_block_dimension(build_isotropy(IsotropyLabel::T, n, k), k) == 1);
            if (2 * k < n) {
                CHECK(mode_block_dimension(build_isotropy(IsotropyLabel::S, n, k), k) == 1);
                CHECK(mode_block_dimension(build_isotropy(IsotropyLabel::St, n, k), k) == 1);
            }
        }
        CHECK(mode_block_dimension(build_isotropy(IsotropyLabel::T, n, n), n) == 1);
    }
}

TEST_CASE("projectors are symmetric idempotents and bases are fixed") {
    testgen::for_cases(30, 127, [](testgen::Rng& rng, int) {
        const int n = rng.integer(3, 10);
        const int k = rng.integer(1, n / 2);
        const auto label = std::array{IsotropyLabel::T, IsotropyLabel::S, IsotropyLabel::St}[rng.integer(0, 2)];
        if (2 * k == n && label != IsotropyLabel::T) return;
        const IsotropyGroup H = build_isotropy(label, n, k, rng.coin());
        for (int l = 0; l <= 3; ++l) {
            const Mat p = projector_block(H, l);
            CHECK((p * p - p).norm() <= 1e-10);
            CHECK((p - p.transpose()).norm() <= 1e-12);
        }
        const FixedSpaceBasis b = fixed_space(H, 3);
        CHECK((b.basis.transpose() * b.basis - Mat::Identity(b.dim(), b.dim())).norm() <= 1e-10);
        for (int c = 0; c < b.dim(); ++c) {
            const LoopState v = LoopState::unpack(b.basis.col(c), n, 3, 1.0);
            for (const auto& g : H.generators) CHECK(loop_distance(act(g, v), v) <= 1e-10);
        }
    });
}

TEST_CASE("symmetry residual separates fixed and generic loops") {
    testgen::Rng rng(131);
    const IsotropyGroup H = build_isotropy(IsotropyLabel::S, 7, 2);
    const FixedSpaceBasis b = fixed_space(H, 5);
    Vec c(b.dim());
    for (int i = 0; i < c.size(); ++i) c[i] = rng.normal();
    const LoopState fixed = LoopState::unpack(b.basis * c, 7, 5, 1.0);
    CHECK(symmetry_residual(fixed, H) <= 1e-12);
    CHECK(pattern_residual(fixed, H) <= 1e-12);
    CHECK(symmetry_residual(testgen::random_loop(rng, 7, 5, 1.0), H) > 1e-3);
}

TEST_CASE("group closure") {
    const IsotropyGroup s = build_isotropy(IsotropyLabel::SGlobal, 5);
    CHECK(s.order() == 4);
    for (const auto& g : s.elements)
        for (const auto& h : s.elements)
            CHECK(std::find(s.elements.begin(), s.elements.end(), g * h) != s.elements.end());
    const IsotropyGroup t = build_isotropy(IsotropyLabel::T, 6, 1);
    CHECK(t.order() >= 2 * 6);
    CHECK(t.name() == "T_1");
    CHECK(build_isotropy(IsotropyLabel::Full, 4).order() == 1);
}

TEST_CASE("labels and guards") {
    CHECK(parse_isotropy_label("S~") == IsotropyLabel::St);
    CHECK(to_string(IsotropyLabel::StGlobal) == "St_global");
    CHECK_THROWS_AS(parse_isotropy_label("Q"), ConfigError);
    CHECK_THROWS_AS(build_isotropy(IsotropyLabel::T, 6, 4), PreconditionError);
    CHECK_THROWS_AS(build_isotropy(IsotropyLabel::S, 2, 1), PreconditionError);

    const LatticeModel broken(5, PotentialSpec::polynomial({0, 0, 0.5, 0.2}, Role::Onsite), PotentialSpec::toda());
    CHECK_THROWS_AS(build_isotropy(broken, IsotropyLabel::SGlobal), SymmetryError);
    const LatticeModel hertz(5, PotentialSpec::pendulum(1.0), PotentialSpec::hertz());
    CHECK(build_isotropy(hertz, IsotropyLabel::SGlobal).signed_reflection);
    CHECK_THROWS_AS(require_equivariant(hertz, build_isotropy(IsotropyLabel::SGlobal, 5)), SymmetryError);
    CHECK_NOTHROW(require_equivariant(hertz, build_isotropy(hertz, IsotropyLabel::StGlobal)));
}

namespace {

LoopState first_mode_loop(int n, const std::function<double(int, double)>& profile) {
    // Fourier coefficient of a cos/sin-in-t profile from two samples.
    LoopState x(n, 1, 1.0);
    for (int j = 0; j < n; ++j) {
        const double c = profile(j, 0.0), s = profile(j, std::numbers::pi / 2);
        x.coeffs()(j, 1) = {c / 2, -s / 2};
    }
    return x;
}

}  // namespace

TEST_CASE("traveling loop is fixed by a space-time shift") {
    const int n = 5;
    const double zeta = 2 * std::numbers::pi / n;
    const LoopState x = first_mode_loop(n, [&](int j, double t) { return 2 * std::cos(t + j * zeta); });
    const GroupElement g = GroupElement::make(n, false, 1, 2 * n - 2, false);
    CHECK((act(g, x).coeffs() - x.coeffs()).norm() <= 1e-15);
    for (double t : {0.3, 2.0})
        for (int j = 0; j < n; ++j) CHECK(act(g, x).value(j, t) == doctest::Approx(2 * std::cos(t + j * zeta)));
}

TEST_CASE("templates against isotropy groups") {
    const int n = 7, k = 2;
    const double zeta = 2 * std::numbers::pi / n;
    const LoopState t = first_mode_loop(n, [&](int j, double s) { return 0.2 * std::cos(s + j * k * zeta); });
    const LoopState s = first_mode_loop(n, [&](int j, double u) { return 0.4 * std::cos(j * k * zeta) * std::cos(u); });
    CHECK(symmetry_residual(t, build_isotropy(IsotropyLabel::T, n, k)) <= 1e-12);
    CHECK(symmetry_residual(s, build_isotropy(IsotropyLabel::S, n, k)) <= 1e-12);
    CHECK(symmetry_residual(s, build_isotropy(IsotropyLabel::St, n, k)) > 0.1);
}

TEST_CASE("first-mode directions in mode coordinates") {
    const int n = 5;
    const CirculantBasis b = circulant_basis(n);
    auto coords = [&](IsotropyLabel label) {
        // Project the e_1 loop into Fix(H) and read the e_1, e_{n-1} components.
        Vec v(2 * n);
        v.head(n) = b.vector(1).real();
        v.tail(n) = b.vector(1).imag();
        const Vec p = projector_block(build_isotropy(label, n, 1), 1) * v;
        CVec x1(n);
        for (int j = 0; j < n; ++j) x1[j] = {p[j], p[n + j]};
        return std::pair{b.vector(1).dot(x1), b.vector(n - 1).dot(x1)};
    };
    const auto [t1, t4] = coords(IsotropyLabel::T);
    CHECK(std::abs(t4) <= 1e-12);
    CHECK(std::abs(t1) > 0.5);
    const auto [s1, s4] = coords(IsotropyLabel::S);
    CHECK(std::abs(s1) == doctest::Approx(std::abs(s4)).epsilon(1e-12));
}

TEST_CASE("generator presentations") {
    const IsotropyGroup st = build_isotropy(IsotropyLabel::St, 5, 1);
    const GroupElement kappa_pi = GroupElement::make(5, true, 0, 5, false);
    CHECK(std::find(st.elements.begin(), st.elements.end(), kappa_pi) != st.elements.end());
    const IsotropyGroup st6 = build_isotropy(IsotropyLabel::St, 6, 2);
    CHECK(st6.nbar == 3);
    CHECK(st6.kbar == 1);
    CHECK(st6.h == 2);
    const IsotropyGroup tn = build_isotropy(IsotropyLabel::T, 6, 6);
    CHECK(fixed_space(tn, 1, {1}).dim() == 1);
}
