#include "ringwave/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "ringwave/errors.hpp"

namespace ringwave {

double signed_two_thirds(double b) {
    if (b == 0.0) return 0.0;
    return std::copysign(std::cbrt(b * b), b);
}

PlanarState planar_map(const PlanarState& s) {
    const double a1 = s.a + signed_two_thirds(s.b);
    return {a1, s.b - a1};
}

Eigen::Matrix2d map_jacobian(const PlanarState& s) {
    if (s.b == 0.0) throw PreconditionError("map Jacobian is singular at b = 0");
    const double c = (2.0 / 3.0) / std::cbrt(std::abs(s.b));
    Eigen::Matrix2d j;
    j << 1.0, c, -1.0, 1.0 - c;
    return j;
}

double map_jacobian_det(const PlanarState& s) { return map_jacobian(s).determinant(); }

std::vector<PlanarState> map_orbit(const PlanarState& seed, int steps) {
    std::vector<PlanarState> out{seed};
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i < steps; ++i) out.push_back(planar_map(out.back()));
    return out;
}

std::vector<PlanarState> polar_grid(double r_max, int n_radii, int n_angles) {
    if (n_radii < 1 || n_angles < 1 || !(r_max > 0.0)) throw PreconditionError("polar grid needs positive sizes");
    std::vector<PlanarState> seeds{{0.0, 0.0}};
    for (int i = 1; i <= n_radii; ++i) {
        const double r = r_max * i / n_radii;
        for (int k = 0; k < n_angles; ++k) {
            const double th = 2.0 * std::numbers::pi * k / n_angles;
            seeds.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    return seeds;
}

std::vector<ScanRow> orbit_scan(const std::vector<PlanarState>& seeds, long long iterations, double escape_radius) {
    if (iterations < 0 || iterations > 10'000'000) throw PreconditionError("iterations must lie in [0, 1e7]");
    std::vector<ScanRow> rows;
    rows.reserve(seeds.size());
    for (const auto& seed : seeds) {
        ScanRow row{seed.a, seed.b, std::hypot(seed.a, seed.b), false, -1};
        PlanarState s = seed;
        for (long long i = 1; i <= iterations; ++i) {
            s = planar_map(s);
            const double r = std::hypot(s.a, s.b);
            if (!std::isfinite(r) || r > escape_radius) {
                row.escaped = true;
                row.escape_step = i;
                break;
            }
            row.max_radius = std::max(row.max_radius, r);
        }
        rows.push_back(row);
    }
    return rows;
}

double homogeneous_potential(double q) {
    const double x = std::abs(q);
    return 0.4 * x * x * std::sqrt(x);
}

double homogeneous_force(double q) {
    const double x = std::abs(q);
    return -std::copysign(x * std::sqrt(x), q);
}

double turning_point(double energy) { return std::pow(2.5 * energy, 0.4); }

double scalar_period(double energy) {
    if (!(energy > 0.0)) throw PreconditionError("scalar period needs E > 0");
    const double qmax = turning_point(energy);
    const double scale = 0.4 * std::pow(qmax, 2.5);
    // 1 - sin^{5/2}(theta) written via w = sin(theta) - 1 = -2 sin^2(pi/4 - theta/2) to avoid cancellation.
    auto integrand = [&](double th) {
        const double half = std::sin(0.25 * std::numbers::pi - 0.5 * th);
        const double w = -2.0 * half * half;
        const double gap = -std::expm1(2.5 * std::log1p(w));
        if (gap <= 0.0) return qmax / std::sqrt(2.5 * scale);
        return qmax * std::cos(th) / std::sqrt(2.0 * scale * gap);
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 0.5 * std::numbers::pi, 15, 1e-14);
    return 4.0 * integral;
}

ScalarOrbit scalar_orbit(double energy, int samples, double tol) {
    using namespace boost::numeric::odeint;
    using State = std::array<double, 2>;
    if (!(energy > 0.0)) throw PreconditionError("scalar orbit needs E > 0");
    if (samples < 2) throw PreconditionError("scalar orbit needs at least two samples");

    auto rhs = [](const State& s, State& ds, double) {
        ds[0] = s[1];
        ds[1] = homogeneous_force(s[0]);
    };
    auto stepper = make_controlled(tol, tol, runge_kutta_fehlberg78<State>());
    auto advance = [&](State s, double dt) {
        if (dt > 0.0) integrate_adaptive(stepper, rhs, s, 0.0, dt, dt / 16.0);
        return s;
    };

    ScalarOrbit orb;
    orb.energy = energy;
    const State start{turning_point(energy), 0.0};

    // Coarse march to bracket the first zero of q, then bisection in time.
    const double guess = scalar_period(energy);
    const double dt = guess / 64.0;
    State s = start;
    double t = 0.0;
    while (s[0] > 0.0) {
        State next = advance(s, dt);
        if (next[0] <= 0.0) break;
        s = next;
        t += dt;
        if (t > 4.0 * guess) throw IntegrationError("scalar orbit failed to reach q = 0");
    }
    double lo = 0.0, hi = dt;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (t + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (advance(s, mid)[0] > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    orb.period = 4.0 * (t + 0.5 * (lo + hi));

    // Only [0, T/4] is integrated; the rest follows from q(-t) = q(t) and q(t + T/2) = -q(t).
    const double quarter = 0.25 * orb.period;
    struct Fold {
        double s;
        double qs;
        double ps;
    };
    std::vector<Fold> folds(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double ti = orb.period * i / (samples - 1);
        Fold& f = folds[static_cast<std::size_t>(i)];
        if (ti <= quarter) f = {ti, 1, 1};
        else if (ti <= 2 * quarter) f = {2 * quarter - ti, -1, 1};
        else if (ti <= 3 * quarter) f = {ti - 2 * quarter, -1, -1};
        else f = {orb.period - ti, 1, -1};
        f.s = std::clamp(f.s, 0.0, quarter);
    }
    std::vector<std::size_t> order(folds.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return folds[x].s < folds[y].s; });
    std::vector<State> at(folds.size());
    State cur = start;
    double tc = 0.0;
    for (std::size_t idx : order) {
        cur = advance(cur, folds[idx].s - tc);
        tc = folds[idx].s;
        at[idx] = cur;
    }
    for (int i = 0; i < samples; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double q = folds[u].qs * at[u][0];
        const double pv = folds[u].ps * at[u][1];
        orb.t.push_back(orb.period * i / (samples - 1));
        orb.q.push_back(q);
        orb.p.push_back(pv);
        const double e = 0.5 * pv * pv + homogeneous_potential(q);
        orb.max_energy_error = std::max(orb.max_energy_error, std::abs(e - energy) / energy);
    }
    return orb;
}

}  // namespace ringwave
