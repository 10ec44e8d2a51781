#include "ringwave/cradle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ringwave/errors.hpp"
#include "ringwave/spectrum.hpp"

namespace ringwave {

namespace {

constexpr double kAcceptGradient = 1e-8;

std::vector<int> slave_harmonics(int l0) {
    std::vector<int> hs{0};
    for (int l = 2; l <= l0; ++l) hs.push_back(l);
    return hs;
}

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double gaussian(std::mt19937_64& gen) {
    const double u1 = 1.0 - uniform01(gen);
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sign convention for representatives of {u, -u}: largest entry positive.
Vec canonical_sign(Vec u) {
    Eigen::Index i = 0;
    u.cwiseAbs().maxCoeff(&i);
    if (u[i] < 0.0) u = -u;
    return u;
}

}  // namespace

double energy(const LatticeModel& model, const Vec& q, const Vec& p) { return 0.5 * p.squaredNorm() + model.potential(q); }

std::pair<Vec, Vec> phase_point(const LatticeModel& model, const LoopState& x, double t) {
    const double tau = x.nu() * t;
    Vec q = x.value(tau).array() + model.a();
    Vec p = x.nu() * x.derivative(tau);
    return {std::move(q), std::move(p)};
}

// ---------------------------------------------------------------------------
// ReducedPotential

ReducedPotential::ReducedPotential(const LatticeModel& model, const IsotropyGroup& H, double nu, int l0)
    : hb_(model, l0), group_(H), nu_(nu) {
    if (model.coupling_curvature() != 0.0 || !(model.onsite_curvature() > 0.0))
        throw PreconditionError("reduced potential needs W''(0) = 0 and U''(a) > 0 (cradle spectrum)");
    if (!dispersion(model).all_equal) throw PreconditionError("cradle module requires all nu_k equal");
    if (!(nu > 0.0)) throw PreconditionError("reduced potential needs nu > 0");
    if (H.n != model.n()) throw PreconditionError("group and model have different n");
    require_equivariant(model, H);
    omega_ = std::sqrt(model.onsite_curvature());
    b1_ = fixed_space(H, l0, {1}, model.zero_mean_mode()).basis;
    b2_ = fixed_space(H, l0, slave_harmonics(l0), model.zero_mean_mode()).basis;
}

ReducedPotential::Value ReducedPotential::evaluate(const Vec& u) {
    if (u.size() != dim()) throw PreconditionError("reduced coordinates have the wrong length");
    const int n = hb_.model().n();
    const LoopState x1 = LoopState::unpack(b1_ * u, n, hb_.l0(), nu_);
    SlaveResult s = solve_slave(hb_, x1, &b2_, have_warm_ ? &warm_ : nullptr, 1e-12, 40);
    warm_ = s.tail;
    have_warm_ = true;

    Value v;
    v.phi = hb_.action(s.total);
    v.gradient = (4.0 * std::numbers::pi) * (b1_.transpose() * hb_.residual_packed(s.total));
    v.loop = std::move(s.total);
    return v;
}

double quadratic_ratio(ReducedPotential& rp, const Vec& direction, double s) {
    const Vec d = direction / direction.norm();
    return rp.value(s * d) / (s * s);
}

double quadratic_coefficient(ReducedPotential& rp, const Vec& direction, double s) {
    return 2.0 * quadratic_ratio(rp, direction, s) - quadratic_ratio(rp, direction, 4.0 * s);
}

// ---------------------------------------------------------------------------
// Critical points

CriticalPointSet critical_points(const LatticeModel& model, const IsotropyGroup& H, double nu, const CradleOptions& opts) {
    ReducedPotential rp(model, H, nu, opts.l0);
    const double gap = std::abs(nu - rp.omega());
    if (gap < 1e-3 || gap > 1e-1)
        throw PreconditionError(fmt::format("|nu - omega| = {:.3g} outside [1e-3, 1e-1]", gap));

    CriticalPointSet out;
    out.group = H.name();
    out.nu = nu;
    out.omega = rp.omega();
    out.below = nu < rp.omega();
    const int d = rp.dim();
    if (d == 0) return out;

    std::mt19937_64 gen(opts.seed);
    out.starts = opts.starts_per_dim * d;

    auto radial_slope = [&](const Vec& v, double s) { return rp.evaluate(s * v).gradient.dot(v); };

    for (int start = 0; start < out.starts; ++start) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = gaussian(gen);
        v /= v.norm();

        // Bracket the first zero of d/ds Phi(s v) on a geometric grid.
        double s_lo = 0.0, s_hi = 0.0, g_lo = 0.0;
        bool bracketed = false;
        try {
            const double ratio = std::pow(opts.s_max / opts.s_min, 1.0 / (opts.radial_samples - 1));
            double s_prev = opts.s_min;
            double g_prev = radial_slope(v, s_prev);
            for (int i = 1; i < opts.radial_samples && !bracketed; ++i) {
                const double s = s_prev * ratio;
                const double g = radial_slope(v, s);
                if ((g > 0.0) != (g_prev > 0.0)) {
                    s_lo = s_prev;
                    s_hi = s;
                    g_lo = g_prev;
                    bracketed = true;
                }
                s_prev = s;
                g_prev = g;
            }
            if (!bracketed) continue;
            for (int it = 0; it < 60 && s_hi - s_lo > 1e-10 * s_hi; ++it) {
                const double mid = 0.5 * (s_lo + s_hi);
                const double g = radial_slope(v, mid);
                if ((g > 0.0) == (g_lo > 0.0)) {
                    s_lo = mid;
                    g_lo = g;
                } else {
                    s_hi = mid;
                }
            }
        } catch (const SolverError&) {
            if (!bracketed) continue;
        }

        // Newton on grad Phi = 0 with a central-difference Hessian.
        Vec u = 0.5 * (s_lo + s_hi) * v;
        double gnorm = std::numeric_limits<double>::infinity();
        try {
            ReducedPotential::Value val = rp.evaluate(u);
            gnorm = val.gradient.norm();
            for (int it = 0; it < 30 && gnorm > opts.grad_tol; ++it) {
                const double h = 1e-6 * std::max(1e-2, u.norm());
                Mat hess(d, d);
                for (int i = 0; i < d; ++i) {
                    Vec e = Vec::Zero(d);
                    e[i] = h;
                    hess.col(i) = (rp.evaluate(u + e).gradient - rp.evaluate(u - e).gradient) / (2.0 * h);
                }
                hess = 0.5 * (hess + hess.transpose()).eval();
                const Vec step = hess.fullPivLu().solve(-val.gradient);
                if (!step.allFinite()) break;
                double lambda = 1.0;
                bool ok = false;
                for (int bt = 0; bt < 10; ++bt) {
                    ReducedPotential::Value trial = rp.evaluate(u + lambda * step);
                    if (trial.gradient.norm() < gnorm) {
                        u += lambda * step;
                        val = std::move(trial);
                        gnorm = val.gradient.norm();
                        ok = true;
                        break;
                    }
                    lambda *= 0.5;
                }
                if (!ok) break;
            }
        } catch (const SolverError&) {
            continue;
        }
        if (!(gnorm <= kAcceptGradient) || u.norm() < 0.5 * opts.s_min) continue;
        ++out.converged_starts;

        u = canonical_sign(u);
        bool duplicate = false;
        for (auto& p : out.points) {
            if (std::min((p.u - u).norm(), (p.u + u).norm()) <= opts.dedup_tol) {
                ++p.hits;
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        CriticalPoint cp;
        cp.u = u;
        cp.nu = nu;
        cp.grad_norm = gnorm;
        cp.amplitude = u.norm();
        cp.hits = 1;
        out.points.push_back(std::move(cp));
    }

    std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) { return a.amplitude < b.amplitude; });

    const HarmonicBalance& hb = rp.discretisation();
    const Mat full = fixed_space(H, opts.l0, {}, model.zero_mean_mode()).basis;
    std::vector<CriticalPoint> kept;
    for (auto& cp : out.points) {
        const ReducedPotential::Value val = rp.evaluate(cp.u);
        cp.phi = val.phi;
        const NewtonReport nr = newton_solve(hb, hb.zero(nu), full, full.transpose() * val.loop.pack(), 1e-12, 30);
        cp.loop = LoopState::unpack(full * nr.coords, model.n(), opts.l0, nu);
        cp.polished_residual = hb.residual(cp.loop).total;
        cp.polished = nr.converged && cp.polished_residual <= opts.polish_tol;
        if (!cp.polished) {
            ++out.rejected;
            continue;
        }
        const auto [q, p] = phase_point(model, cp.loop);
        cp.energy = energy(model, q, p);
        cp.orbit = static_cast<int>(kept.size());
        kept.push_back(std::move(cp));
    }
    out.points = std::move(kept);
    return out;
}

}  // namespace ringwave
