#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringwave/galerkin.hpp"
#include "ringwave/symmetry.hpp"

namespace ringwave {

/// H(q, p) = |p|^2 / 2 + V(q).
double energy(const LatticeModel& model, const Vec& q, const Vec& p);

/// Reduced potential Phi(u) = F(x1 + x2(x1)) on the first-harmonic part of Fix(H),
/// x1 = B1 u, with the higher harmonics x2 solved in Fix(H) by solve_slave.
///
/// Requires W''(0) = 0 and U''(a) > 0 (all nu_k equal). Not thread-safe (warm starts
/// and FFT plans are cached); use one instance per thread.
class ReducedPotential {
public:
    ReducedPotential(const LatticeModel& model, const IsotropyGroup& H, double nu, int l0 = 16);

    struct Value {
        double phi = 0.0;
        Vec gradient;
        LoopState loop;
    };

    Value evaluate(const Vec& u);
    double value(const Vec& u) { return evaluate(u).phi; }

    int dim() const { return static_cast<int>(b1_.cols()); }
    double nu() const { return nu_; }
    double omega() const { return omega_; }
    int l0() const { return hb_.l0(); }
    const IsotropyGroup& group() const { return group_; }
    const Mat& master_basis() const { return b1_; }
    const Mat& slave_basis() const { return b2_; }
    const HarmonicBalance& discretisation() const { return hb_; }

private:
    HarmonicBalance hb_;
    IsotropyGroup group_;
    double nu_;
    double omega_;
    Mat b1_;
    Mat b2_;
    LoopState warm_;
    bool have_warm_ = false;
};

/// Phi(s d) / s^2 for a unit direction d; tends to 2 pi (nu^2 - omega^2).
double quadratic_ratio(ReducedPotential& rp, const Vec& direction, double s);

/// Quadratic coefficient with the O(s^{1/2}) Hertz correction eliminated:
/// 2 q(s) - q(4 s), q = quadratic_ratio.
double quadratic_coefficient(ReducedPotential& rp, const Vec& direction, double s);

struct CradleOptions {
    std::uint64_t seed = 0;
    int starts_per_dim = 8;
    double s_min = 1e-3;
    double s_max = 2.0;
    int radial_samples = 48;
    double grad_tol = 1e-10;
    double dedup_tol = 1e-6;
    double polish_tol = 1e-9;
    int l0 = 16;
};

struct CriticalPoint {
    Vec u;
    double nu = 0.0;
    double phi = 0.0;
    double grad_norm = 0.0;
    double amplitude = 0.0;   // |u|
    int orbit = 0;
    int hits = 0;             // number of starts converging here
    LoopState loop;           // polished full solution
    double polished_residual = 0.0;
    bool polished = false;
    double energy = 0.0;
};

struct CriticalPointSet {
    std::string group;
    double nu = 0.0;
    double omega = 0.0;
    bool below = false;       // nu < omega
    int starts = 0;
    int converged_starts = 0;
    int rejected = 0;         // reduced critical points whose full solution did not polish
    std::vector<CriticalPoint> points;
};

/// Multistart search for nonzero critical points of Phi on Fix(H) at fixed nu:
/// radial bracketing of d/ds Phi(s v), Newton on grad Phi = 0 with a
/// finite-difference Hessian, deduplication modulo u -> -u, and a full Newton
/// polish in Fix(H). Requires |nu - omega| in [1e-3, 1e-1].
CriticalPointSet critical_points(const LatticeModel& model, const IsotropyGroup& H, double nu,
                                 const CradleOptions& opts = {});

/// Phase-space point (q, p) of the orbit q(t) = a + x(nu t) at t = 0.
std::pair<Vec, Vec> phase_point(const LatticeModel& model, const LoopState& x, double t = 0.0);

}  // namespace ringwave
