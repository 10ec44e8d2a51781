#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ringwave {

/// Profile value a_j and momentum b_j = W'(a_j - a_{j-1}) for W = (2/5)|x|^{5/2}.
struct PlanarState {
    double a = 0.0;
    double b = 0.0;
};

/// b |b|^{-1/3}, extended by 0 at b = 0.
double signed_two_thirds(double b);

/// phi(a, b) = (a + b|b|^{-1/3}, b - (a + b|b|^{-1/3})).
PlanarState planar_map(const PlanarState& s);

/// Analytic Jacobian [[1, c], [-1, 1 - c]], c = (2/3)|b|^{-1/3}. Rejects b = 0.
Eigen::Matrix2d map_jacobian(const PlanarState& s);
double map_jacobian_det(const PlanarState& s);

std::vector<PlanarState> map_orbit(const PlanarState& seed, int steps);

struct ScanRow {
    double seed_a = 0.0;
    double seed_b = 0.0;
    double max_radius = 0.0;
    bool escaped = false;
    long long escape_step = -1;
};

/// Seeds r (cos th, sin th) for r = r_max i / n_radii (i = 1..n_radii) and n_angles
/// angles, preceded by the origin.
std::vector<PlanarState> polar_grid(double r_max, int n_radii, int n_angles);

/// Max |(a, b)| over `iterations` iterates of each seed; iterates beyond
/// escape_radius or non-finite are recorded as escaped.
std::vector<ScanRow> orbit_scan(const std::vector<PlanarState>& seeds, long long iterations,
                                double escape_radius = 1e12);

/// Full even potential (2/5)|q|^{5/2} of the scalar oscillator -q'' = W'(q).
double homogeneous_potential(double q);
double homogeneous_force(double q);   // -W'(q)

/// Turning point (5E/2)^{2/5}.
double turning_point(double energy);

/// T(E) = 4 int_0^{q_max} dq / sqrt(2 (E - W(q))) by Gauss-Kronrod after q = q_max sin(theta).
double scalar_period(double energy);

struct ScalarOrbit {
    double energy = 0.0;
    double period = 0.0;             // from integration
    std::vector<double> t;
    std::vector<double> q;
    std::vector<double> p;
    double max_energy_error = 0.0;   // relative
};

/// Integrates q(0) = q_max, p(0) = 0 with an adaptive 7(8) method; the period is four
/// times the first zero of q. Samples span one period.
ScalarOrbit scalar_orbit(double energy, int samples = 256, double tol = 1e-13);

}  // namespace ringwave
