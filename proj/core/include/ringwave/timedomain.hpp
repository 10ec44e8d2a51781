#pragma once

#include <string>
#include <vector>

#include "ringwave/galerkin.hpp"

namespace ringwave {

enum class Integrator {
    DormandPrince,   // adaptive 5(4) with dense output
    Fehlberg78,      // adaptive 7(8), stepping to each output time
    Symplectic       // fixed-step 4th-order symplectic RKN (McLachlan)
};

struct IntegrateOptions {
    double tol = 1e-10;          // absolute and relative
    Integrator method = Integrator::Fehlberg78;
    double dt = 1e-3;            // step for the symplectic method
    long long max_steps = 50'000'000;
};

struct TrajectorySample {
    std::vector<double> times;
    std::vector<Vec> q;
    std::vector<Vec> p;
    std::vector<double> energy;
    double max_energy_drift = 0.0;   // max |H(t) - H(0)| / max(|H(0)|, 1e-300)
};

/// Integrates -q'' = grad V(q) and records (q, p) at `times` (ascending, starting >= 0).
/// Throws IntegrationError on non-finite states or step-size underflow.
TrajectorySample integrate(const LatticeModel& model, const Vec& q0, const Vec& p0, const std::vector<double>& times,
                           const IntegrateOptions& opts = {});

/// Uniform grid of `count` + 1 times spanning [0, duration].
std::vector<double> uniform_times(double duration, int count);

struct PeriodicityReport {
    double period = 0.0;             // 2 pi / nu
    double return_distance = 0.0;    // |(q, p)(T) - (q, p)(0)|
    double max_deviation = 0.0;      // max_t |q(t) - (a + x(nu t))|
    double energy_drift = 0.0;
    bool passed = false;             // return_distance <= threshold
};

/// Integrates one period from the loop's phase point at t = 0 and compares with the loop.
PeriodicityReport verify_periodicity(const LatticeModel& model, const LoopState& x, const IntegrateOptions& opts = {},
                                     int samples = 64, double threshold = 1e-6);

}  // namespace ringwave
