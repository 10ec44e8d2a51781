#pragma once

#include <optional>
#include <vector>

#include "ringwave/lattice.hpp"

namespace ringwave {

/// Absolute tolerance on frequencies when testing l nu_k == nu_j.
inline constexpr double kResonanceTol = 1e-9;
/// |nu_k^2| below this is a boundary mode: neither bifurcating nor excluded as negative.
inline constexpr double kBoundaryTol = 1e-12;

struct DispersionEntry {
    int k = 0;
    double nu_sq = 0.0;   // U''(a) + (2 sin k pi/n)^2 W''(0)
    double nu = 0.0;      // sqrt(nu_sq) when positive, else 0
    bool bifurcating = false;
    bool boundary = false;
};

/// Linear-mode frequencies for k = 1..floor(n/2) and k = n.
struct DispersionTable {
    int n = 0;
    std::vector<DispersionEntry> entries;
    bool all_equal = false;  // W''(0) = 0: every nu_k coincides

    const DispersionEntry& at(int k) const;
    double nu(int k) const { return at(k).nu; }
};

DispersionTable dispersion(const LatticeModel& model);

/// nu_k^2 for any k (reduced mod n).
double frequency_squared(const LatticeModel& model, int k);

struct ResonantPair {
    int l = 0;
    int j = 0;
    double nu_j = 0.0;
    double l_nu_k = 0.0;
};

struct ResonanceReport {
    int k = 0;
    std::vector<ResonantPair> resonant_pairs;
    /// omega_l(j) for every (l, j) that was examined, in enumeration order.
    struct Parameter {
        int l;
        int j;
        double omega;
    };
    std::vector<Parameter> resonance_parameters;
    bool degenerate = false;  // all frequencies equal: the non-resonance test does not apply
    bool non_resonant = true;
};

/// Enumerates l >= 2, j in (k, n/2] with |l nu_k - nu_j| <= kResonanceTol.
/// k = n is treated as mode 0 (j ranges over [1, n/2]).
ResonanceReport non_resonance_check(const LatticeModel& model, int k, int l_max = 16);

/// omega_l(j) = -[(2 sin k pi/n)^2 - (2 sin j pi/n)^2 / l^2] / (1 - 1/l^2).
double resonance_parameter(int n, int k, int j, int l);

struct K0Result {
    std::optional<int> k0;           // smallest k in [1, n/2] with nu_k^2 > 0
    std::vector<int> boundary_modes; // k with nu_k^2 == 0 (within kBoundaryTol)
    double asymptotic = 0.0;         // (n / pi) arcsin(omega / 2), reported for reference
};

/// Threshold mode for an unstable on-site equilibrium (U''(a) < 0), e.g. the
/// inverted pendulum a = pi.
K0Result k0_threshold(const LatticeModel& model);

}  // namespace ringwave
