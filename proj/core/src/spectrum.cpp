#include "ringwave/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ringwave/errors.hpp"

namespace ringwave {

const DispersionEntry& DispersionTable::at(int k) const {
    const int kk = ((k % n) + n) % n == 0 ? n : k;
    for (const auto& e : entries)
        if (e.k == kk) return e;
    // Modes above n/2 share the frequency of n - k.
    const int mirror = n - kk;
    for (const auto& e : entries)
        if (e.k == mirror) return e;
    throw std::out_of_range("dispersion table has no mode " + std::to_string(k));
}

double frequency_squared(const LatticeModel& model, int k) {
    return model.onsite_curvature() + circulant_eigenvalue(model.n(), k) * model.coupling_curvature();
}

DispersionTable dispersion(const LatticeModel& model) {
    DispersionTable t;
    t.n = model.n();
    t.all_equal = model.coupling_curvature() == 0.0;
    auto add = [&](int k) {
        DispersionEntry e;
        e.k = k;
        e.nu_sq = frequency_squared(model, k);
        e.boundary = std::abs(e.nu_sq) <= kBoundaryTol;
        e.bifurcating = e.nu_sq > kBoundaryTol;
        e.nu = e.nu_sq > 0.0 ? std::sqrt(e.nu_sq) : 0.0;
        t.entries.push_back(e);
    };
    for (int k = 1; k <= model.n() / 2; ++k) add(k);
    add(model.n());
    return t;
}

double resonance_parameter(int n, int k, int j, int l) {
    if (l < 2) throw PreconditionError("resonance parameter needs l >= 2");
    if (((j - k) % n + n) % n == 0) throw PreconditionError("resonance parameter needs j != k");
    const double sk = circulant_eigenvalue(n, k);
    const double sj = circulant_eigenvalue(n, j);
    const double inv_l2 = 1.0 / (static_cast<double>(l) * l);
    return -(sk - sj * inv_l2) / (1.0 - inv_l2);
}

ResonanceReport non_resonance_check(const LatticeModel& model, int k, int l_max) {
    const int n = model.n();
    if (l_max < 2) throw PreconditionError("l_max must be at least 2");
    const double nu_k_sq = frequency_squared(model, k);
    if (!(nu_k_sq > kBoundaryTol))
        throw PreconditionError("mode " + std::to_string(k) + " has nu_k^2 <= 0; nothing bifurcates");

    ResonanceReport rep;
    rep.k = k;
    rep.degenerate = model.coupling_curvature() == 0.0;
    const double nu_k = std::sqrt(nu_k_sq);
    const int k_eff = (k % n == 0) ? 0 : k;

    double nu_max = 0.0;
    for (int j = k_eff + 1; j <= n / 2; ++j) nu_max = std::max(nu_max, std::sqrt(std::max(0.0, frequency_squared(model, j))));

    for (int l = 2; l <= l_max; ++l) {
        if (l * nu_k > nu_max + kResonanceTol) break;
        for (int j = k_eff + 1; j <= n / 2; ++j) {
            const double nsq = frequency_squared(model, j);
            const double nu_j = nsq > 0.0 ? std::sqrt(nsq) : 0.0;
            rep.resonance_parameters.push_back({l, j, resonance_parameter(n, k, j, l)});
            if (std::abs(l * nu_k - nu_j) <= kResonanceTol) rep.resonant_pairs.push_back({l, j, nu_j, l * nu_k});
        }
    }
    rep.non_resonant = rep.resonant_pairs.empty();
    return rep;
}

K0Result k0_threshold(const LatticeModel& model) {
    K0Result res;
    const int n = model.n();
    for (int k = 1; k <= n / 2; ++k) {
        const double nsq = frequency_squared(model, k);
        if (std::abs(nsq) <= kBoundaryTol) {
            res.boundary_modes.push_back(k);
            continue;
        }
        if (nsq > 0.0 && !res.k0) res.k0 = k;
    }
    const double ratio = std::sqrt(std::max(0.0, -model.onsite_curvature())) /
                         (2.0 * std::sqrt(std::max(model.coupling_curvature(), 1e-300)));
    res.asymptotic = ratio <= 1.0 ? (n / std::numbers::pi) * std::asin(ratio) : std::nan("");
    return res;
}

}  // namespace ringwave
