#include "ringwave/potentials.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "ringwave/errors.hpp"

namespace ringwave {

std::string_view to_string(Family f) {
    switch (f) {
        case Family::Pendulum: return "pendulum";
        case Family::Harmonic: return "harmonic";
        case Family::Hertz: return "hertz";
        case Family::Fpu: return "fpu";
        case Family::Toda: return "toda";
        case Family::Bistable: return "bistable";
        case Family::Polynomial: return "polynomial";
        case Family::Zero: return "zero";
    }
    return "?";
}

std::string_view to_string(Role r) { return r == Role::Onsite ? "onsite" : "coupling"; }

Family parse_family(std::string_view name) {
    for (Family f : {Family::Pendulum, Family::Harmonic, Family::Hertz, Family::Fpu, Family::Toda,
                     Family::Bistable, Family::Polynomial, Family::Zero}) {
        if (to_string(f) == name) return f;
    }
    throw ConfigError("unknown potential family '" + std::string(name) + "'");
}

PotentialSpec PotentialSpec::pendulum(double omega, Role role) {
    PotentialSpec p(Family::Pendulum, role);
    p.omega_ = omega;
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::harmonic(Role role) {
    PotentialSpec p(Family::Harmonic, role);
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::hertz(Role role) {
    PotentialSpec p(Family::Hertz, role);
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::fpu(double beta, Role role) {
    PotentialSpec p(Family::Fpu, role);
    p.beta_ = beta;
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::toda(Role role) {
    PotentialSpec p(Family::Toda, role);
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::bistable(double omega, Role role) {
    PotentialSpec p(Family::Bistable, role);
    p.omega_ = omega;
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coefficients, Role role) {
    PotentialSpec p(Family::Polynomial, role);
    p.coeffs_ = std::move(coefficients);
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::zero(Role role) {
    PotentialSpec p(Family::Zero, role);
    p.validate();
    return p;
}

void PotentialSpec::validate() const {
    if (family_ == Family::Hertz && role_ != Role::Coupling)
        throw ConfigError("hertz potential is only valid as a coupling potential");
    if ((family_ == Family::Pendulum || family_ == Family::Bistable) && role_ != Role::Onsite)
        throw ConfigError(std::string(to_string(family_)) + " potential is only valid on-site");
    if (!std::isfinite(omega_) || !std::isfinite(beta_))
        throw ConfigError("potential parameters must be finite");
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw ConfigError("polynomial coefficients must be finite");
}

bool PotentialSpec::is_even_about(double c) const {
    constexpr double tol = 1e-12;
    switch (family_) {
        case Family::Zero: return true;
        case Family::Pendulum: {
            const double turns = c / std::numbers::pi;
            return std::abs(turns - std::round(turns)) <= tol;
        }
        case Family::Harmonic:
        case Family::Bistable: return std::abs(c) <= tol;
        case Family::Fpu: return beta_ == 0.0 && std::abs(c) <= tol;
        case Family::Hertz:
        case Family::Toda: return false;
        case Family::Polynomial:
            for (double x : {0.125, 0.5, 1.0, 1.75}) {
                const double lhs = value(c + x);
                const double rhs = value(c - x);
                if (std::abs(lhs - rhs) > tol * (1.0 + std::abs(lhs))) return false;
            }
            return true;
    }
    return false;
}

bool PotentialSpec::is_quadratic() const {
    switch (family_) {
        case Family::Harmonic:
        case Family::Zero: return true;
        case Family::Fpu: return beta_ == 0.0;
        case Family::Polynomial: {
            for (std::size_t k = 3; k < coeffs_.size(); ++k)
                if (coeffs_[k] != 0.0) return false;
            return true;
        }
        default: return false;
    }
}

namespace {

double polynomial_eval(const std::vector<double>& c, int order, double x) {
    // Horner on the order-th derivative coefficients.
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(order);) {
        double factor = 1.0;
        for (int m = 0; m < order; ++m) factor *= static_cast<double>(k - m);
        acc = acc * x + factor * c[k];
    }
    return acc;
}

}  // namespace

double PotentialSpec::eval(int order, double x) const {
    if (order < 0 || order > 2) throw std::invalid_argument("potential derivative order must be 0, 1 or 2");
    if (!std::isfinite(x)) throw std::domain_error("potential evaluated at a non-finite argument");

    const double w2 = omega_ * omega_;
    switch (family_) {
        case Family::Pendulum:
            if (order == 0) {
                const double s = std::sin(0.5 * x);
                return 2.0 * w2 * s * s;
            }
            return order == 1 ? w2 * std::sin(x) : w2 * std::cos(x);
        case Family::Harmonic:
            return order == 0 ? 0.5 * x * x : (order == 1 ? x : 1.0);
        case Family::Hertz: {
            if (x > 0.0) return 0.0;
            const double c = -x;
            if (order == 0) return 0.4 * c * c * std::sqrt(c);
            if (order == 1) return -c * std::sqrt(c);
            return 1.5 * std::sqrt(c);
        }
        case Family::Fpu:
            if (order == 0) return 0.5 * x * x + beta_ * x * x * x / 3.0;
            return order == 1 ? x + beta_ * x * x : 1.0 + 2.0 * beta_ * x;
        case Family::Toda:
            if (order == 0) return std::expm1(-x) + x;
            return order == 1 ? -std::expm1(-x) : std::exp(-x);
        case Family::Bistable: {
            const double s = 1.0 - x * x;
            if (order == 0) return 0.25 * w2 * s * s;
            return order == 1 ? -w2 * x * s : w2 * (3.0 * x * x - 1.0);
        }
        case Family::Polynomial:
            return polynomial_eval(coeffs_, order, x);
        case Family::Zero:
            return 0.0;
    }
    throw ConfigError("unknown potential family");
}

Equilibrium find_equilibrium(const PotentialSpec& onsite, double seed) {
    if (onsite.family() == Family::Zero) return {0.0, 0.0};
    if (!std::isfinite(seed)) throw std::domain_error("equilibrium seed must be finite");

    double a = seed;
    for (int it = 0; it < 50; ++it) {
        const double g = onsite.d1(a);
        if (std::abs(g) <= kEquilibriumTol) return {a, std::abs(g)};
        const double h = onsite.d2(a);
        if (h == 0.0 || !std::isfinite(h))
            throw SolverError("equilibrium Newton hit a vanishing second derivative at a = " + std::to_string(a));
        a -= g / h;
    }
    const double g = std::abs(onsite.d1(a));
    if (g <= kEquilibriumTol) return {a, g};
    throw SolverError("equilibrium Newton did not converge within 50 iterations");
}

}  // namespace ringwave
