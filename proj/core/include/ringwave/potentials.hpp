#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ringwave {

enum class Family { Pendulum, Harmonic, Hertz, Fpu, Toda, Bistable, Polynomial, Zero };
enum class Role { Onsite, Coupling };

std::string_view to_string(Family f);
std::string_view to_string(Role r);
Family parse_family(std::string_view name);  // throws ConfigError

/// One scalar potential (on-site U or coupling W) with its parameters.
///
/// Families and their values:
///   pendulum    w^2 (1 - cos x)
///   harmonic    x^2 / 2
///   hertz       (2/5) |x|^{5/2} for x <= 0, 0 for x > 0   (coupling only)
///   fpu         x^2/2 + beta x^3 / 3
///   toda        e^{-x} + x - 1
///   bistable    w^2 (1 - x^2)^2 / 4
///   polynomial  sum_k c_k x^k
///   zero        0
class PotentialSpec {
public:
    static PotentialSpec pendulum(double omega, Role role = Role::Onsite);
    static PotentialSpec harmonic(Role role = Role::Coupling);
    static PotentialSpec hertz(Role role = Role::Coupling);
    static PotentialSpec fpu(double beta, Role role = Role::Coupling);
    static PotentialSpec toda(Role role = Role::Coupling);
    static PotentialSpec bistable(double omega, Role role = Role::Onsite);
    static PotentialSpec polynomial(std::vector<double> coefficients, Role role);
    static PotentialSpec zero(Role role = Role::Onsite);

    Family family() const { return family_; }
    Role role() const { return role_; }
    double omega() const { return omega_; }
    double beta() const { return beta_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    /// Value (order 0), first (1) or second (2) derivative at x.
    double eval(int order, double x) const;
    double value(double x) const { return eval(0, x); }
    double d1(double x) const { return eval(1, x); }
    double d2(double x) const { return eval(2, x); }

    /// True when the force is linear in x (harmonic, zero, polynomial of degree <= 2).
    bool is_quadratic() const;

    /// True when x -> value(c + x) is even, i.e. value(c + x) = value(c - x).
    bool is_even_about(double c) const;

private:
    PotentialSpec(Family f, Role r) : family_(f), role_(r) {}
    void validate() const;

    Family family_;
    Role role_;
    double omega_ = 0.0;
    double beta_ = 0.0;
    std::vector<double> coeffs_;
};

struct Equilibrium {
    double a = 0.0;
    double residual = 0.0;  // |U'(a)|
};

/// Scalar Newton iteration on U'(a) = 0. Returns a = 0 for the zero family.
Equilibrium find_equilibrium(const PotentialSpec& onsite, double seed);

inline constexpr double kEquilibriumTol = 1e-12;

}  // namespace ringwave
