#pragma once

#include <string>
#include <vector>

#include "ringwave/galerkin.hpp"

namespace ringwave {

/// Element of D_n x O(2) acting on loops by
///
///     (rho(g) x)_j(t) = x_{s j + shift}(tau(t)),   s = reflect ? -1 : 1,
///     tau(t) = t + phi              (reverse = false)
///     tau(t) = -(t + phi)           (reverse = true)
///
/// with phi = phase * pi / n, multiplied by -1 when `negate` is set (the signed
/// reflection of lattices with uneven coupling). Angles are kept as integers mod 2n,
/// so group arithmetic is exact. Products satisfy rho(g * h) = rho(g) rho(h).
struct GroupElement {
    int n = 0;
    bool reflect = false;
    int shift = 0;   // mod n
    int phase = 0;   // mod 2n, units of pi / n
    bool reverse = false;
    bool negate = false;

    static GroupElement identity(int n) { return {n, false, 0, 0, false, false}; }
    static GroupElement make(int n, bool reflect, int shift, int phase, bool reverse, bool negate = false);

    double angle() const;
    GroupElement inverse() const;
    bool is_identity() const { return !reflect && shift == 0 && phase == 0 && !reverse && !negate; }
    bool operator==(const GroupElement&) const = default;
    bool operator<(const GroupElement& o) const;
    std::string str() const;
};

GroupElement operator*(const GroupElement& g, const GroupElement& h);

/// rho(g) x in coefficient space.
LoopState act(const GroupElement& g, const LoopState& x);

/// Real matrix of rho(g) on harmonic l of the packed coordinates
/// (n x n for l = 0, 2n x 2n for l >= 1).
Mat action_block(const GroupElement& g, int l);

enum class IsotropyLabel { T, S, St, SGlobal, StGlobal, Full };

std::string to_string(IsotropyLabel label);
IsotropyLabel parse_isotropy_label(const std::string& s);

struct IsotropyGroup {
    IsotropyLabel label = IsotropyLabel::Full;
    int n = 0;
    bool signed_reflection = false;
    int k = 0;       // 0 for S, S~ and Full
    int h = 0;       // gcd(k, n)
    int kbar = 0;    // k / h
    int nbar = 0;    // n / h
    int m = 0;       // kbar^{-1} mod nbar (0 when unused)
    std::vector<GroupElement> generators;
    std::vector<GroupElement> elements;  // full closure, sorted

    std::string name() const;
    int order() const { return static_cast<int>(elements.size()); }
};

/// Generators of T_k, S_k, S~_k (k in [1, n/2] or k = n) and the global S, S~.
/// T_n and T_{n/2} use their one-dimensional-fixed-space presentations. With
/// signed_reflection every reflection also maps x(t) to -x(t + pi); on odd harmonics
/// this acts exactly like the unsigned reflection.
/// Throws PreconditionError for an invalid (label, n, k).
IsotropyGroup build_isotropy(IsotropyLabel label, int n, int k = 0, bool signed_reflection = false);

/// Same, with the reflection type of `model`. Throws SymmetryError when the model
/// has no reflection symmetry and the group needs one.
IsotropyGroup build_isotropy(const LatticeModel& model, IsotropyLabel label, int k = 0);

/// Throws SymmetryError unless every generator of H commutes with the lattice equations
/// of `model` (reflections must carry the sign flip the model needs).
void require_equivariant(const LatticeModel& model, const IsotropyGroup& H);

/// Closure of a generator list.
std::vector<GroupElement> enumerate_group(int n, const std::vector<GroupElement>& generators);

struct FixedSpaceBasis {
    Mat basis;                    // packed_size x d, orthonormal columns
    int l0 = 0;
    std::vector<int> harmonics;   // harmonics covered
    std::vector<int> block_dims;  // dimension contributed by each entry of `harmonics`
    int dim() const { return static_cast<int>(basis.cols()); }
};

inline constexpr double kRankCutoff = 1e-8;
inline constexpr double kIdempotencyTol = 1e-10;

/// Orthonormal basis of Fix(H) on the listed harmonics (all of 0..l0 when empty)
/// from the averaging projector. With zero_mean the constant spatial mode is removed.
/// Throws SymmetryError if a projector fails the idempotency check.
FixedSpaceBasis fixed_space(const IsotropyGroup& H, int l0, std::vector<int> harmonics = {}, bool zero_mean = false);

/// Averaging projector on harmonic l.
Mat projector_block(const IsotropyGroup& H, int l);

/// Real dimension of Fix(H) within the first-harmonic span of e_k and e_{n-k}.
int mode_block_dimension(const IsotropyGroup& H, int k);

/// Expected first-harmonic dimensions of Fix(S) and Fix(S~).
int expected_dim_S(int n);
int expected_dim_St(int n);

/// Sample-based check of the pattern relations x_j(t) = x_{s j + p}(tau(t)) for every
/// generator, evaluated by trigonometric summation on `samples` times; relative to max |x|.
double pattern_residual(const LoopState& x, const IsotropyGroup& H, int samples = 0);

/// max(generator residual in coefficient space, pattern_residual), relative to ||x||.
double symmetry_residual(const LoopState& x, const IsotropyGroup& H);

}  // namespace ringwave
