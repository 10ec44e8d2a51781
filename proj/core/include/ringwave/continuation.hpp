#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ringwave/galerkin.hpp"
#include "ringwave/spectrum.hpp"
#include "ringwave/symmetry.hpp"

namespace ringwave {

enum class BranchFamily { Traveling, Standing, StandingTilde };

std::string to_string(BranchFamily f);
BranchFamily parse_branch_family(const std::string& s);
IsotropyLabel isotropy_label(BranchFamily f);

struct InventoryEntry {
    int k = 0;
    double nu = 0.0;
    std::vector<BranchFamily> families;
    int predicted = 0;          // number of global branches
    bool resonant = false;
    std::vector<ResonantPair> witness;
};

struct Inventory {
    std::vector<InventoryEntry> entries;
    std::vector<int> skipped;   // modes with nu_k^2 <= 0
};

/// Bifurcation points nu_k > 0 and the branch families emanating from them.
/// Throws PreconditionError for a degenerate spectrum (use the cradle module)
/// or a singular D^2 V(a) outside zero_mean_mode.
Inventory bifurcation_inventory(const LatticeModel& model, int l_max = 16);

struct KernelDirection {
    IsotropyGroup group;
    LoopState loop;      // unit packed norm, first harmonic only
    Vec packed;          // loop.pack()
};

/// Projection of the first-harmonic e_k loop onto Fix(H), normalised.
KernelDirection kernel_direction(const LatticeModel& model, int k, BranchFamily family, int l0 = 1);

/// Leading-order time profile x_j(t) of each family (unnormalised):
/// T: cos(t + j k zeta); S: cos(j k zeta) cos t; S~ (n odd): -sin(j k zeta) sin t;
/// S~ (n even, k = 1 presentation used here): cos(j zeta - zeta/2) cos(t + zeta/2).
double template_profile(int n, int k, BranchFamily family, int j, double t);

struct BranchOptions {
    double r_min = 1e-4;
    double ds_initial = 1e-2;
    double ds_min = 1e-5;
    double ds_max = 0.1;
    double grow = 1.3;
    int target_iterations = 3;
    int max_halvings = 8;
    int max_newton = 12;
    double max_amplitude = 1.0;
    double nu_min = 0.05;
    int max_steps = 200;
    int l0_initial = 8;
    int l0_max = 128;
    double tail_tol = 1e-8;
    double newton_tol = 1e-11;     // on the packed restricted residual
    double point_tol = 1e-9;       // required full residual at accepted points
    double symmetry_tol = 1e-10;
    double reconnect_tol = 1e-2;
    bool check_doubled = true;     // re-evaluate each point at 2 l0
};

struct BranchPoint {
    double r = 0.0;
    double nu = 0.0;
    Vec u;
    LoopState loop;
    double residual = 0.0;
    double sym_residual = 0.0;
    double tail = 0.0;
    double h2_norm = 0.0;
    double doubled_residual = 0.0;
    int l0 = 0;
    int iterations = 0;
};

enum class Termination { MaxAmplitude, MinFrequency, StepFailure, Reconnected, Truncation, StepBudget };

std::string to_string(Termination t);

struct Branch {
    int k = 0;
    BranchFamily family = BranchFamily::Traveling;
    std::string group;
    double onset = 0.0;
    std::vector<BranchPoint> points;
    Termination termination = Termination::StepBudget;
    std::optional<int> reconnect_mode;
    std::optional<double> reconnect_nu;
};

/// Solution on the (k, family) branch with amplitude <x, kernel direction> = r,
/// by Newton on the amplitude-bordered system in Fix(H). `guess` may be null
/// (then the linear template at nu_k is used). Throws SolverError on divergence.
BranchPoint solve_at_amplitude(const LatticeModel& model, int k, BranchFamily family, double r, int l0,
                               const BranchPoint* guess = nullptr, double tol = 1e-11, int max_iter = 30);

/// Pseudo-arclength continuation from onset. Throws PreconditionError when (k, family)
/// is not in the inventory or k is resonant, SolverError when the first corrector fails.
Branch continue_branch(const LatticeModel& model, int k, BranchFamily family, const BranchOptions& opts = {});

struct OnsetEstimate {
    double nu0 = 0.0;          // Richardson limit nu(r -> 0)
    double c2 = 0.0;
    double c4 = 0.0;
    std::vector<double> r;
    std::vector<double> nu;
};

/// Fits nu(r) = nu0 + c2 r^2 + c4 r^4 through three amplitudes.
OnsetEstimate onset_extrapolation(const LatticeModel& model, int k, BranchFamily family,
                                  std::vector<double> radii = {1e-4, 2e-4, 4e-4}, int l0 = 8);

struct Crossing {
    double nu = 0.0;
    int multiplicity = 0;   // real dimension of the kernel at the crossing
    bool degenerate = false;
};

/// Zeros of nu^2 I - D^2 V(a) restricted to the first-harmonic block of Fix(H) in
/// [nu_lo, nu_hi], from the inertia of the restricted matrix, bisected to 1e-10.
std::vector<Crossing> frequency_scan(const LatticeModel& model, const IsotropyGroup& H, double nu_lo, double nu_hi);

}  // namespace ringwave
