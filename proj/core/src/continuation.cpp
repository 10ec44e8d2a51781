#include "ringwave/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "ringwave/errors.hpp"

namespace ringwave {

std::string to_string(BranchFamily f) {
    switch (f) {
        case BranchFamily::Traveling: return "T";
        case BranchFamily::Standing: return "S";
        case BranchFamily::StandingTilde: return "St";
    }
    return "?";
}

BranchFamily parse_branch_family(const std::string& s) {
    if (s == "T") return BranchFamily::Traveling;
    if (s == "S") return BranchFamily::Standing;
    if (s == "St" || s == "S~") return BranchFamily::StandingTilde;
    throw ConfigError("unknown branch family '" + s + "' (expected T, S or St)");
}

IsotropyLabel isotropy_label(BranchFamily f) {
    switch (f) {
        case BranchFamily::Traveling: return IsotropyLabel::T;
        case BranchFamily::Standing: return IsotropyLabel::S;
        case BranchFamily::StandingTilde: return IsotropyLabel::St;
    }
    return IsotropyLabel::Full;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::MaxAmplitude: return "max_amplitude";
        case Termination::MinFrequency: return "min_frequency";
        case Termination::StepFailure: return "step_failure";
        case Termination::Reconnected: return "reconnected";
        case Termination::Truncation: return "truncation";
        case Termination::StepBudget: return "step_budget";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Inventory and kernel directions

Inventory bifurcation_inventory(const LatticeModel& model, int l_max) {
    const DispersionTable table = dispersion(model);
    if (table.all_equal)
        throw PreconditionError("degenerate spectrum (W''(0) = 0, all nu_k equal): use the cradle module");
    const int n = model.n();
    Inventory inv;
    for (const auto& e : table.entries) {
        if (!e.bifurcating) {
            inv.skipped.push_back(e.k);
            continue;
        }
        InventoryEntry entry;
        entry.k = e.k;
        entry.nu = e.nu;
        if (e.k == n || 2 * e.k == n) {
            entry.families = {BranchFamily::Traveling};
            entry.predicted = 1;
        } else {
            entry.families = {BranchFamily::Traveling, BranchFamily::Standing, BranchFamily::StandingTilde};
            entry.predicted = 3;
        }
        const ResonanceReport rep = non_resonance_check(model, e.k, l_max);
        entry.resonant = !rep.non_resonant;
        entry.witness = rep.resonant_pairs;
        inv.entries.push_back(std::move(entry));
    }
    return inv;
}

KernelDirection kernel_direction(const LatticeModel& model, int k, BranchFamily family, int l0) {
    const int n = model.n();
    KernelDirection kd;
    kd.group = build_isotropy(model, isotropy_label(family), k);
    const CVec e = circulant_basis(n).vector(k == n ? n : k);
    Vec v(2 * n);
    v.head(n) = e.real();
    v.tail(n) = e.imag();
    Vec p = projector_block(kd.group, 1) * v;
    const double norm = p.norm();
    if (norm < 1e-12)
        throw SymmetryError(fmt::format("e_{} has no component in Fix({})", k, kd.group.name()));
    p /= norm;
    kd.loop = LoopState(n, l0, frequency_squared(model, k) > 0 ? std::sqrt(frequency_squared(model, k)) : 0.0);
    for (int j = 0; j < n; ++j) kd.loop.coeffs()(j, 1) = {p[j], p[n + j]};
    kd.packed = kd.loop.pack();
    return kd;
}

double template_profile(int n, int k, BranchFamily family, int j, double t) {
    const double zeta = 2.0 * std::numbers::pi / n;
    switch (family) {
        case BranchFamily::Traveling: return std::cos(t + j * k * zeta);
        case BranchFamily::Standing: return std::cos(j * k * zeta) * std::cos(t);
        case BranchFamily::StandingTilde:
            if (n % 2) return -std::sin(j * k * zeta) * std::sin(t);
            return std::cos(j * k * zeta - zeta / 2) * std::cos(t + zeta / 2);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Restricted system in Fix(H)

namespace {

struct Restricted {
    HarmonicBalance hb;
    IsotropyGroup group;
    Mat B;     // Fix(H) basis
    Vec cu;    // amplitude functional in u coordinates

    Restricted(const LatticeModel& model, const KernelDirection& kd, int l0)
        : hb(model, l0), group(kd.group) {
        B = fixed_space(group, l0, {}, model.zero_mean_mode()).basis;
        cu = B.transpose() * kd.loop.resized(l0).pack();
    }

    int l0() const { return hb.l0(); }
    int dim() const { return static_cast<int>(B.cols()); }
    LoopState loop(const Vec& u, double nu) const { return LoopState::unpack(B * u, hb.model().n(), l0(), nu); }
    Vec coords(const LoopState& x) const { return B.transpose() * x.resized(l0()).pack(); }
    Vec G(const LoopState& x) const { return B.transpose() * hb.residual_packed(x); }

    /// [G_u G_nu] as a d x (d + 1) block.
    Mat jac(const LoopState& x) const {
        Mat j(dim(), dim() + 1);
        j.leftCols(dim()) = B.transpose() * hb.jacobian(x, B);
        j.col(dim()) = B.transpose() * hb.nu_derivative(x);
        return j;
    }
};

struct Corrected {
    Vec z;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Newton on [G(z); border . z - target] = 0 with residual backtracking.
Corrected bordered_newton(const Restricted& rs, Vec z, const Vec& border, double target, double tol, int max_iter) {
    const int d = rs.dim();
    auto eval = [&](const Vec& zz, Vec& g) {
        const LoopState x = rs.loop(zz.head(d), zz[d]);
        g.resize(d + 1);
        g.head(d) = rs.G(x);
        g[d] = border.dot(zz) - target;
        return x;
    };
    Corrected out;
    Vec g;
    LoopState x;
    try {
        x = eval(z, g);
    } catch (const SolverError&) {
        out.z = z;
        out.residual = std::numeric_limits<double>::infinity();
        return out;
    }
    double r = g.norm();
    for (int it = 0; it < max_iter && r > tol; ++it) {
        Mat j(d + 1, d + 1);
        j.topRows(d) = rs.jac(x);
        j.row(d) = border.transpose();
        const Vec step = j.partialPivLu().solve(-g);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        bool ok = false;
        for (int bt = 0; bt < 8; ++bt) {
            const Vec zt = z + lambda * step;
            if (zt[d] <= 0.0) {
                lambda *= 0.5;
                continue;
            }
            try {
                Vec gt;
                LoopState xt = eval(zt, gt);
                const double rt = gt.norm();
                if (std::isfinite(rt) && (rt < r || rt <= tol)) {
                    z = zt;
                    x = std::move(xt);
                    g = std::move(gt);
                    r = rt;
                    ok = true;
                    break;
                }
            } catch (const SolverError&) {
            }
            lambda *= 0.5;
        }
        out.iterations = it + 1;
        if (!ok) break;
    }
    out.z = std::move(z);
    out.residual = r;
    out.converged = r <= tol;
    return out;
}

Vec tangent(const Restricted& rs, const Vec& z, const Vec& border) {
    const int d = rs.dim();
    const LoopState x = rs.loop(z.head(d), z[d]);
    Mat j(d + 1, d + 1);
    j.topRows(d) = rs.jac(x);
    j.row(d) = border.transpose();
    Vec rhs = Vec::Zero(d + 1);
    rhs[d] = 1.0;
    Vec t = j.partialPivLu().solve(rhs);
    if (!t.allFinite() || t.norm() == 0.0) throw SolverError("singular tangent system");
    return t / t.norm();
}

BranchPoint make_point(const Restricted& rs, const Vec& z, int iterations, bool doubled) {
    const int d = rs.dim();
    BranchPoint p;
    p.u = z.head(d);
    p.nu = z[d];
    p.loop = rs.loop(p.u, p.nu);
    p.r = rs.cu.dot(p.u);
    p.residual = rs.hb.residual(p.loop).total;
    p.sym_residual = symmetry_residual(p.loop, rs.group);
    p.tail = p.loop.tail_fraction(2);
    p.h2_norm = p.loop.sobolev_norm();
    p.l0 = rs.l0();
    p.iterations = iterations;
    if (doubled) {
        HarmonicBalance hb2(rs.hb.model(), 2 * rs.l0());
        p.doubled_residual = hb2.residual(p.loop.resized(2 * rs.l0())).total;
    }
    return p;
}

Vec stack(const Vec& u, double nu) {
    Vec z(u.size() + 1);
    z.head(u.size()) = u;
    z[u.size()] = nu;
    return z;
}

Vec amplitude_border(const Restricted& rs) {
    Vec b = Vec::Zero(rs.dim() + 1);
    b.head(rs.dim()) = rs.cu;
    return b;
}

}  // namespace

BranchPoint solve_at_amplitude(const LatticeModel& model, int k, BranchFamily family, double r, int l0,
                               const BranchPoint* guess, double tol, int max_iter) {
    const KernelDirection kd = kernel_direction(model, k, family, l0);
    const Restricted rs(model, kd, l0);
    Vec z = guess ? stack(rs.coords(guess->loop), guess->nu) : stack(r * rs.cu, kd.loop.nu());
    const Corrected c = bordered_newton(rs, z, amplitude_border(rs), r, tol, max_iter);
    if (!c.converged)
        throw SolverError(fmt::format("amplitude corrector diverged at r = {:.3g} (residual {:.3g})", r, c.residual));
    return make_point(rs, c.z, c.iterations, false);
}

Branch continue_branch(const LatticeModel& model, int k, BranchFamily family, const BranchOptions& opts) {
    const Inventory inv = bifurcation_inventory(model);
    const auto it = std::find_if(inv.entries.begin(), inv.entries.end(), [k](const auto& e) { return e.k == k; });
    if (it == inv.entries.end()) throw PreconditionError(fmt::format("mode {} does not bifurcate (nu_k^2 <= 0 or out of range)", k));
    if (std::find(it->families.begin(), it->families.end(), family) == it->families.end())
        throw PreconditionError(fmt::format("family {} does not bifurcate from mode {}", to_string(family), k));
    if (it->resonant) {
        const auto& w = it->witness.front();
        throw PreconditionError(fmt::format("mode {} is resonant: l = {}, j = {} (nu_j = {:.12g} = l nu_k)", k, w.l, w.j,
                                            w.nu_j));
    }

    Branch br;
    br.k = k;
    br.family = family;
    br.onset = it->nu;
    const DispersionTable table = dispersion(model);

    int l0 = opts.l0_initial;
    auto kd = kernel_direction(model, k, family, l0);
    br.group = kd.group.name();
    auto rs = std::make_unique<Restricted>(model, kd, l0);

    Corrected first = bordered_newton(*rs, stack(opts.r_min * rs->cu, it->nu), amplitude_border(*rs), opts.r_min,
                                      opts.newton_tol, 30);
    if (!first.converged)
        throw SolverError(fmt::format("initial corrector diverged at r_min = {:.3g}; retry with a smaller r_min", opts.r_min));
    Vec z = first.z;
    Vec tau = tangent(*rs, z, amplitude_border(*rs));
    br.points.push_back(make_point(*rs, z, first.iterations, opts.check_doubled));

    // Re-solve the current point at a larger cutoff when the tail or the doubled residual says so.
    auto refine_truncation = [&](BranchPoint& p) -> bool {
        while (p.tail >= opts.tail_tol || (opts.check_doubled && p.doubled_residual > 10.0 * opts.point_tol)) {
            if (l0 >= opts.l0_max) return false;
            const int next = std::min(opts.l0_max, std::max(l0 + 1, (3 * l0) / 2));
            const Vec t_packed = rs->B * tau.head(rs->dim());
            LoopState t_loop = LoopState::unpack(t_packed, model.n(), l0, p.nu);
            l0 = next;
            kd = kernel_direction(model, k, family, l0);
            rs = std::make_unique<Restricted>(model, kd, l0);
            Corrected c = bordered_newton(*rs, stack(rs->coords(p.loop), p.nu), amplitude_border(*rs), p.r,
                                          opts.newton_tol, opts.max_newton);
            if (!c.converged) return false;
            Vec guess = stack(rs->coords(t_loop), tau[tau.size() - 1]);
            z = c.z;
            tau = tangent(*rs, z, guess / guess.norm());
            p = make_point(*rs, z, c.iterations, opts.check_doubled);
        }
        return true;
    };
    if (!refine_truncation(br.points.back())) {
        br.termination = Termination::Truncation;
        return br;
    }

    double ds = opts.ds_initial;
    for (int step = 0;; ++step) {
        if (step >= opts.max_steps) {
            br.termination = Termination::StepBudget;
            return br;
        }
        Corrected c;
        int halvings = 0;
        while (true) {
            const Vec zp = z + ds * tau;
            c = bordered_newton(*rs, zp, tau, tau.dot(zp), opts.newton_tol, opts.max_newton);
            if (c.converged) break;
            ds *= 0.5;
            if (++halvings > opts.max_halvings || ds < opts.ds_min) {
                br.termination = Termination::StepFailure;
                return br;
            }
        }
        const Vec new_tau = tangent(*rs, c.z, tau);
        z = c.z;
        tau = new_tau;
        BranchPoint p = make_point(*rs, z, c.iterations, opts.check_doubled);
        if (!refine_truncation(p)) {
            br.termination = Termination::Truncation;
            return br;
        }
        br.points.push_back(std::move(p));
        const BranchPoint& last = br.points.back();

        if (c.iterations <= opts.target_iterations)
            ds = std::min(opts.ds_max, ds * opts.grow);
        else if (c.iterations > opts.target_iterations + 2)
            ds = std::max(opts.ds_min, ds * 0.5);

        if (std::abs(last.r) > opts.max_amplitude) {
            br.termination = Termination::MaxAmplitude;
            return br;
        }
        if (last.nu < opts.nu_min) {
            br.termination = Termination::MinFrequency;
            return br;
        }
        if (br.points.size() > 2 && last.loop.l2_norm() < opts.r_min / 2) {
            for (const auto& e : table.entries) {
                if (e.k == k || !e.bifurcating) continue;
                if (std::abs(last.nu - e.nu) < opts.reconnect_tol) {
                    br.termination = Termination::Reconnected;
                    br.reconnect_mode = e.k;
                    br.reconnect_nu = e.nu;
                    return br;
                }
            }
        }
    }
}

OnsetEstimate onset_extrapolation(const LatticeModel& model, int k, BranchFamily family, std::vector<double> radii,
                                  int l0) {
    if (radii.size() != 3) throw PreconditionError("onset extrapolation needs three amplitudes");
    OnsetEstimate est;
    est.r = radii;
    BranchPoint prev;
    bool have = false;
    for (double r : radii) {
        BranchPoint p = solve_at_amplitude(model, k, family, r, l0, have ? &prev : nullptr);
        est.nu.push_back(p.nu);
        prev = std::move(p);
        have = true;
    }
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
        const double r2 = radii[static_cast<std::size_t>(i)] * radii[static_cast<std::size_t>(i)];
        a(i, 0) = 1.0;
        a(i, 1) = r2;
        a(i, 2) = r2 * r2;
        b[i] = est.nu[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d c = a.fullPivLu().solve(b);
    est.nu0 = c[0];
    est.c2 = c[1];
    est.c4 = c[2];
    return est;
}

std::vector<Crossing> frequency_scan(const LatticeModel& model, const IsotropyGroup& H, double nu_lo, double nu_hi) {
    if (!(nu_lo > 0.0) || !(nu_hi > nu_lo)) throw PreconditionError("frequency window must satisfy 0 < lo < hi");
    const int n = model.n();
    const Mat b = fixed_space(H, 1, {1}, model.zero_mean_mode()).basis.middleRows(n, 2 * n);
    const Mat hs = model.hessian_V(model.equilibrium_vector());
    Mat h2 = Mat::Zero(2 * n, 2 * n);
    h2.topLeftCorner(n, n) = hs;
    h2.bottomRightCorner(n, n) = hs;
    const Mat r = b.transpose() * h2 * b;
    const Vec mu = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (r + r.transpose())).eigenvalues();

    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        for (double edge : {nu_lo, nu_hi})
            if (std::abs(edge * edge - mu[i]) <= 1e-12)
                throw PreconditionError(fmt::format("window endpoint {} is a crossing", edge));
    }
    auto count = [&](double nu) {
        int c = 0;
        for (Eigen::Index i = 0; i < mu.size(); ++i)
            if (mu[i] > nu * nu) ++c;
        return c;
    };

    const DispersionTable table = dispersion(model);
    std::vector<Crossing> out;
    auto bisect = [&](auto&& self, double a, double bnd, int ca, int cb) -> void {
        if (ca == cb) return;
        if (bnd - a <= 1e-10) {
            Crossing c;
            c.nu = 0.5 * (a + bnd);
            c.multiplicity = ca - cb;
            int distinct = 0;
            for (const auto& e : table.entries)
                if (e.nu_sq > 0.0 && std::abs(e.nu - c.nu) <= 1e-8) ++distinct;
            c.degenerate = distinct > 1;
            out.push_back(c);
            return;
        }
        const double mid = 0.5 * (a + bnd);
        const int cm = count(mid);
        self(self, a, mid, ca, cm);
        self(self, mid, bnd, cm, cb);
    };
    bisect(bisect, nu_lo, nu_hi, count(nu_lo), count(nu_hi));
    return out;
}

}  // namespace ringwave
