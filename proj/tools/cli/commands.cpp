#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "config.hpp"
#include "output.hpp"
#include "ringwave/continuation.hpp"
#include "ringwave/cradle.hpp"
#include "ringwave/errors.hpp"
#include "ringwave/homogeneous.hpp"
#include "ringwave/spectrum.hpp"
#include "ringwave/symmetry.hpp"
#include "ringwave/timedomain.hpp"
#include "run.hpp"

namespace ringwave::cli {

namespace {

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Results keep index order;
/// the first failure (by index) is rethrown after all tasks finish.
template <class R>
std::vector<R> parallel_map(int jobs, std::size_t count, const std::function<R(std::size_t)>& task) {
    std::vector<R> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                results[i] = task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
    if (threads <= 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

struct Context {
    const Invocation& inv;
    RunConfig cfg;
    OutputDir& out;
    std::ostream& log;
};

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// ---------------------------------------------------------------------------

int cmd_dispersion(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const DispersionTable t = dispersion(model);
    std::vector<std::vector<std::string>> rows;
    Json entries = Json::array();
    for (const auto& e : t.entries) {
        rows.push_back({std::to_string(e.k), num(e.nu), num(e.nu_sq), e.bifurcating ? "1" : "0"});
        entries.push_back(
            {{"k", e.k}, {"nu_k", e.nu}, {"nu_sq", e.nu_sq}, {"bifurcating", e.bifurcating}, {"boundary", e.boundary}});
        c.log << fmt::format("k={:<3d} nu={:.12g}{}\n", e.k, e.nu, e.bifurcating ? "" : "  (not bifurcating)");
    }
    c.out.csv("dispersion.csv", {"k", "nu_k", "nu_sq", "bifurcating"}, rows);
    const K0Result k0 = k0_threshold(model);
    Json body;
    body["n"] = t.n;
    body["a"] = model.a();
    body["all_equal"] = t.all_equal;
    body["k0"] = k0.k0 ? Json(*k0.k0) : Json(nullptr);
    body["boundary_modes"] = k0.boundary_modes;
    body["entries"] = entries;
    c.out.json("dispersion.json", body);
    return kOk;
}

int cmd_resonances(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const DispersionTable t = dispersion(model);
    const int l_max = c.cfg.resonances.l_max;
    std::vector<std::vector<std::string>> rows, pairs;
    Json entries = Json::array();

    std::optional<Inventory> inv;
    if (!t.all_equal) inv = bifurcation_inventory(model, l_max);

    for (const auto& e : t.entries) {
        Json j{{"k", e.k}, {"nu_k", e.nu}, {"nu_sq", e.nu_sq}, {"bifurcating", e.bifurcating}};
        std::string resonant = "";
        if (e.bifurcating) {
            const ResonanceReport rep = non_resonance_check(model, e.k, l_max);
            resonant = rep.degenerate ? "degenerate" : (rep.non_resonant ? "0" : "1");
            j["non_resonant"] = rep.non_resonant;
            j["degenerate"] = rep.degenerate;
            Json w = Json::array();
            for (const auto& p : rep.resonant_pairs) {
                w.push_back({{"l", p.l}, {"j", p.j}, {"nu_j", p.nu_j}, {"l_nu_k", p.l_nu_k}});
                pairs.push_back({std::to_string(e.k), std::to_string(p.l), std::to_string(p.j), num(p.nu_j),
                                 num(p.l_nu_k)});
            }
            j["witness"] = w;
            Json params = Json::array();
            for (const auto& p : rep.resonance_parameters)
                params.push_back({{"l", p.l}, {"j", p.j}, {"omega_l_j", p.omega}});
            j["resonance_parameters"] = params;
            if (inv) {
                for (const auto& ie : inv->entries) {
                    if (ie.k != e.k) continue;
                    Json fams = Json::array();
                    for (auto f : ie.families) fams.push_back(to_string(f));
                    j["families"] = fams;
                    j["predicted_branches"] = ie.predicted;
                }
            }
            c.log << fmt::format("k={:<3d} nu={:.12g} {}\n", e.k, e.nu,
                                 rep.degenerate      ? "degenerate spectrum"
                                 : rep.non_resonant ? "non-resonant"
                                                    : fmt::format("RESONANT ({} pairs)", rep.resonant_pairs.size()));
        }
        rows.push_back({std::to_string(e.k), num(e.nu), num(e.nu_sq), e.bifurcating ? "1" : "0", resonant});
        entries.push_back(j);
    }
    c.out.csv("resonances.csv", {"k", "nu_k", "nu_sq", "bifurcating", "resonant"}, rows);
    c.out.csv("resonant_pairs.csv", {"k", "l", "j", "nu_j", "l_nu_k"}, pairs);
    Json body;
    body["n"] = t.n;
    body["l_max"] = l_max;
    body["all_equal"] = t.all_equal;
    body["skipped"] = inv ? Json(inv->skipped) : Json::array();
    body["entries"] = entries;
    c.out.json("resonances.json", body);
    return kOk;
}

int cmd_fixdim(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const int n = model.n();
    const Reflection refl = model.reflection();
    const bool signed_refl = refl == Reflection::Signed;
    std::vector<std::vector<std::string>> rows;
    Json groups = Json::array();

    auto add = [&](const IsotropyGroup& H, int k, int dim, int expected) {
        rows.push_back({H.name(), std::to_string(k), std::to_string(dim), std::to_string(expected)});
        groups.push_back({{"group", H.name()},
                          {"k", k},
                          {"order", H.order()},
                          {"dim", dim},
                          {"expected", expected}});
    };

    for (auto [label, expect] : {std::pair{IsotropyLabel::SGlobal, expected_dim_S(n)},
                                 std::pair{IsotropyLabel::StGlobal, expected_dim_St(n)}}) {
        const IsotropyGroup H = build_isotropy(label, n, 0, signed_refl);
        const int dim = fixed_space(H, 1, {1}).dim();
        add(H, 1, dim, expect);
        c.log << fmt::format("{:<6s} dim Fix on mode 1 = {}\n", H.name(), dim);
    }
    for (int k = 1; 2 * k <= n; ++k) {
        for (auto label : {IsotropyLabel::T, IsotropyLabel::S, IsotropyLabel::St}) {
            if (2 * k == n && label != IsotropyLabel::T) continue;
            const IsotropyGroup H = build_isotropy(label, n, k, signed_refl);
            add(H, k, mode_block_dimension(H, k), 1);
        }
    }
    {
        const IsotropyGroup H = build_isotropy(IsotropyLabel::T, n, n, signed_refl);
        add(H, n, mode_block_dimension(H, n), 1);
    }
    c.out.csv("fixdim.csv", {"group", "k", "dim", "expected"}, rows);
    Json body;
    body["n"] = n;
    body["reflection"] = refl == Reflection::Plain ? "plain" : refl == Reflection::Signed ? "signed" : "broken";
    body["groups"] = groups;
    c.out.json("fixdim.json", body);
    return kOk;
}

std::string plot_script(const std::string& csv) {
    return fmt::format(R"(import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.reader(open("{0}")) if r and not r[0].startswith("#")]
head, data = rows[0], rows[1:]
r = [float(x[head.index("r")]) for x in data]
nu = [float(x[head.index("nu")]) for x in data]
plt.plot(nu, r, ".-")
plt.xlabel("nu")
plt.ylabel("r")
plt.title("{0}")
plt.savefig("{0}".replace(".csv", ".png"), dpi=150)
)",
                       csv);
}

int cmd_branch(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const BranchConfig& bc = c.cfg.branch;
    std::vector<BranchFamily> fams;
    if (bc.family == "all") {
        const int n = model.n();
        fams = (bc.k == n || 2 * bc.k == n)
                   ? std::vector<BranchFamily>{BranchFamily::Traveling}
                   : std::vector<BranchFamily>{BranchFamily::Traveling, BranchFamily::Standing,
                                               BranchFamily::StandingTilde};
    } else {
        fams = {parse_branch_family(bc.family)};
    }

    struct Result {
        Branch branch;
        OnsetEstimate onset;
    };
    const auto results = parallel_map<Result>(c.inv.jobs, fams.size(), [&](std::size_t i) {
        Result r;
        r.branch = continue_branch(model, bc.k, fams[i], c.cfg.solver);
        r.onset = onset_extrapolation(model, bc.k, fams[i]);
        return r;
    });

    int code = kOk;
    Json summary = Json::array();
    for (const auto& res : results) {
        const Branch& b = res.branch;
        const std::string stem = fmt::format("branch_{}_k{}", to_string(b.family), b.k);
        std::vector<std::vector<std::string>> rows;
        Json snaps = Json::array();
        for (std::size_t i = 0; i < b.points.size(); ++i) {
            const BranchPoint& p = b.points[i];
            rows.push_back({std::to_string(i), num(p.r), num(p.nu), num(p.h2_norm), num(p.residual),
                            num(p.sym_residual), num(p.tail)});
            if (i % static_cast<std::size_t>(bc.snapshot_every) == 0 || i + 1 == b.points.size()) {
                const std::string name = fmt::format("{}_pt{:04d}.json", stem, i);
                Json meta = c.out.meta();
                meta["index"] = i;
                meta["r"] = p.r;
                meta["residual"] = p.residual;
                c.out.json_text(name, loop_to_json(p.loop, meta.dump()));
                snaps.push_back(name);
            }
        }
        c.out.csv(stem + ".csv", {"index", "r", "nu", "h2_norm", "residual", "sym_residual", "tail"}, rows);
        if (bc.plot_script) c.out.text(stem + "_plot.py", plot_script(stem + ".csv"));

        Json j;
        j["k"] = b.k;
        j["family"] = to_string(b.family);
        j["group"] = b.group;
        j["onset"] = b.onset;
        j["onset_extrapolated"] = res.onset.nu0;
        j["onset_c2"] = res.onset.c2;
        j["points"] = b.points.size();
        j["termination"] = to_string(b.termination);
        j["reconnect_mode"] = b.reconnect_mode ? Json(*b.reconnect_mode) : Json(nullptr);
        j["reconnect_nu"] = b.reconnect_nu ? Json(*b.reconnect_nu) : Json(nullptr);
        j["csv"] = stem + ".csv";
        j["snapshots"] = snaps;
        summary.push_back(j);
        c.log << fmt::format("{} k={} ({}): {} points, termination {}\n", to_string(b.family), b.k, b.group,
                             b.points.size(), to_string(b.termination));
        if (b.termination == Termination::StepFailure || b.termination == Termination::Truncation)
            code = kSolverError;
    }
    c.out.json("branches.json", {{"model_n", model.n()}, {"branches", summary}});
    return code;
}

int cmd_validate(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const ValidateConfig& v = c.cfg.validate;
    if (v.loop.empty()) throw ConfigError("validate.loop: no loop file given (use --loop)");
    std::ifstream in(v.loop);
    if (!in) throw ConfigError("cannot open loop file " + v.loop);
    std::stringstream ss;
    ss << in.rdbuf();
    const LoopState x = loop_from_json(ss.str());
    if (x.n() != model.n())
        throw ConfigError(fmt::format("loop has n = {} but the model has n = {}", x.n(), model.n()));

    const PeriodicityReport rep = verify_periodicity(model, x, v.options(), v.samples, v.threshold);
    const double galerkin = residual(model, x).total;
    const bool passed = rep.passed && rep.energy_drift <= v.drift_threshold;
    Json body;
    body["n"] = x.n();
    body["l0"] = x.l0();
    body["nu"] = x.nu();
    body["period"] = rep.period;
    body["galerkin_residual"] = galerkin;
    body["return_distance"] = rep.return_distance;
    body["max_deviation"] = rep.max_deviation;
    body["energy_drift"] = rep.energy_drift;
    body["threshold"] = v.threshold;
    body["drift_threshold"] = v.drift_threshold;
    body["passed"] = passed;
    c.out.json("validate.json", body);
    c.log << fmt::format("return distance {:.3e}, max deviation {:.3e}, energy drift {:.3e}: {}\n",
                         rep.return_distance, rep.max_deviation, rep.energy_drift, passed ? "PASS" : "FAIL");
    return passed ? kOk : kValidationFailed;
}

int cmd_cradle(Context& c) {
    const LatticeModel model = c.cfg.model.build();
    const CradleConfig& cc = c.cfg.cradle;
    const double omega = std::sqrt(model.onsite_curvature());
    std::vector<double> nus = cc.nu;
    if (nus.empty()) nus = {0.98 * omega, 1.02 * omega};

    CradleOptions opts;
    opts.seed = c.cfg.seed;
    opts.starts_per_dim = cc.starts_per_dim;
    opts.s_min = cc.s_min;
    opts.s_max = cc.s_max;
    opts.radial_samples = cc.radial_samples;
    opts.grad_tol = cc.grad_tol;
    opts.dedup_tol = cc.dedup_tol;
    opts.polish_tol = cc.polish_tol;
    opts.l0 = cc.l0;

    struct Task {
        std::string group;
        std::size_t nu_index;
    };
    std::vector<Task> tasks;
    for (const auto& g : cc.groups)
        for (std::size_t i = 0; i < nus.size(); ++i) tasks.push_back({g == "S" ? "S" : "St", i});

    const auto sets = parallel_map<CriticalPointSet>(c.inv.jobs, tasks.size(), [&](std::size_t i) {
        const auto label = tasks[i].group == "S" ? IsotropyLabel::SGlobal : IsotropyLabel::StGlobal;
        return critical_points(model, build_isotropy(model, label), nus[tasks[i].nu_index], opts);
    });

    std::size_t total = 0;
    std::vector<std::vector<std::string>> rows;
    Json jsets = Json::array();
    for (std::size_t t = 0; t < sets.size(); ++t) {
        const CriticalPointSet& s = sets[t];
        Json pts = Json::array();
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const CriticalPoint& p = s.points[i];
            const std::string name = fmt::format("cradle_{}_nu{}_pt{:02d}.json", s.group, tasks[t].nu_index, i);
            Json meta = c.out.meta();
            meta["group"] = s.group;
            meta["phi"] = p.phi;
            c.out.json_text(name, loop_to_json(p.loop, meta.dump()));
            rows.push_back({s.group, num(s.nu), std::to_string(i), num(p.amplitude), num(p.phi), num(p.grad_norm),
                            std::to_string(p.hits), num(p.polished_residual), num(p.energy)});
            pts.push_back({{"u", vec_json(p.u)},
                           {"amplitude", p.amplitude},
                           {"phi", p.phi},
                           {"grad_norm", p.grad_norm},
                           {"hits", p.hits},
                           {"polished", p.polished},
                           {"polished_residual", p.polished_residual},
                           {"energy", p.energy},
                           {"loop", name}});
        }
        total += s.points.size();
        jsets.push_back({{"group", s.group},
                         {"nu", s.nu},
                         {"below", s.below},
                         {"starts", s.starts},
                         {"converged_starts", s.converged_starts},
                         {"rejected", s.rejected},
                         {"points", pts}});
        c.log << fmt::format("{:<3s} nu={:.6g}: {} critical points from {} starts ({} rejected)\n", s.group, s.nu,
                             s.points.size(), s.starts, s.rejected);
    }
    c.out.csv("cradle.csv",
              {"group", "nu", "index", "amplitude", "phi", "grad_norm", "hits", "polished_residual", "energy"}, rows);
    c.out.json("cradle.json", {{"n", model.n()}, {"omega", omega}, {"total_points", total}, {"sets", jsets}});
    return kOk;
}

int cmd_homog(Context& c) {
    const HomogConfig& h = c.cfg.homog;
    const auto seeds = polar_grid(h.grid_radius, h.grid_radii, h.grid_angles);
    const std::size_t chunks = std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(std::max(1, c.inv.jobs)));
    const auto parts = parallel_map<std::vector<ScanRow>>(c.inv.jobs, chunks, [&](std::size_t i) {
        const std::size_t lo = seeds.size() * i / chunks, hi = seeds.size() * (i + 1) / chunks;
        return orbit_scan({seeds.begin() + static_cast<std::ptrdiff_t>(lo), seeds.begin() + static_cast<std::ptrdiff_t>(hi)},
                          h.iters, h.escape_radius);
    });
    std::vector<std::vector<std::string>> rows;
    int escaped = 0;
    for (const auto& part : parts)
        for (const auto& r : part) {
            rows.push_back({num(r.seed_a), num(r.seed_b), num(r.max_radius), r.escaped ? "1" : "0",
                            std::to_string(r.escape_step)});
            escaped += r.escaped;
        }
    c.out.csv("homog_scan.csv", {"seed_a", "seed_b", "max_radius", "escaped", "escape_step"}, rows);

    const ScalarOrbit orb = scalar_orbit(h.energy, h.samples);
    std::vector<std::vector<std::string>> samples;
    for (std::size_t i = 0; i < orb.t.size(); ++i) samples.push_back({num(orb.t[i]), num(orb.q[i]), num(orb.p[i])});
    c.out.csv("homog_orbit.csv", {"t", "q", "p"}, samples);

    const double quad = scalar_period(h.energy);
    Json body;
    body["seeds"] = rows.size();
    body["escaped"] = escaped;
    body["energy"] = h.energy;
    body["turning_point"] = turning_point(h.energy);
    body["period_quadrature"] = quad;
    body["period_integrated"] = orb.period;
    body["max_energy_error"] = orb.max_energy_error;
    c.out.json("homog.json", body);
    c.log << fmt::format("{} seeds, {} escaped; period {:.15g} (quadrature) {:.15g} (integrated)\n", rows.size(),
                         escaped, quad, orb.period);
    return kOk;
}

void apply_overrides(Json& doc, const Invocation& inv) {
    if (!doc.is_object()) throw ConfigError("config: expected an object");
    if (inv.seed) doc["seed"] = *inv.seed;
    if (inv.k) doc["branch"]["k"] = *inv.k;
    if (inv.family) doc["branch"]["family"] = *inv.family;
    if (inv.steps) doc["solver"]["max_steps"] = *inv.steps;
    if (!inv.nu.empty()) doc["cradle"]["nu"] = inv.nu;
    if (inv.grid) {
        doc["homog"]["grid_radii"] = *inv.grid;
        doc["homog"]["grid_angles"] = 2 * *inv.grid;
    }
    if (inv.iters) doc["homog"]["iters"] = *inv.iters;
    if (inv.energy) doc["homog"]["energy"] = *inv.energy;
    if (inv.loop) doc["validate"]["loop"] = *inv.loop;
}

std::string output_dir(const Invocation& inv, const RunConfig& cfg) {
    if (inv.out) return *inv.out;
    if (const char* env = std::getenv("RINGWAVE_OUT"); env && *env) return env;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    return "ringwave_out";
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        const auto& cmds = commands();
        if (std::find(cmds.begin(), cmds.end(), inv.command) == cmds.end())
            throw ConfigError("unknown subcommand '" + inv.command + "'");
        if (inv.jobs < 1) throw ConfigError("--jobs must be at least 1");

        Json doc = inv.config_path.empty() ? Json::object() : load_document(inv.config_path);
        apply_overrides(doc, inv);
        const RunConfig cfg = from_json(doc);
        OutputDir dir(output_dir(inv, cfg), inv.command, config_hash(cfg));
        dir.json("resolved_config.json", {{"config", to_json(cfg)}});
        Context ctx{inv, cfg, dir, out};

        int code = kOk;
        if (inv.command == "dispersion") code = cmd_dispersion(ctx);
        else if (inv.command == "resonances") code = cmd_resonances(ctx);
        else if (inv.command == "fixdim") code = cmd_fixdim(ctx);
        else if (inv.command == "branch") code = cmd_branch(ctx);
        else if (inv.command == "validate") code = cmd_validate(ctx);
        else if (inv.command == "cradle") code = cmd_cradle(ctx);
        else if (inv.command == "homog") code = cmd_homog(ctx);
        out << fmt::format("wrote {} files to {}\n", dir.written().size(), dir.path().string());
        return code;
    } catch (const ConfigError& e) {
        err << "ringwave: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const PreconditionError& e) {
        err << "ringwave: invalid request: " << e.what() << "\n";
        return kConfigError;
    } catch (const SolverError& e) {
        err << "ringwave: solver failed: " << e.what() << "\n";
        return kSolverError;
    } catch (const IntegrationError& e) {
        err << "ringwave: integration failed: " << e.what() << "\n";
        return kSolverError;
    } catch (const SymmetryError& e) {
        err << "ringwave: symmetry error: " << e.what() << "\n";
        return kSolverError;
    } catch (const std::exception& e) {
        err << "ringwave: internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace ringwave::cli
