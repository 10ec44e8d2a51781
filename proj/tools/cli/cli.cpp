#include <ostream>

#include <CLI11.hpp>

#include "ringwave/version.hpp"
#include "run.hpp"

namespace ringwave::cli {

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic traveling and standing waves in rings of coupled oscillators", "ringwave"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Invocation inv;
    std::uint64_t seed = 0;
    int k = 0, steps = 0, grid = 0;
    long long iters = 0;
    double energy = 0.0;
    std::string family, loop;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", inv.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", inv.out, "output directory (else $RINGWAVE_OUT, config output_dir, ./ringwave_out)");
        sub->add_option("--jobs", inv.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "random seed for multistart searches");
    };

    auto* dispersion = app.add_subcommand("dispersion", "linear frequencies nu_k");
    auto* resonances = app.add_subcommand("resonances", "non-resonance check and branch inventory");
    auto* fixdim = app.add_subcommand("fixdim", "fixed-point subspace dimensions");
    auto* branch = app.add_subcommand("branch", "continue symmetric branches from the linear spectrum");
    auto* validate = app.add_subcommand("validate", "integrate a loop over one period and compare");
    auto* cradle = app.add_subcommand("cradle", "critical points of the reduced potential (W''(0) = 0)");
    auto* homog = app.add_subcommand("homog", "planar profile map and scalar homogeneous oscillator");
    for (auto* s : {dispersion, resonances, fixdim, branch, validate, cradle, homog}) common(s);

    auto* opt_k = branch->add_option("--k", k, "mode number");
    auto* opt_family = branch->add_option("--family", family, "T, S, St or all");
    auto* opt_steps = branch->add_option("--steps", steps, "maximum continuation steps")->check(CLI::PositiveNumber);
    cradle->add_option("--nu", inv.nu, "frequencies to search (repeatable)");
    auto* opt_grid = homog->add_option("--grid", grid, "N radii by 2N angles of map seeds")->check(CLI::PositiveNumber);
    auto* opt_iters = homog->add_option("--iters", iters, "map iterations per seed");
    auto* opt_energy = homog->add_option("--energy", energy, "energy of the scalar orbit");
    auto* opt_loop = validate->add_option("--loop", loop, "loop JSON to validate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "ringwave: " << e.what() << "\n";
        return kConfigError;
    }

    CLI::App* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    if (sub->count("--seed")) inv.seed = seed;
    if (opt_k->count()) inv.k = k;
    if (opt_family->count()) inv.family = family;
    if (opt_steps->count()) inv.steps = steps;
    if (opt_grid->count()) inv.grid = grid;
    if (opt_iters->count()) inv.iters = iters;
    if (opt_energy->count()) inv.energy = energy;
    if (opt_loop->count()) inv.loop = loop;
    return run(inv, out, err);
}

}  // namespace ringwave::cli
