#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringwave/continuation.hpp"
#include "ringwave/timedomain.hpp"

namespace ringwave::cli {

using Json = nlohmann::ordered_json;

struct PotentialConfig {
    std::string family;
    double omega = 1.0;                // pendulum, bistable
    double beta = 1.0;                 // fpu
    std::vector<double> coefficients = {};  // polynomial: c_0, c_1, ...

    PotentialSpec build(Role role) const;
};

struct ModelConfig {
    int n = 5;
    PotentialConfig onsite{"pendulum"};
    PotentialConfig coupling{"harmonic"};
    double equilibrium_seed = 0.0;
    bool zero_mean_mode = false;

    LatticeModel build() const;
};

struct BranchConfig {
    int k = 1;
    std::string family = "all";   // T, S, St or all
    int snapshot_every = 10;
    bool plot_script = false;
};

struct ResonanceConfig {
    int l_max = 16;
};

struct CradleConfig {
    std::vector<double> nu;                  // empty: 0.98 omega and 1.02 omega
    std::vector<std::string> groups{"S", "St"};
    int starts_per_dim = 8;
    int l0 = 16;
    double s_min = 1e-3;
    double s_max = 2.0;
    int radial_samples = 48;
    double grad_tol = 1e-10;
    double dedup_tol = 1e-6;
    double polish_tol = 1e-9;
};

struct HomogConfig {
    double grid_radius = 1.0;
    int grid_radii = 8;
    int grid_angles = 16;
    long long iters = 1000;
    double escape_radius = 1e12;
    double energy = 1.0;
    int samples = 256;
};

struct ValidateConfig {
    std::string loop;
    std::string method = "rkf78";   // rkf78, dopri5, symplectic
    double tol = 1e-10;
    double dt = 1e-3;
    int samples = 64;
    double threshold = 1e-6;
    double drift_threshold = 1e-8;

    IntegrateOptions options() const;
};

struct RunConfig {
    ModelConfig model;
    BranchOptions solver;
    std::uint64_t seed = 0;
    BranchConfig branch;
    ResonanceConfig resonances;
    CradleConfig cradle;
    HomogConfig homog;
    ValidateConfig validate;
    std::string output_dir;
};

/// Syntax errors raise ConfigError naming source:line:column.
Json parse_document(const std::string& text, const std::string& source = "config");
Json load_document(const std::string& path);

/// Schema check and defaults. Unknown keys and type mismatches raise ConfigError
/// naming the field path.
RunConfig from_json(const Json& doc);
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// Every field with its resolved value, in a fixed order. output_dir is left out so the
/// echo does not depend on where a run writes.
Json to_json(const RunConfig& cfg);

/// SHA-256 of the compact dump of to_json(cfg), lower-case hex.
std::string config_hash(const RunConfig& cfg);
std::string sha256_hex(const std::string& data);

}  // namespace ringwave::cli
