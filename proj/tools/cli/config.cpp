#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "ringwave/errors.hpp"

namespace ringwave::cli {

namespace {

/// Walks one JSON object, remembering which keys were read so leftovers can be rejected.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", where()));
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        out = convert<T>(*it, field(key));
    }

    Reader sub(const char* key) {
        seen_.insert(key);
        static const Json empty = Json::object();
        auto it = j_.find(key);
        return Reader(it == j_.end() ? empty : *it, field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(fmt::format("{}: unknown key", field(it.key().c_str())));
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }
    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    static T convert(const Json& v, const std::string& name) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(name + ": expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(name + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(name + ": expected a number");
            return v.get<double>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(name + ": expected an integer");
            if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
                throw ConfigError(name + ": expected a non-negative integer");
            if constexpr (std::is_unsigned_v<T>) {
                return static_cast<T>(v.get<std::uint64_t>());
            } else {
                const auto x = v.get<long long>();
                if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
                    throw ConfigError(name + ": integer out of range");
                return static_cast<T>(x);
            }
        } else {
            if (!v.is_array()) throw ConfigError(name + ": expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(convert<typename T::value_type>(v[i], fmt::format("{}[{}]", name, i)));
            return out;
        }
    }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

PotentialConfig read_potential(Reader r, const std::string& path, const std::string& fallback, Role role) {
    PotentialConfig p{fallback};
    r.get("family", p.family);
    try {
        parse_family(p.family);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ".family: " + e.what());
    }
    r.get("omega", p.omega);
    r.get("beta", p.beta);
    r.get("coefficients", p.coefficients);
    r.finish();
    require(std::isfinite(p.omega) && std::isfinite(p.beta), path + ": parameters must be finite");
    try {
        p.build(role);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return p;
}

Json potential_json(const PotentialConfig& p) {
    Json j;
    j["family"] = p.family;
    switch (parse_family(p.family)) {
        case Family::Pendulum:
        case Family::Bistable: j["omega"] = p.omega; break;
        case Family::Fpu: j["beta"] = p.beta; break;
        case Family::Polynomial: j["coefficients"] = p.coefficients; break;
        default: break;
    }
    return j;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

PotentialSpec PotentialConfig::build(Role role) const {
    switch (parse_family(family)) {
        case Family::Pendulum: return PotentialSpec::pendulum(omega, role);
        case Family::Harmonic: return PotentialSpec::harmonic(role);
        case Family::Hertz: return PotentialSpec::hertz(role);
        case Family::Fpu: return PotentialSpec::fpu(beta, role);
        case Family::Toda: return PotentialSpec::toda(role);
        case Family::Bistable: return PotentialSpec::bistable(omega, role);
        case Family::Polynomial: return PotentialSpec::polynomial(coefficients, role);
        case Family::Zero: return PotentialSpec::zero(role);
    }
    throw ConfigError("unknown potential family");
}

LatticeModel ModelConfig::build() const {
    try {
        return LatticeModel(n, onsite.build(Role::Onsite), coupling.build(Role::Coupling), equilibrium_seed,
                            zero_mean_mode);
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

IntegrateOptions ValidateConfig::options() const {
    IntegrateOptions o;
    o.tol = tol;
    o.dt = dt;
    if (method == "rkf78")
        o.method = Integrator::Fehlberg78;
    else if (method == "dopri5")
        o.method = Integrator::DormandPrince;
    else if (method == "symplectic")
        o.method = Integrator::Symplectic;
    else
        throw ConfigError("validate.method: expected rkf78, dopri5 or symplectic");
    return o;
}

Json parse_document(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw ConfigError(fmt::format("{}:{}:{}: {}", source, line, col, what));
    }
}

Json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), path);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    return from_json(parse_document(text, source));
}

RunConfig load_config(const std::string& path) { return from_json(load_document(path)); }

RunConfig from_json(const Json& doc) {
    RunConfig c;
    Reader root(doc, "");

    {
        Reader m = root.sub("model");
        m.get("n", c.model.n);
        c.model.onsite = read_potential(m.sub("onsite"), "model.onsite", "pendulum", Role::Onsite);
        c.model.coupling = read_potential(m.sub("coupling"), "model.coupling", "harmonic", Role::Coupling);
        m.get("equilibrium_seed", c.model.equilibrium_seed);
        m.get("zero_mean_mode", c.model.zero_mean_mode);
        m.finish();
        require(c.model.n >= 3, "model.n: must be at least 3");
    }
    {
        Reader s = root.sub("solver");
        BranchOptions& o = c.solver;
        s.get("r_min", o.r_min);
        s.get("ds_initial", o.ds_initial);
        s.get("ds_min", o.ds_min);
        s.get("ds_max", o.ds_max);
        s.get("grow", o.grow);
        s.get("target_iterations", o.target_iterations);
        s.get("max_halvings", o.max_halvings);
        s.get("max_newton", o.max_newton);
        s.get("max_amplitude", o.max_amplitude);
        s.get("nu_min", o.nu_min);
        s.get("max_steps", o.max_steps);
        s.get("l0_initial", o.l0_initial);
        s.get("l0_max", o.l0_max);
        s.get("tail_tol", o.tail_tol);
        s.get("newton_tol", o.newton_tol);
        s.get("point_tol", o.point_tol);
        s.get("symmetry_tol", o.symmetry_tol);
        s.get("reconnect_tol", o.reconnect_tol);
        s.get("check_doubled", o.check_doubled);
        s.finish();
        require(o.ds_min > 0 && o.ds_min <= o.ds_initial && o.ds_initial <= o.ds_max,
                "solver: need 0 < ds_min <= ds_initial <= ds_max");
        require(o.r_min > 0 && o.max_amplitude > o.r_min, "solver: need 0 < r_min < max_amplitude");
        require(o.l0_initial >= 2 && o.l0_initial <= o.l0_max, "solver: need 2 <= l0_initial <= l0_max");
        require(o.max_steps >= 1, "solver.max_steps: must be positive");
    }
    root.get("seed", c.seed);
    {
        Reader b = root.sub("branch");
        b.get("k", c.branch.k);
        b.get("family", c.branch.family);
        b.get("snapshot_every", c.branch.snapshot_every);
        b.get("plot_script", c.branch.plot_script);
        b.finish();
        if (c.branch.family != "all") parse_branch_family(c.branch.family);
        require(c.branch.snapshot_every >= 1, "branch.snapshot_every: must be positive");
    }
    {
        Reader r = root.sub("resonances");
        r.get("l_max", c.resonances.l_max);
        r.finish();
        require(c.resonances.l_max >= 2, "resonances.l_max: must be at least 2");
    }
    {
        Reader r = root.sub("cradle");
        CradleConfig& o = c.cradle;
        r.get("nu", o.nu);
        r.get("groups", o.groups);
        r.get("starts_per_dim", o.starts_per_dim);
        r.get("l0", o.l0);
        r.get("s_min", o.s_min);
        r.get("s_max", o.s_max);
        r.get("radial_samples", o.radial_samples);
        r.get("grad_tol", o.grad_tol);
        r.get("dedup_tol", o.dedup_tol);
        r.get("polish_tol", o.polish_tol);
        r.finish();
        for (const auto& g : o.groups)
            require(g == "S" || g == "St" || g == "S~", "cradle.groups: entries must be S or St");
        require(o.starts_per_dim >= 1 && o.radial_samples >= 2 && o.l0 >= 4, "cradle: sizes out of range");
        require(o.s_min > 0 && o.s_max > o.s_min, "cradle: need 0 < s_min < s_max");
    }
    {
        Reader r = root.sub("homog");
        HomogConfig& o = c.homog;
        r.get("grid_radius", o.grid_radius);
        r.get("grid_radii", o.grid_radii);
        r.get("grid_angles", o.grid_angles);
        r.get("iters", o.iters);
        r.get("escape_radius", o.escape_radius);
        r.get("energy", o.energy);
        r.get("samples", o.samples);
        r.finish();
        require(o.grid_radius > 0 && o.grid_radii >= 1 && o.grid_angles >= 1, "homog: grid sizes must be positive");
        require(o.iters >= 0 && o.iters <= 10'000'000, "homog.iters: must lie in [0, 1e7]");
        require(o.energy > 0, "homog.energy: must be positive");
        require(o.samples >= 2, "homog.samples: must be at least 2");
    }
    {
        Reader r = root.sub("validate");
        ValidateConfig& o = c.validate;
        r.get("loop", o.loop);
        r.get("method", o.method);
        r.get("tol", o.tol);
        r.get("dt", o.dt);
        r.get("samples", o.samples);
        r.get("threshold", o.threshold);
        r.get("drift_threshold", o.drift_threshold);
        r.finish();
        o.options();
        require(o.tol > 0 && o.dt > 0 && o.samples >= 1, "validate: tolerances and sizes must be positive");
    }
    root.get("output_dir", c.output_dir);
    root.finish();
    return c;
}

Json to_json(const RunConfig& c) {
    Json j;
    j["model"]["n"] = c.model.n;
    j["model"]["onsite"] = potential_json(c.model.onsite);
    j["model"]["coupling"] = potential_json(c.model.coupling);
    j["model"]["equilibrium_seed"] = c.model.equilibrium_seed;
    j["model"]["zero_mean_mode"] = c.model.zero_mean_mode;

    const BranchOptions& o = c.solver;
    Json& s = j["solver"];
    s["r_min"] = o.r_min;
    s["ds_initial"] = o.ds_initial;
    s["ds_min"] = o.ds_min;
    s["ds_max"] = o.ds_max;
    s["grow"] = o.grow;
    s["target_iterations"] = o.target_iterations;
    s["max_halvings"] = o.max_halvings;
    s["max_newton"] = o.max_newton;
    s["max_amplitude"] = o.max_amplitude;
    s["nu_min"] = o.nu_min;
    s["max_steps"] = o.max_steps;
    s["l0_initial"] = o.l0_initial;
    s["l0_max"] = o.l0_max;
    s["tail_tol"] = o.tail_tol;
    s["newton_tol"] = o.newton_tol;
    s["point_tol"] = o.point_tol;
    s["symmetry_tol"] = o.symmetry_tol;
    s["reconnect_tol"] = o.reconnect_tol;
    s["check_doubled"] = o.check_doubled;

    j["seed"] = c.seed;
    j["branch"] = {{"k", c.branch.k},
                   {"family", c.branch.family},
                   {"snapshot_every", c.branch.snapshot_every},
                   {"plot_script", c.branch.plot_script}};
    j["resonances"] = {{"l_max", c.resonances.l_max}};
    j["cradle"] = {{"nu", c.cradle.nu},
                   {"groups", c.cradle.groups},
                   {"starts_per_dim", c.cradle.starts_per_dim},
                   {"l0", c.cradle.l0},
                   {"s_min", c.cradle.s_min},
                   {"s_max", c.cradle.s_max},
                   {"radial_samples", c.cradle.radial_samples},
                   {"grad_tol", c.cradle.grad_tol},
                   {"dedup_tol", c.cradle.dedup_tol},
                   {"polish_tol", c.cradle.polish_tol}};
    j["homog"] = {{"grid_radius", c.homog.grid_radius},
                  {"grid_radii", c.homog.grid_radii},
                  {"grid_angles", c.homog.grid_angles},
                  {"iters", c.homog.iters},
                  {"escape_radius", c.homog.escape_radius},
                  {"energy", c.homog.energy},
                  {"samples", c.homog.samples}};
    j["validate"] = {{"loop", c.validate.loop},
                     {"method", c.validate.method},
                     {"tol", c.validate.tol},
                     {"dt", c.validate.dt},
                     {"samples", c.validate.samples},
                     {"threshold", c.validate.threshold},
                     {"drift_threshold", c.validate.drift_threshold}};
    return j;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

std::string config_hash(const RunConfig& cfg) {
    return sha256_hex(to_json(cfg).dump());
}

}  // namespace ringwave::cli
