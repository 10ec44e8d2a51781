#include "output.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ringwave/errors.hpp"
#include "ringwave/version.hpp"

namespace ringwave::cli {

std::string num(double x) { return fmt::format("{:.17g}", x); }

OutputDir::OutputDir(std::filesystem::path dir, std::string command, std::string config_hash)
    : dir_(std::move(dir)), command_(std::move(command)), hash_(std::move(config_hash)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw ConfigError(fmt::format("cannot create output directory {}: {}", dir_.string(), ec.message()));
}

Json OutputDir::meta() const {
    return {{"tool", "ringwave"}, {"version", kVersion}, {"command", command_}, {"config_sha256", hash_}};
}

std::filesystem::path OutputDir::open(const std::string& name) {
    written_.push_back(name);
    return dir_ / name;
}

void OutputDir::text(const std::string& name, const std::string& body, const std::string& comment) {
    std::ofstream os(open(name), std::ios::binary);
    os << comment << " ringwave " << kVersion << "\n";
    os << comment << " command " << command_ << "\n";
    os << comment << " config_sha256 " << hash_ << "\n";
    os << body;
    if (!os) throw std::runtime_error("failed writing " + name);
}

void OutputDir::csv(const std::string& name, const std::vector<std::string>& columns,
                    const std::vector<std::vector<std::string>>& rows) {
    std::string body = fmt::format("{}\n", fmt::join(columns, ","));
    for (const auto& r : rows) body += fmt::format("{}\n", fmt::join(r, ","));
    text(name, body);
}

void OutputDir::json(const std::string& name, const Json& body) {
    Json j;
    j["meta"] = meta();
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    json_text(name, j.dump(1) + "\n");
}

void OutputDir::json_text(const std::string& name, const std::string& text) {
    std::ofstream os(open(name), std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("failed writing " + name);
}

}  // namespace ringwave::cli
