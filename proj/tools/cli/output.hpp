#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace ringwave::cli {

/// Shortest text that round-trips a double.
std::string num(double x);

/// Writes the artifacts of one run into a directory. Every file starts with the tool
/// version and config hash: "# ..." lines for CSV and text, a "meta" object for JSON.
class OutputDir {
public:
    OutputDir(std::filesystem::path dir, std::string command, std::string config_hash);

    const std::filesystem::path& path() const { return dir_; }
    const std::vector<std::string>& written() const { return written_; }

    Json meta() const;

    void csv(const std::string& name, const std::vector<std::string>& columns,
             const std::vector<std::vector<std::string>>& rows);
    void json(const std::string& name, const Json& body);
    /// Raw JSON text whose first member must be "meta"; used for loop snapshots.
    void json_text(const std::string& name, const std::string& text);
    void text(const std::string& name, const std::string& body, const std::string& comment = "#");

private:
    std::filesystem::path open(const std::string& name);

    std::filesystem::path dir_;
    std::string command_;
    std::string hash_;
    std::vector<std::string> written_;
};

}  // namespace ringwave::cli
