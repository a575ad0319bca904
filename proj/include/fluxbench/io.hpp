#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace fluxbench {

/// Writes to a sibling temporary file, then renames over `path`, so readers never see a
/// partial file. Parent directories are created. Throws Io.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string read_text(const std::filesystem::path& path);  // throws Io
nlohmann::json read_json(const std::filesystem::path& path);  // throws Io, ParseError

}  // namespace fluxbench
