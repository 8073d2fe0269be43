#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace grushin {

using ordered_json = nlohmann::ordered_json;

/// 17 significant digits, shortest of %g style; the single float format of
/// every emitted artifact.
std::string format_double(double value);

/// Deterministic JSON text: insertion-ordered keys, floats via format_double,
/// two-space indentation, trailing LF.
std::string emit_json(const ordered_json& doc);

/// Writes bytes verbatim (binary mode, so LF stays LF).
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace grushin
