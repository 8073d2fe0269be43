#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace grushin::cli {

struct Artifact {
  std::string name;  ///< file name relative to the output directory
  std::string bytes;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand and returns its artifacts, filtered by config.format.
/// `params` returns a single JSON artifact that the front end prints.
std::vector<Artifact> run_subcommand(const std::string& subcommand, const RunConfig& config);

/// Full front end: parses argv-style arguments (without the program name),
/// writes artifacts and returns the exit code. Errors go to `err` as a JSON
/// object carrying a stable `code` field.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grushin::cli
