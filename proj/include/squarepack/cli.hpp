#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace squarepack {

// An experiment spec is a JSON object {"subcommand": name, <parameter>: value, ...} whose keys
// are the long flag names with '-' written as '_'. Command-line flags override spec-file keys.
std::vector<std::string> subcommand_names();

// Runs one spec, writes every requested artifact, and returns the report with the resolved
// spec (defaults filled in) under "spec". Text meant for stdout goes to `out`.
nlohmann::json execute_spec(const nlohmann::json& spec, std::ostream& out);

// Exit status 0 on success, 1 on a run error (error JSON on `err`), 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace squarepack
