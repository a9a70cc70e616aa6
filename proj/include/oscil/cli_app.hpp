#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "oscil/fixed_point.hpp"

namespace oscil::cli {

/// Exit codes shared by every subcommand.
enum ExitCode {
  kOk = 0,
  kReproduceMismatch = 1,
  kConfigError = 2,
  kHypothesisFailure = 3,
  kNonConvergence = 4,
};

struct OutputConfig {
  std::optional<std::string> csv;
  std::string format = "json";
};

/// One structured config document covering every subcommand; field names
/// mirror the library types verbatim.
struct RunConfig {
  SystemSpec system;
  QuadConfig quad;
  SimConfig sim;
  InitialState init;
  FixedPointConfig fixed_point;
  OutputConfig output;
};

/// Built-in defaults (the first worked example's system and a matching
/// initial state).
RunConfig default_config();

/// Parse a config document; unknown keys anywhere are rejected.  Throws
/// ConfigError on malformed input.
RunConfig parse_config(const std::string& json_text);

/// Serialize a config with every field present; parse_config(dump_config(c))
/// reproduces c exactly.
std::string dump_config(const RunConfig& cfg);

// Subcommands.  Reports go to `out` as a single JSON document; a short human
// summary goes to `err`.  Return values follow ExitCode.
int run_check_criteria(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_construct_nonosc(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_reproduce_example(int case_id, std::ostream& out, std::ostream& err);

/// Built-in systems of the two worked example cases (1 and 2).
RunConfig example_config(int case_id);

}  // namespace oscil::cli
