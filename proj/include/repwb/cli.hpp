#pragma once

// Batch front end. A config is {"group", "representations", "vectors", "task"};
// every subcommand writes one JSON report with sorted keys:
//   command, inputs (the config with defaults filled in), headline, outputs,
//   tolerances.
// `verify` recomputes the headline and the listed checks from a report.

#include <iosfwd>
#include <string>
#include <vector>

#include "repwb/io.hpp"

namespace repwb::cli {

using json = nlohmann::json;

inline constexpr double kVerifyTol = 1e-9;

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kResource = 3;

// args excludes the program name. The report goes to --out, or to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& subcommands();

// Runs one subcommand on a config (task overrides already applied).
json execute(const std::string& command, json config);

struct Check {
  std::string name;
  double reported = 0.0;
  double recomputed = 0.0;
  double difference() const;
};

struct Verification {
  bool ok = true;
  std::vector<Check> checks;
  json to_json() const;
};

Verification verify(const json& report, double tol = kVerifyTol);

}  // namespace repwb::cli
