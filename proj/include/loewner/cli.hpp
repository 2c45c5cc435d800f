#pragma once

// Command-line front end: spec-string parsers, subcommand dispatch, and the
// JSON report envelope.
//
// Subcommands: evolve, chain, extend, beltrami, classify, recover, range,
// schwarzian, demo. Exit codes: 0 success, 2 invalid input, 3 numerical
// failure.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loewner/analysis.hpp"
#include "loewner/io.hpp"

namespace loewner {

inline constexpr const char* kArtifactName = "loewner";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct ConfigKey {
  std::string key;
  std::string help;
};

/// Every accepted configuration key; command-line flags are "--" + key.
const std::vector<ConfigKey>& config_keys();
const std::vector<std::string>& subcommands();

/// const:re[,im] | koebe:k[,n] | cayley | rational:c;c/c;c | essential:<rho>
/// | piecewise:t0@spec|t1@spec ... (complex coefficients as re or re,im;
/// spec strings inside piecewise may not contain '|').
HerglotzSpec parse_herglotz(const std::string& text);
/// re[,im] | rotate:r,omega | table:t@re,im;t@re,im;... | essential:<rho>
DrivingSpec parse_driving(const std::string& text);

struct MapSpec {
  std::optional<ClosedFormMap> closed_form;
  std::optional<MobiusTransform> mobius;
};
/// f1:k | f2:k | fn:k,n | fsigma:sigma | mobius:a;b;c;d (entries re or re,im)
MapSpec parse_map(const std::string& text);

struct RunOutcome {
  int exit_code = 0;
  Json envelope;
};

int exit_code_for(ErrorKind kind) noexcept;

/// Runs config["command"]. Exports named in the config are written only when
/// the command succeeds.
RunOutcome run(const Config& config);

/// run() plus writing the envelope to config["output"] or to `out`.
int run_and_report(const Config& config, std::ostream& out);

}  // namespace loewner
