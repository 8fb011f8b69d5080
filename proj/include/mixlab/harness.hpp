#pragma once

#include <string>
#include <vector>

#include "mixlab/error.hpp"

namespace mixlab {

/// Malformed experiment configuration; the message names the offending key.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct ExperimentKind {
    std::string name;
    std::string description;
};

/// The six experiment kinds in their fixed listing order.
const std::vector<ExperimentKind>& experiment_kinds();

/// One "name<TAB>description" line per kind, or a JSON array of
/// {"kind", "description"} when `json` is set.
std::string list_experiments(bool json);

std::string artifact_version();

struct RunOutcome {
    bool pass = false;
    std::vector<std::string> files;  // written, relative to the output directory
};

/// Parses a JSON experiment configuration, runs it and writes manifest.json
/// plus the experiment's reports into `out_dir`.  Throws ConfigError for
/// unknown keys, a missing seed, bad values or an unknown kind.  Outputs
/// depend only on the configuration, never on `threads`.
RunOutcome run_experiment(const std::string& config_text, const std::string& out_dir, unsigned threads = 1);

}  // namespace mixlab
