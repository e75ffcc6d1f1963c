#ifndef ODCSIM_TYPES_HPP
#define ODCSIM_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace odcsim {

// Sequence lengths and token sums. Tokens are discrete, so integral.
using Tokens = std::int64_t;

// Bad user-supplied parameter or config field. CLI exit code 2.
struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (length files, config JSON). CLI exit code 2.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A workload that cannot be scheduled under the given memory budget.
// CLI exit code 3.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solution handed to an evaluator that cannot accept its mode
// (e.g. variable microbatch counts under per-layer collectives).
struct ModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violation of the ODC transfer protocol (buffer bound exceeded).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Use of an uninitialized shard or other bad fabric state.
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal consistency failure. CLI exit code 4.
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

// Process-wide log verbosity, set from ODC_SIM_LOG by the CLI.
LogLevel log_level();
void set_log_level(LogLevel level);
void set_log_level_from_env();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace odcsim

#endif  // ODCSIM_TYPES_HPP
