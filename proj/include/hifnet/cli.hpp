#pragma once

#include "hifnet/config.hpp"
#include "hifnet/errors.hpp"

#include <exception>
#include <iosfwd>
#include <string>

namespace hifnet::cli {

using json = config::json;

inline constexpr const char* kToolVersion = "1.0.0";

enum class ExitCode : int {
    Ok = 0,
    Usage = 1,
    Config = 2,
    Data = 3,
    Divergence = 4,
    Fingerprint = 5,
    CheckFailed = 6,
};

/// Bad invocation (missing inputs, empty dataset for eval, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

ExitCode exit_code_for(const std::exception& e);

// Each command takes a fully resolved argument object (the manifest's "args"), writes its
// artifacts plus a manifest, and returns the manifest. Progress goes to `log`.
json cmd_gen(const json& args, std::ostream& log);
json cmd_split(const json& args, std::ostream& log);
json cmd_train(const json& args, std::ostream& log);
json cmd_finetune(const json& args, std::ostream& log);
json cmd_eval(const json& args, std::ostream& log);
json cmd_gradcheck(const json& args, std::ostream& log);
json cmd_replicate(const json& args, std::ostream& log);

/// Dispatches by command name.
json execute(const std::string& command, const json& args, std::ostream& log);

/// Re-runs the command recorded in a manifest and compares artifact checksums.
/// Returns true when every artifact matches.
bool replay(const json& manifest, std::ostream& log);

/// Resolved arguments for `replicate case1` / `replicate case2` with their defaults.
json replicate_defaults(const std::string& which, const std::string& out_dir);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hifnet::cli
