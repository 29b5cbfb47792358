#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace sperner_fix::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kVerificationFailure = 2,
    kNonConstancy = 3,
    kResolutionCap = 4,
    kProjectionFailure = 5,
    kOtherFailure = 6,
};

struct SolveOptions {
    std::string map;           ///< Built-in map name; exclusive with spec.
    std::string spec;          ///< Domain + map JSON file.
    int n = 2;
    double eps = 1e-3;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;           ///< Empty writes to the output stream.
    std::string mode = "path";
    std::optional<double> tau_fix;
    double tau_proj = 1e-10;
    std::int64_t max_resolution = 1'000'000'000;
    std::size_t max_net_size = 64;
};

struct VerifyOptions {
    std::optional<int> n;
    std::int64_t m = 3;
    std::string mode = "auto";       ///< auto | exhaustive | random
    int samples = 1000;
    int handshake_random = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;
    std::size_t max_exhaustive = 1'000'000;
};

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_trace(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

/// Default worker count: SPERNER_FIX_WORKERS when set and valid, else 1.
unsigned default_workers();

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sperner_fix::cli
