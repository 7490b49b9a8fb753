#pragma once

#include "kconn/kernel_spec.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kconn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    /// "kernel eval", "connect covderiv", "verify", ...
    std::string command;
    std::optional<KernelSpec> kernel;
    std::string point;
    std::string second_point;
    std::string points;
    std::string direction;
    std::string section = "one";
    std::string curve;
    std::string v0;
    int steps = 64;
    int random_points = 0;
    int probes = 20;
    Index n = 4;
    Index k = 2;
    std::string choi_path;
    Index input_dim = 0;
    std::uint64_t seed = 42;
    double tolerance = numerics::kDefaultTolerance;
    std::string format = "csv";
    std::string output;
    std::string v_output;
    std::string module = "all";
    std::string inject_fault;
};

/// Early exit from argument parsing: help text (code 0) or a usage error (code 2).
struct ExitRequest {
    int code = kExitUsage;
    std::string message;
};

/// Parses argv. The default tolerance comes from KERNEL_CONNECT_TOL when set.
std::variant<RunConfig, ExitRequest> parse_args(int argc, const char* const* argv);

/// Executes a parsed config, writing the result to out (or config.output)
/// and diagnostics to err. Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kconn::cli
