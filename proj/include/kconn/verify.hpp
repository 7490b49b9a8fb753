#pragma once

#include "kconn/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kconn::verify {

enum class Bound { Upper, Lower };

/// One residual check. Upper: passes iff value < tolerance. Lower: passes
/// iff value >= tolerance (used for eigenvalue floors and convergence orders).
struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Bound bound = Bound::Upper;
    bool passed = false;
};

struct Options {
    std::uint64_t seed = 42;
    /// "all" or one module name (see modules()).
    std::string module = "all";
    /// Default tolerance for positivity certificates (KERNEL_CONNECT_TOL).
    double tolerance = numerics::kDefaultTolerance;
    /// Test hook: flips the sign of the analytic disk second-slot derivative.
    bool inject_disk_sign_fault = false;
};

struct Report {
    Options options;
    std::vector<CheckResult> checks;
    std::vector<std::string> notes;

    bool passed() const;
    std::vector<std::string> failed() const;
    const CheckResult* find(const std::string& name) const;
    /// Pretty JSON with sorted keys; byte-identical for identical options.
    std::string to_json() const;
};

/// numerics, kernels, rkhs, connections, grassmann, cpmaps
const std::vector<std::string>& modules();

/// Throws std::invalid_argument for an unknown module name.
Report run(const Options& options);

/// Universal vs reductive vs generic covariant derivatives on Gr(k, C^n),
/// with metric compatibility and unitary equivariance, over random probes.
Report grassmann_agreement(Index n, Index k, int probes, std::uint64_t seed);

}  // namespace kconn::verify
