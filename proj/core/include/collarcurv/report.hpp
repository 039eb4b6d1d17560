#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace collarcurv {

/// One named pass/fail with its measured residual or margin.
struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;

    nlohmann::json to_json() const;
};

/// Worst offending sample of a verification sweep, for debugging.
struct SampleRef {
    std::string xi;
    double s = 0.0;
    double t = 0.0;
    std::size_t node = 0;

    nlohmann::json to_json() const;
};

/// Deterministic machine-readable verification record. Byte-stable for
/// identical inputs: ordered keys, shortest-round-trip doubles.
struct VerificationReport {
    static constexpr int kSchemaVersion = 1;

    std::string inputs_digest;
    nlohmann::ordered_json sampling;      // grids and refinement regions used
    double min_margin = 0.0;              // min (scal - sigma) over all samples
    std::vector<CheckResult> checks;
    nlohmann::ordered_json constants;     // C, C0, delta, support, eta, eps_slack
    SampleRef worst;

    bool all_pass() const;
    nlohmann::ordered_json to_json() const;
    std::string to_string() const;        // pretty JSON, trailing newline
};

/// FNV-1a 64-bit over a canonical string; used for inputs_digest.
std::uint64_t fnv1a(const std::string& data);
std::string digest_hex(const std::string& data);

} // namespace collarcurv
