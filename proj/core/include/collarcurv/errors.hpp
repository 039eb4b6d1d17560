#pragma once

#include <stdexcept>
#include <string>

namespace collarcurv {

/// Violated operation precondition (bad input, not a failed numerical check).
/// Maps to process exit code 2 in the CLI.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical verification could not be made to pass within its search
/// budget. Carries a diagnostic string. Maps to exit code 1 in the CLI.
class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace collarcurv
