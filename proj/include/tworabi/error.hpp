#pragma once

#include <stdexcept>
#include <string>

namespace tworabi {

// Base of every error the library throws. The CLI maps the subclasses onto
// process exit codes (see app.hpp).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Bad arguments, violated preconditions, malformed configuration.
struct InvalidArgument : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

// Operands bound to different Hilbert spaces.
struct SpaceMismatch : InvalidArgument {
    using InvalidArgument::InvalidArgument;
    const char* kind() const noexcept override { return "space_mismatch"; }
};

// A supposedly conserved operator does not commute with the Hamiltonian.
struct NotConserved : InvalidArgument {
    using InvalidArgument::InvalidArgument;
    const char* kind() const noexcept override { return "not_conserved"; }
};

// Truncation did not converge, a threshold was not bracketed, or population
// leaked into the cutoff levels.
struct ConvergenceError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "convergence"; }
};

// Requested dimension exceeds the configured hard limit.
struct ResourceLimit : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "resource_limit"; }
};

}  // namespace tworabi
