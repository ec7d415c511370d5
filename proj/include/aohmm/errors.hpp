#pragma once

#include <stdexcept>
#include <string>

namespace aohmm {

// Invalid distribution parameters (non-positive concentration, dof too small).
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Matrix that stays non-SPD after jitter, or another unrecoverable numeric failure.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input: labels out of range, dimension mismatch, bad files.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Snapshot blob that is truncated, corrupt or from another format version.
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aohmm
