#pragma once

#include <stdexcept>
#include <string>

namespace clrg {

// Base class for all numerical/validation failures. The CLI maps these to
// exit code 2; usage errors stay with the argument parser (exit code 1).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// Signals a violated regularity condition (Assumption 1): a pivot of the
// symmetric factorization fell below tolerance.
struct NotPositiveDefinite : Error {
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

struct EmptySample : Error {
    explicit EmptySample(const std::string& msg) : Error(msg) {}
};

struct InvalidEnvIndex : Error {
    explicit InvalidEnvIndex(const std::string& msg) : Error(msg) {}
};

struct NotOrthogonal : Error {
    explicit NotOrthogonal(const std::string& msg) : Error(msg) {}
};

struct AntiCausalPresent : Error {
    explicit AntiCausalPresent(const std::string& msg) : Error(msg) {}
};

struct RealizabilityViolated : Error {
    explicit RealizabilityViolated(const std::string& msg) : Error(msg) {}
};

struct HypothesisViolated : Error {
    explicit HypothesisViolated(const std::string& msg) : Error(msg) {}
};

struct EmptyVSet : Error {
    explicit EmptyVSet(const std::string& msg) : Error(msg) {}
};

}  // namespace clrg
