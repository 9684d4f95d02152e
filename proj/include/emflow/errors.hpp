#pragma once

#include <stdexcept>
#include <string>

namespace emflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An event lies outside the coordinate chart of a metric (e.g. r <= 2M).
class ChartDomainError : public Error {
public:
    using Error::Error;
};

/// A curve or vector violates a required causal character.
class CausalityError : public Error {
public:
    using Error::Error;
};

/// Inconsistent model setup: missing potential, wrong signature, bad scene.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Invalid argument values (sign mismatches, non-positive tolerances, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Trajectory cannot be described by a Lorentz force equation with a single ratio.
class NotLfeSolutionError : public Error {
public:
    using Error::Error;
};

/// The variational optimizer found no admissible causal descent step.
class StuckError : public Error {
public:
    using Error::Error;
};

/// No connecting causal curve is available to bound the Lorentzian distance.
class UnknownDistanceError : public Error {
public:
    using Error::Error;
};

} // namespace emflow
