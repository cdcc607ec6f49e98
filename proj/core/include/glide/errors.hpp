#pragma once

#include <stdexcept>
#include <string>

namespace glide {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// World generation exhausted its rejection-sampling budget.
class GenerationFailed : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    using Error::Error;
};

/// Ego-vehicle and victim coincide, so no projection direction exists.
class DegenerateRay : public Error {
public:
    using Error::Error;
};

/// The viewing ray never reaches the ground plane.
class NoGroundIntersection : public Error {
public:
    using Error::Error;
};

/// Scout has neither a plan nor a victim to follow.
class NoReference : public Error {
public:
    using Error::Error;
};

/// No victim can be reached from the ego-vehicle.
class AllUnreachable : public Error {
public:
    using Error::Error;
};

/// Invalid trial, suite or file configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace glide
