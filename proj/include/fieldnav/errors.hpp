#pragma once

#include <stdexcept>
#include <string>

namespace fieldnav {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfBoundsError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct UntraversableWaypointError : Error {
    int waypoint_index;
    explicit UntraversableWaypointError(int index)
        : Error("waypoint " + std::to_string(index) + " is not traversable"),
          waypoint_index(index) {}
};

struct SamplingExhaustedError : Error {
    using Error::Error;
};

struct NoPathError : Error {
    int from, to;
    NoPathError(int a, int b)
        : Error("no path from node " + std::to_string(a) + " to node " + std::to_string(b)),
          from(a), to(b) {}
};

struct DisconnectedError : Error {
    using Error::Error;
};

struct MissingCachedPathError : Error {
    using Error::Error;
};

struct PathExhaustedError : Error {
    using Error::Error;
};

struct EmptyActionSetError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace fieldnav
