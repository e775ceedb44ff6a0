#pragma once

#include <stdexcept>
#include <string>

namespace spinglass {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSizeError : Error {
    using Error::Error;
};

// Random graph draw could not be repaired within the retry budget.
struct DegenerateGraphError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct SelfLoopError : Error {
    using Error::Error;
};

struct DuplicateEdgeError : Error {
    using Error::Error;
};

// A certified combinatorial construction failed its post-check. Indicates a
// bug (or an adversarial input outside the assumptions), never a valid outcome.
struct ConstructionFailedError : Error {
    using Error::Error;
};

struct TooLargeError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

// No existence witness for the maximizer; solving anyway requires force=true.
struct NonExistenceError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace spinglass
