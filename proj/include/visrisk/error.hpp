#pragma once

#include <stdexcept>
#include <string>

namespace visrisk {

/// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric routine could not produce a usable result (CLI exit code 4).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup of an unknown entity, indicator, time point or view.
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A request or document that is syntactically or semantically invalid.
class InvalidRequestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace visrisk
