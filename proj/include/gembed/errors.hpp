#pragma once

#include <stdexcept>
#include <string>

namespace gembed {

/// Raised when an input file or an in-memory dataset is malformed.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation produces a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gembed
