#pragma once

#include <stdexcept>
#include <string>

namespace uqkit {

/// Precondition violated by caller-supplied values (non-finite logits, bad alpha, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent file contents.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace uqkit
