#pragma once

#include <stdexcept>
#include <string>

namespace mfc {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sample pushed with a timestamp not strictly after the newest one.
class OutOfOrderError : public Error {
public:
    using Error::Error;
};

// Estimator asked for a value before the window holds two samples.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Non-finite input or output encountered.
class NumericError : public Error {
public:
    using Error::Error;
};

// Invalid parameters, mismatched lengths, malformed config files.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Plant state left the admissible region (|x| > 1e6).
class DivergenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mfc
