#pragma once

#include <stdexcept>
#include <string>

namespace vidtome {

// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector/matrix length disagreement.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Empty input where at least one element is required.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Out-of-range or otherwise invalid parameter value.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Internally inconsistent state (map does not fit its inputs, corrupted provenance).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Non-finite value produced or consumed.
class NumericError : public Error {
public:
    using Error::Error;
};

// Invalid noise schedule.
class ScheduleError : public Error {
public:
    using Error::Error;
};

// Malformed configuration file or value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// File read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vidtome
