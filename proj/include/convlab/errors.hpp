#pragma once

#include <stdexcept>
#include <string>

namespace convlab {

// Base for every error the library raises on bad input. Logic errors inside
// the library (a simulation contradicting its analytic oracle) use
// std::logic_error instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: mismatched problem family, out-of-range parameter,
// unknown config key, mismatched grids.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Evidence stream violates nesting or containment.
class StreamError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (e.g. BIC at n < 2).
class DomainError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace convlab
