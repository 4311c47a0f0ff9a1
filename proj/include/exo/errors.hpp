#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace exo {

/// An argument violated an operation's documented precondition
/// (out-of-range index, malformed table, invalid distribution).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A construction would exceed a configured size limit.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, double required)
        : std::runtime_error(what), required_(required) {}

    double required() const { return required_; }

private:
    double required_;
};

/// An operation was used under an observation regime it does not support.
class ModeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Experiment configuration is malformed or inconsistent.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace exo
