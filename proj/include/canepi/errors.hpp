#pragma once

#include <stdexcept>
#include <string>

namespace canepi {

/// Invalid distribution or model parameter (e.g. lo > hi, p outside [0,1]).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration file problems. `key_path` names the offending entry, e.g. "network.gamma".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& what)
        : std::runtime_error(key_path.empty() ? what : key_path + ": " + what),
          key_path_(std::move(key_path)) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

/// Network wiring could not produce a simple graph within the retry budget.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated state-machine precondition (infecting an infected agent, replacing a living one).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Numerical routine received input it cannot handle (zero variance, 0 person-years with cases).
class ComputationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace canepi
