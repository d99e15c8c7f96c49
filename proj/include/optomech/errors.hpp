#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace optomech {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration. `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A numerical procedure failed to converge or hit a degenerate input.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A root bracket that could not be polished within the iteration budget.
class RootPolishError : public NumericalError {
public:
    RootPolishError(double lo, double hi)
        : NumericalError("root polishing did not converge in bracket [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]"),
          lo_(lo), hi_(hi) {}

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// File-system failure; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace optomech
