#pragma once

#include <stdexcept>
#include <string>

namespace kirchnorm {

// Parameter tuple outside the regime required by the requested operation.
class RegimeError : public std::runtime_error {
public:
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// A rescaled field cannot be represented on the grid without losing mass.
class SupportOverflow : public std::runtime_error {
public:
    explicit SupportOverflow(const std::string& what) : std::runtime_error(what) {}
};

// A constructed path point failed its mass constraint after correction.
class MassMismatch : public std::runtime_error {
public:
    explicit MassMismatch(const std::string& what) : std::runtime_error(what) {}
};

// An iterative procedure stopped without reaching its target tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kirchnorm
