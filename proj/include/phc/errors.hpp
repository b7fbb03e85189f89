#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace phc
{
// Invalid or inconsistent device description (overlapping holes, bad ranges).
class GeometryError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A grid or output would exceed its configured memory budget.
class SizingError : public std::runtime_error
{
public:
    SizingError(const std::string &what, std::size_t required_bytes)
        : std::runtime_error(what), required_bytes_(required_bytes)
    {
    }
    std::size_t required_bytes() const { return required_bytes_; }

private:
    std::size_t required_bytes_;
};

// Bad simulation setup (stability bound, parity contradiction, monitor placement).
class SetupError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SymmetryError : public SetupError
{
public:
    using SetupError::SetupError;
};

// NaN or Inf appeared in the field arrays.
class DivergenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Eigensolver failures, undefined ratios, fit non-convergence.
class NumericsError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Lorentzian fit that failed to converge or found no peak.
class FitError : public NumericsError
{
public:
    FitError(const std::string &what, std::vector<double> residual_history)
        : NumericsError(what), history_(std::move(residual_history))
    {
    }
    const std::vector<double> &residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string &path, const std::string &message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path)
    {
    }
    const std::string &path() const { return path_; }

private:
    std::string path_;
};

} // namespace phc
