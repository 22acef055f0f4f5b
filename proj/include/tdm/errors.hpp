#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, presets or configuration files.
struct ConfigError : Error {
    using Error::Error;
};

struct FilesystemError : Error {
    using Error::Error;
};

/// An implicit step whose linear solve did not reach the requested tolerance.
struct StepError : Error {
    StepError(const std::string& what, double residual, long step = -1)
        : Error(what), residual(residual), step(step)
    {
    }
    double residual;
    long step;
};

/// A continuation entry of the periodic fixed-point search that did not converge.
struct FixedPointError : Error {
    FixedPointError(const std::string& what, std::size_t entry, double mu, double nu, double last_ratio)
        : Error(what), entry(entry), mu(mu), nu(nu), last_ratio(last_ratio)
    {
    }
    std::size_t entry;
    double mu;
    double nu;
    double last_ratio;
};

}  // namespace tdm
