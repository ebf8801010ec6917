#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

/// Raised when the leader density drops to (or below) the configured floor.
/// Signals that the feedback velocity field u = w / rho_L is no longer
/// well defined; typically means p is below the feasibility threshold or
/// the initial condition is infeasible.
class LeaderDepletion : public std::runtime_error {
public:
    LeaderDepletion(double min_rho_L, double t)
        : std::runtime_error("leader density depleted: min rho_L = " +
                             std::to_string(min_rho_L) + " at t = " + std::to_string(t)),
          min_rho_L(min_rho_L), t(t) {}
    double min_rho_L;
    double t;
};

/// Raised when a field exceeds the blow-up guard or leaves the tolerated
/// negativity band during time stepping.
class NumericalBlowup : public std::runtime_error {
public:
    explicit NumericalBlowup(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by steady-state operations that require D > 0.
class DiffusionZero : public std::runtime_error {
public:
    DiffusionZero() : std::runtime_error("diffusion coefficient must be positive") {}
};

/// Raised by kl_divergence when the target density is not strictly positive.
class TargetVanishes : public std::runtime_error {
public:
    TargetVanishes() : std::runtime_error("target density must be strictly positive") {}
};

/// Raised by kde_circular when given no samples.
class EmptySample : public std::runtime_error {
public:
    EmptySample() : std::runtime_error("kernel density estimate requires at least one sample") {}
};

/// Raised by select_rates for a nonpositive requested mass ratio.
class NonpositiveRatio : public std::runtime_error {
public:
    NonpositiveRatio() : std::runtime_error("requested mass ratio must be positive") {}
};

/// Configuration / experiment-spec errors (unknown keys, missing fields, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace swarm
