#pragma once

#include "swarm/grid.hpp"
#include "swarm/grid_nd.hpp"

#include <cstdint>

namespace swarm {

/// Telemetry flags carried on every diagnostics row.
enum DiagFlag : std::uint32_t {
    kFlagNegativity = 1u << 0,   ///< some field dipped below -1e-9
    kFlagLeaderFloor = 1u << 1,  ///< min rho_L at or below the configured floor
    kFlagDensityFloor = 1u << 2, ///< a density floor was applied in a division
    kFlagCflClamp = 1u << 3,     ///< advective CFL bound tighter than dt
};

struct DiagnosticsRow {
    double t = 0.0;
    double D_KL = 0.0;
    double M_L = 0.0;
    double M_F = 0.0;
    double Phi_F_obs = 0.0;
    double err_L2 = 0.0;
    std::uint32_t flags = 0;
};

/// D_KL = integral of rho log(rho / target), 0 log 0 = 0; values of rho
/// below 1e-14 are treated as zero to avoid -inf amplification.
/// Throws TargetVanishes unless the target is strictly positive.
double kl_divergence(const PeriodicField& rho, const PeriodicField& target);
double kl_divergence(const PeriodicFieldND& rho, const PeriodicFieldND& target);

/// ||target - rho||_2 by grid quadrature.
double l2_error(const PeriodicField& rho, const PeriodicField& target);
double l2_error(const PeriodicFieldND& rho, const PeriodicFieldND& target);

} // namespace swarm
