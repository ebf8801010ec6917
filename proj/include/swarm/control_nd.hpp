#pragma once

#include "swarm/control_1d.hpp"
#include "swarm/grid_nd.hpp"
#include "swarm/kernels.hpp"
#include "swarm/metrics.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace swarm {

struct SwarmStateND {
    PeriodicFieldND rho_L;
    PeriodicFieldND rho_F;
    PeriodicFieldND eta_F;
    double t = 0.0;

    PeriodicFieldND rho() const;
};

Masses masses(const SwarmStateND& state);
SwarmStateND uniform_state_nd(GridND g, double M_L0, double M_F0, double Phi_F);

struct RunNDResult {
    std::vector<DiagnosticsRow> rows;
    std::map<double, SwarmStateND> snapshots;
    RunStatus status = RunStatus::Completed;
    double t_end = 0.0;
    double min_rho_L = 0.0;
    double max_curl = 0.0; ///< max over the run of ||curl(w)||_inf
    std::string message;
};

/// d-dimensional closed loop (d = 2, 3): divergence-specified control with
/// zero-curl Poisson recovery, nD reaction term, forward-Euler stepping.
/// Advection/diffusion use central differences; the control recovery is
/// spectral, with the operator mismatch absorbed by the Y mean subtraction.
class ControlND {
public:
    ControlND(GridND g, TargetDensityND target, SeparableMorseKernel kernel, ControlParams params);

    const GridND& grid() const { return grid_; }
    const TargetDensityND& target() const { return target_; }
    const SeparableMorseKernel& kernel() const { return kernel_; }

    /// Scalar forcing Y = -K e - div[rho (f*rho)] + D lap(rho), mean-
    /// subtracted before the Poisson solve (analytically mean-free).
    PeriodicFieldND compute_forcing_Y(const SwarmStateND& state) const;

    /// w from the Poisson solve of Y; u = w / rho_L componentwise.
    /// div(rho_L u) = Y and curl(rho_L u) = 0 to spectral accuracy.
    /// Throws LeaderDepletion when min rho_L <= rho_L_floor.
    VectorFieldND compute_control_u_nd(const SwarmStateND& state) const;

    /// Leader momentum field w = rho_L u (no division involved).
    VectorFieldND compute_leader_flux_nd(const SwarmStateND& state) const;

    PeriodicFieldND compute_reaction_q_nd(const SwarmStateND& state, const VectorFieldND& u) const;
    PeriodicFieldND compute_reaction_q_from_flux_nd(const SwarmStateND& state,
                                                    const VectorFieldND& w) const;

    void step_nd(SwarmStateND& state, const RunParams& rp) const;

    RunNDResult run_nd(SwarmStateND state, const RunParams& rp,
                       const std::function<void(const DiagnosticsRow&)>& on_row = {}) const;

private:
    struct StepFields {
        VectorFieldND w;
        PeriodicFieldND q;
        double max_speed = 0.0;
        double curl_inf = 0.0;
    };
    StepFields assemble(const SwarmStateND& state, bool want_curl) const;
    void advance(SwarmStateND& state, const StepFields& sf, double dt) const;

    GridND grid_;
    TargetDensityND target_;
    SeparableMorseKernel kernel_;
    ControlParams params_;
};

} // namespace swarm
