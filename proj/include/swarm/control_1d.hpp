#pragma once

#include "swarm/grid.hpp"
#include "swarm/kernels.hpp"
#include "swarm/metrics.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace swarm {

/// Continuum state (rho_L, rho_F, eta_F) at time t.
struct SwarmState {
    PeriodicField rho_L;
    PeriodicField rho_F;
    PeriodicField eta_F;
    double t = 0.0;

    PeriodicField rho() const;
};

struct Masses {
    double M_L = 0.0;
    double M_F = 0.0;
    double Phi_F_obs = 0.0;
};

Masses masses(const SwarmState& state);

/// Uniform-in-space initial state with the given species masses.
SwarmState uniform_state(Grid1D g, double M_L0, double M_F0, double Phi_F);

/// Model and controller parameters. The controller always uses the nominal
/// D and kernel; the plant may be perturbed (robustness experiments) via
/// D_followers and a separate plant kernel in Control1D.
struct ControlParams {
    double D = 0.05;
    double K = 1.0;
    double K_FL = 1.0;
    double K_LF = 2.0;
    double Phi_F = 0.4;
    double rho_L_floor = 1e-8;
    bool control_enabled = true; ///< false: u = 0, q = 0 (uncontrolled degenerate mode)

    double a() const { return K_FL + K_LF; } // reaction relaxation rate
    double b() const { return K_FL - K_LF; }
    double p() const { return 1.0 - Phi_F; }
    void validate() const;
};

/// Time-stepping policy and abort guards.
struct RunParams {
    double dt = 1e-3;
    double t_f = 15.0;
    int record_every = 10;
    std::vector<double> snapshot_times;

    /// Strict mode aborts the run when min rho_L reaches rho_L_floor
    /// (feedback u undefined; indicates infeasibility). The bimodal
    /// reproduction must run through structurally negative rho_L dips
    /// (its p is below the Theorem-2 threshold), so presets may disable it.
    bool halt_on_leader_depletion = true;

    /// Abort when any field drops below -negativity_abort. Forward Euler
    /// noise sits at ~1e-9 (flagged as telemetry); infeasible targets give
    /// structural dips of order 1e-2, genuine instability runs away.
    double negativity_abort = 0.05;
    double blowup_abort = 1e6;
    double cfl_safety = 0.5;

    void validate(Grid1D g, const ControlParams& cp, double D_plant_max) const;
};

enum class RunStatus { Completed, LeaderDepleted, Negativity, Blowup, CflViolation };

std::string to_string(RunStatus s);

struct Snapshot {
    SwarmState state;
    PeriodicField u; ///< w / rho_L with |rho_L| clamped to the floor (display only)
    PeriodicField q;
};

struct Run1DResult {
    std::vector<DiagnosticsRow> rows;
    std::map<double, Snapshot> snapshots;
    RunStatus status = RunStatus::Completed;
    double t_end = 0.0;
    double min_rho_L = 0.0;
    double min_field = 0.0;
    std::string message;
};

/// Closed-loop 1D system bound to a grid, target, and kernel.
class Control1D {
public:
    Control1D(Grid1D g, TargetDensity target, MorseParams kernel, ControlParams params);

    /// Plant-side perturbations (controller stays nominal).
    void set_plant_kernel(const MorseParams& kernel);
    void set_plant_diffusion_followers(double D_followers);

    const Grid1D& grid() const { return grid_; }
    const TargetDensity& target() const { return target_; }
    const ControlParams& params() const { return params_; }
    double plant_diffusion_followers() const { return D_followers_; }

    /// e = target - rho.
    PeriodicField compute_error(const SwarmState& state) const;

    /// Leader momentum flux w = rho_L u = -K * antiderivative(e)
    /// - rho (f*rho) + D rho_x. Bounded regardless of rho_L; the stepper
    /// differences it directly so no division by rho_L is needed.
    PeriodicField compute_leader_flux(const SwarmState& state) const;

    /// Feedback velocity u = w / rho_L. Throws LeaderDepletion when
    /// min rho_L <= rho_L_floor.
    PeriodicField compute_control_u(const SwarmState& state) const;

    /// Reaction term q = 1/2 [rho_L u]_x + 1/2 [rho* (f*rho)]_x
    /// - D/2 rho*_xx + g with rho* = rho_L - rho_F and the mass-action law
    /// g = K_FL rho_F - K_LF rho_L.
    PeriodicField compute_reaction_q(const SwarmState& state, const PeriodicField& u) const;
    PeriodicField compute_reaction_q_from_flux(const SwarmState& state,
                                               const PeriodicField& w) const;

    /// One forward-Euler step (Jacobi update: all three fields advance from
    /// time-t data). Throws LeaderDepletion/NumericalBlowup per RunParams.
    void step(SwarmState& state, const RunParams& rp) const;

    /// Iterates step() to t_f, recording diagnostics and snapshots; aborts
    /// cleanly with the partial trajectory on any guard.
    Run1DResult run(SwarmState state, const RunParams& rp,
                    const std::function<void(const DiagnosticsRow&)>& on_row = {}) const;

    /// Display u profile: w / rho_L with |rho_L| clamped below by the floor.
    PeriodicField control_u_clamped(const SwarmState& state) const;

private:
    struct StepFields {
        PeriodicField w, q;
        double max_speed = 0.0;
    };
    StepFields assemble(const SwarmState& state) const;
    void advance(SwarmState& state, const StepFields& sf, double dt) const;

    Grid1D grid_;
    TargetDensity target_;
    ControlParams params_;
    ConvolutionPlan conv_ctrl_;
    ConvolutionPlan conv_plant_;
    double D_followers_;
};

} // namespace swarm
