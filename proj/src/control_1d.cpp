#include "swarm/control_1d.hpp"

#include "swarm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace swarm {

PeriodicField SwarmState::rho() const {
    PeriodicField out = rho_L;
    for (int j = 0; j < out.n(); ++j) out.v[j] += rho_F.v[j] + eta_F.v[j];
    return out;
}

Masses masses(const SwarmState& state) {
    return {integrate(state.rho_L), integrate(state.rho_F), integrate(state.eta_F)};
}

SwarmState uniform_state(Grid1D g, double M_L0, double M_F0, double Phi_F) {
    SwarmState s;
    s.rho_L = PeriodicField(g, M_L0 / kTwoPi);
    s.rho_F = PeriodicField(g, M_F0 / kTwoPi);
    s.eta_F = PeriodicField(g, Phi_F / kTwoPi);
    return s;
}

void ControlParams::validate() const {
    if (!(D >= 0.0)) throw ConfigError("D must be >= 0");
    if (!(K > 0.0)) throw ConfigError("K must be > 0");
    if (!(K_FL > 0.0 && K_LF > 0.0)) throw ConfigError("reaction rates must be > 0");
    if (!(Phi_F >= 0.0 && Phi_F < 1.0)) throw ConfigError("Phi_F must lie in [0, 1)");
    if (!(rho_L_floor > 0.0)) throw ConfigError("rho_L_floor must be > 0");
}

void RunParams::validate(Grid1D g, const ControlParams& cp, double D_plant_max) const {
    if (!(dt > 0.0) || !(t_f > 0.0)) throw ConfigError("dt and t_f must be > 0");
    const double Dmax = std::max(cp.D, D_plant_max);
    if (Dmax > 0.0) {
        // exact von Neumann limit: the reference configuration (n = 600,
        // dt = 1e-3, D = 0.05) sits at 0.91 of it, so no safety margin here;
        // the advective bound keeps the cfl_safety factor per step
        const double diff_bound = g.dx * g.dx / (2.0 * Dmax);
        if (dt > diff_bound)
            throw ConfigError("dt = " + std::to_string(dt) + " violates the diffusion bound " +
                              std::to_string(diff_bound));
    }
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::LeaderDepleted: return "leader_depleted";
        case RunStatus::Negativity: return "negativity";
        case RunStatus::Blowup: return "blowup";
        case RunStatus::CflViolation: return "cfl_violation";
    }
    return "unknown";
}

Control1D::Control1D(Grid1D g, TargetDensity target, MorseParams kernel, ControlParams params)
    : grid_(g), target_(std::move(target)), params_(params),
      conv_ctrl_(morse_convolution(kernel, g)), conv_plant_(conv_ctrl_),
      D_followers_(params.D) {
    params_.validate();
    if (!(target_.rho.grid == g)) throw std::invalid_argument("Control1D: target grid mismatch");
}

void Control1D::set_plant_kernel(const MorseParams& kernel) {
    conv_plant_ = morse_convolution(kernel, grid_);
}

void Control1D::set_plant_diffusion_followers(double D_followers) {
    if (!(D_followers >= 0.0)) throw ConfigError("D_followers must be >= 0");
    D_followers_ = D_followers;
}

PeriodicField Control1D::compute_error(const SwarmState& state) const {
    PeriodicField e = target_.rho;
    const PeriodicField rho = state.rho();
    for (int j = 0; j < grid_.n; ++j) e.v[j] -= rho.v[j];
    return e;
}

PeriodicField Control1D::compute_leader_flux(const SwarmState& state) const {
    const PeriodicField rho = state.rho();
    const PeriodicField conv = conv_ctrl_.apply(rho);
    PeriodicField e = target_.rho;
    for (int j = 0; j < grid_.n; ++j) e.v[j] -= rho.v[j];
    const PeriodicField A = antiderivative(e);
    const PeriodicField rho_x = derivative(rho, 1);
    PeriodicField w(grid_);
    for (int j = 0; j < grid_.n; ++j)
        w.v[j] = -params_.K * A.v[j] - rho.v[j] * conv.v[j] + params_.D * rho_x.v[j];
    return w;
}

PeriodicField Control1D::compute_control_u(const SwarmState& state) const {
    const double m = state.rho_L.min();
    if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
    PeriodicField u = compute_leader_flux(state);
    for (int j = 0; j < grid_.n; ++j) u.v[j] /= state.rho_L.v[j];
    return u;
}

PeriodicField Control1D::control_u_clamped(const SwarmState& state) const {
    PeriodicField u = compute_leader_flux(state);
    for (int j = 0; j < grid_.n; ++j) {
        double d = state.rho_L.v[j];
        const double s = d < 0.0 ? -1.0 : 1.0;
        d = s * std::max(std::abs(d), params_.rho_L_floor);
        u.v[j] /= d;
    }
    return u;
}

PeriodicField Control1D::compute_reaction_q_from_flux(const SwarmState& state,
                                                      const PeriodicField& w) const {
    const PeriodicField rho = state.rho();
    const PeriodicField conv = conv_ctrl_.apply(rho);
    PeriodicField rho_star(grid_);
    for (int j = 0; j < grid_.n; ++j) rho_star.v[j] = state.rho_L.v[j] - state.rho_F.v[j];
    PeriodicField star_flux(grid_);
    for (int j = 0; j < grid_.n; ++j) star_flux.v[j] = rho_star.v[j] * conv.v[j];
    const PeriodicField w_x = derivative(w, 1);
    const PeriodicField sf_x = derivative(star_flux, 1);
    const PeriodicField star_xx = derivative(rho_star, 2);
    PeriodicField q(grid_);
    for (int j = 0; j < grid_.n; ++j) {
        const double g = params_.K_FL * state.rho_F.v[j] - params_.K_LF * state.rho_L.v[j];
        q.v[j] = 0.5 * w_x.v[j] + 0.5 * sf_x.v[j] - 0.5 * params_.D * star_xx.v[j] + g;
    }
    return q;
}

PeriodicField Control1D::compute_reaction_q(const SwarmState& state, const PeriodicField& u) const {
    PeriodicField w(grid_);
    for (int j = 0; j < grid_.n; ++j) w.v[j] = state.rho_L.v[j] * u.v[j];
    return compute_reaction_q_from_flux(state, w);
}

Control1D::StepFields Control1D::assemble(const SwarmState& state) const {
    StepFields sf{params_.control_enabled ? compute_leader_flux(state) : PeriodicField(grid_),
                  PeriodicField(grid_), 0.0};
    if (params_.control_enabled) sf.q = compute_reaction_q_from_flux(state, sf.w);
    const PeriodicField conv_plant = conv_plant_.apply(state.rho());
    double vmax = 0.0;
    for (double c : conv_plant.v) vmax = std::max(vmax, std::abs(c));
    sf.max_speed = vmax;
    return sf;
}

void Control1D::advance(SwarmState& state, const StepFields& sf, double dt) const {
    const PeriodicField rho = state.rho();
    const PeriodicField conv = conv_plant_.apply(rho);
    const int n = grid_.n;
    auto advect = [&](const PeriodicField& f) {
        PeriodicField flux(grid_);
        for (int j = 0; j < n; ++j) flux.v[j] = f.v[j] * conv.v[j];
        return derivative(flux, 1);
    };
    const PeriodicField w_x = derivative(sf.w, 1);
    const PeriodicField aL = advect(state.rho_L);
    const PeriodicField aF = advect(state.rho_F);
    const PeriodicField aE = advect(state.eta_F);
    const PeriodicField dL = derivative(state.rho_L, 2);
    const PeriodicField dF = derivative(state.rho_F, 2);
    const PeriodicField dE = derivative(state.eta_F, 2);
    for (int j = 0; j < n; ++j) {
        state.rho_L.v[j] += dt * (-w_x.v[j] - aL.v[j] + params_.D * dL.v[j] + sf.q.v[j]);
        state.rho_F.v[j] += dt * (-aF.v[j] + D_followers_ * dF.v[j] - sf.q.v[j]);
        state.eta_F.v[j] += dt * (-aE.v[j] + D_followers_ * dE.v[j]);
    }
    state.t += dt;
}

void Control1D::step(SwarmState& state, const RunParams& rp) const {
    if (rp.halt_on_leader_depletion) {
        const double m = state.rho_L.min();
        if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
    }
    StepFields sf = assemble(state);
    advance(state, sf, rp.dt);
    const double lo = std::min({state.rho_L.min(), state.rho_F.min(), state.eta_F.min()});
    const double hi = std::max({std::abs(state.rho_L.max()), std::abs(state.rho_F.max()),
                                std::abs(state.eta_F.max()), std::abs(lo)});
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi > rp.blowup_abort)
        throw NumericalBlowup("field magnitude exceeded blow-up guard at t = " +
                              std::to_string(state.t));
    if (lo < -rp.negativity_abort)
        throw NumericalBlowup("field dropped below negativity guard at t = " +
                              std::to_string(state.t));
}

Run1DResult Control1D::run(SwarmState state, const RunParams& rp,
                           const std::function<void(const DiagnosticsRow&)>& on_row) const {
    rp.validate(grid_, params_, std::max(params_.D, D_followers_));
    Run1DResult res;
    res.min_rho_L = state.rho_L.min();
    res.min_field = std::min({state.rho_L.min(), state.rho_F.min(), state.eta_F.min()});
    const long long nsteps = std::llround(rp.t_f / rp.dt);

    std::vector<double> snap_times = rp.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;

    auto record = [&](const SwarmState& s) {
        const PeriodicField rho = s.rho();
        DiagnosticsRow row;
        row.t = s.t;
        row.D_KL = kl_divergence(rho, target_.rho);
        const Masses m = masses(s);
        row.M_L = m.M_L;
        row.M_F = m.M_F;
        row.Phi_F_obs = m.Phi_F_obs;
        row.err_L2 = l2_error(rho, target_.rho);
        const double lo = std::min({s.rho_L.min(), s.rho_F.min(), s.eta_F.min()});
        if (lo < -1e-9) row.flags |= kFlagNegativity;
        if (s.rho_L.min() <= params_.rho_L_floor) row.flags |= kFlagLeaderFloor;
        res.rows.push_back(row);
        if (on_row) on_row(row);
    };
    auto take_snapshot = [&](const SwarmState& s) {
        Snapshot snap{s, control_u_clamped(s), PeriodicField(grid_)};
        snap.q = compute_reaction_q_from_flux(s, compute_leader_flux(s));
        res.snapshots.emplace(s.t, std::move(snap));
    };

    record(state);
    for (long long i = 0; i < nsteps; ++i) {
        try {
            if (rp.halt_on_leader_depletion) {
                const double m = state.rho_L.min();
                if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
            }
            StepFields sf = assemble(state);
            if (sf.max_speed > 0.0 && rp.dt > rp.cfl_safety * grid_.dx / sf.max_speed) {
                res.status = RunStatus::CflViolation;
                res.message = "advective CFL bound violated at t = " + std::to_string(state.t);
                break;
            }
            advance(state, sf, rp.dt);
        } catch (const LeaderDepletion& e) {
            res.status = RunStatus::LeaderDepleted;
            res.message = e.what();
            break;
        }
        res.min_rho_L = std::min(res.min_rho_L, state.rho_L.min());
        const double lo = std::min({state.rho_L.min(), state.rho_F.min(), state.eta_F.min()});
        res.min_field = std::min(res.min_field, lo);
        const double hi = std::max({std::abs(state.rho_L.max()), std::abs(state.rho_F.max()),
                                    std::abs(state.eta_F.max()), std::abs(lo)});
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi > rp.blowup_abort) {
            res.status = RunStatus::Blowup;
            res.message = "field magnitude exceeded blow-up guard at t = " + std::to_string(state.t);
            break;
        }
        if (lo < -rp.negativity_abort) {
            res.status = RunStatus::Negativity;
            res.message = "field dropped below negativity guard at t = " + std::to_string(state.t);
            break;
        }
        if ((i + 1) % rp.record_every == 0 || i + 1 == nsteps) record(state);
        while (next_snap < snap_times.size() && state.t >= snap_times[next_snap] - 0.5 * rp.dt) {
            take_snapshot(state);
            ++next_snap;
        }
    }
    if (res.status != RunStatus::Completed && (res.rows.empty() || res.rows.back().t < state.t))
        record(state);
    res.t_end = state.t;
    return res;
}

} // namespace swarm
