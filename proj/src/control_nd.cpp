#include "swarm/control_nd.hpp"

#include "swarm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace swarm {

PeriodicFieldND SwarmStateND::rho() const {
    PeriodicFieldND out = rho_L;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += rho_F.v[i] + eta_F.v[i];
    return out;
}

Masses masses(const SwarmStateND& state) {
    return {integrate(state.rho_L), integrate(state.rho_F), integrate(state.eta_F)};
}

SwarmStateND uniform_state_nd(GridND g, double M_L0, double M_F0, double Phi_F) {
    double vol = 1.0;
    for (int a = 0; a < g.rank; ++a) vol *= kTwoPi;
    SwarmStateND s;
    s.rho_L = PeriodicFieldND(g, M_L0 / vol);
    s.rho_F = PeriodicFieldND(g, M_F0 / vol);
    s.eta_F = PeriodicFieldND(g, Phi_F / vol);
    return s;
}

ControlND::ControlND(GridND g, TargetDensityND target, SeparableMorseKernel kernel,
                     ControlParams params)
    : grid_(g), target_(std::move(target)), kernel_(std::move(kernel)), params_(params) {
    params_.validate();
    if (!(target_.rho.grid == g) || !(kernel_.grid() == g))
        throw std::invalid_argument("ControlND: grid mismatch");
}

PeriodicFieldND ControlND::compute_forcing_Y(const SwarmStateND& state) const {
    const PeriodicFieldND rho = state.rho();
    const VectorFieldND conv = kernel_.convolve(rho);
    VectorFieldND flux;
    flux.reserve(grid_.rank);
    for (int a = 0; a < grid_.rank; ++a) {
        PeriodicFieldND fa(grid_);
        for (std::size_t i = 0; i < fa.v.size(); ++i) fa.v[i] = rho.v[i] * conv[a].v[i];
        flux.push_back(std::move(fa));
    }
    const PeriodicFieldND div_flux = divergence_fd(flux);
    const PeriodicFieldND lap = laplacian_fd(rho);
    PeriodicFieldND Y(grid_);
    for (std::size_t i = 0; i < Y.v.size(); ++i) {
        const double e = target_.rho.v[i] - rho.v[i];
        Y.v[i] = -params_.K * e - div_flux.v[i] + params_.D * lap.v[i];
    }
    const double mean = integrate(Y) / std::pow(kTwoPi, grid_.rank);
    for (double& v : Y.v) v -= mean;
    return Y;
}

VectorFieldND ControlND::compute_leader_flux_nd(const SwarmStateND& state) const {
    return poisson_solve_nd(compute_forcing_Y(state)).w;
}

VectorFieldND ControlND::compute_control_u_nd(const SwarmStateND& state) const {
    const double m = state.rho_L.min();
    if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
    VectorFieldND u = compute_leader_flux_nd(state);
    for (int a = 0; a < grid_.rank; ++a)
        for (std::size_t i = 0; i < u[a].v.size(); ++i) u[a].v[i] /= state.rho_L.v[i];
    return u;
}

PeriodicFieldND ControlND::compute_reaction_q_from_flux_nd(const SwarmStateND& state,
                                                           const VectorFieldND& w) const {
    const PeriodicFieldND rho = state.rho();
    const VectorFieldND conv = kernel_.convolve(rho);
    PeriodicFieldND rho_star(grid_);
    for (std::size_t i = 0; i < rho_star.v.size(); ++i)
        rho_star.v[i] = state.rho_L.v[i] - state.rho_F.v[i];
    VectorFieldND star_flux;
    star_flux.reserve(grid_.rank);
    for (int a = 0; a < grid_.rank; ++a) {
        PeriodicFieldND fa(grid_);
        for (std::size_t i = 0; i < fa.v.size(); ++i) fa.v[i] = rho_star.v[i] * conv[a].v[i];
        star_flux.push_back(std::move(fa));
    }
    const PeriodicFieldND div_w = divergence_fd(w);
    const PeriodicFieldND div_star = divergence_fd(star_flux);
    const PeriodicFieldND lap_star = laplacian_fd(rho_star);
    PeriodicFieldND q(grid_);
    for (std::size_t i = 0; i < q.v.size(); ++i) {
        const double g = params_.K_FL * state.rho_F.v[i] - params_.K_LF * state.rho_L.v[i];
        q.v[i] = 0.5 * div_w.v[i] + 0.5 * div_star.v[i] - 0.5 * params_.D * lap_star.v[i] + g;
    }
    return q;
}

PeriodicFieldND ControlND::compute_reaction_q_nd(const SwarmStateND& state,
                                                 const VectorFieldND& u) const {
    VectorFieldND w;
    w.reserve(grid_.rank);
    for (int a = 0; a < grid_.rank; ++a) {
        PeriodicFieldND wa(grid_);
        for (std::size_t i = 0; i < wa.v.size(); ++i) wa.v[i] = state.rho_L.v[i] * u[a].v[i];
        w.push_back(std::move(wa));
    }
    return compute_reaction_q_from_flux_nd(state, w);
}

ControlND::StepFields ControlND::assemble(const SwarmStateND& state, bool want_curl) const {
    StepFields sf;
    if (params_.control_enabled) {
        sf.w = compute_leader_flux_nd(state);
        sf.q = compute_reaction_q_from_flux_nd(state, sf.w);
    } else {
        sf.w.assign(grid_.rank, PeriodicFieldND(grid_));
        sf.q = PeriodicFieldND(grid_);
    }
    const PeriodicFieldND rho = state.rho();
    const VectorFieldND conv = kernel_.convolve(rho);
    double vmax = 0.0;
    for (int a = 0; a < grid_.rank; ++a)
        for (double c : conv[a].v) vmax = std::max(vmax, std::abs(c));
    sf.max_speed = vmax;
    if (want_curl) {
        const PeriodicFieldND curl = spectral_curl(sf.w);
        for (double c : curl.v) sf.curl_inf = std::max(sf.curl_inf, std::abs(c));
    }
    return sf;
}

void ControlND::advance(SwarmStateND& state, const StepFields& sf, double dt) const {
    const PeriodicFieldND rho = state.rho();
    const VectorFieldND conv = kernel_.convolve(rho);
    auto advect = [&](const PeriodicFieldND& f) {
        VectorFieldND flux;
        flux.reserve(grid_.rank);
        for (int a = 0; a < grid_.rank; ++a) {
            PeriodicFieldND fa(grid_);
            for (std::size_t i = 0; i < fa.v.size(); ++i) fa.v[i] = f.v[i] * conv[a].v[i];
            flux.push_back(std::move(fa));
        }
        return divergence_fd(flux);
    };
    const PeriodicFieldND div_w = divergence_fd(sf.w);
    const PeriodicFieldND aL = advect(state.rho_L);
    const PeriodicFieldND aF = advect(state.rho_F);
    const PeriodicFieldND aE = advect(state.eta_F);
    const PeriodicFieldND dL = laplacian_fd(state.rho_L);
    const PeriodicFieldND dF = laplacian_fd(state.rho_F);
    const PeriodicFieldND dE = laplacian_fd(state.eta_F);
    for (std::size_t i = 0; i < rho.v.size(); ++i) {
        state.rho_L.v[i] += dt * (-div_w.v[i] - aL.v[i] + params_.D * dL.v[i] + sf.q.v[i]);
        state.rho_F.v[i] += dt * (-aF.v[i] + params_.D * dF.v[i] - sf.q.v[i]);
        state.eta_F.v[i] += dt * (-aE.v[i] + params_.D * dE.v[i]);
    }
    state.t += dt;
}

void ControlND::step_nd(SwarmStateND& state, const RunParams& rp) const {
    if (rp.halt_on_leader_depletion) {
        const double m = state.rho_L.min();
        if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
    }
    StepFields sf = assemble(state, false);
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

RunNDResult ControlND::run_nd(SwarmStateND state, const RunParams& rp,
                              const std::function<void(const DiagnosticsRow&)>& on_row) const {
    // nD diffusion limit dt <= dx^2 / (2 d D); advection keeps cfl_safety
    {
        double dxmin = grid_.dx[0];
        for (int a = 1; a < grid_.rank; ++a) dxmin = std::min(dxmin, grid_.dx[a]);
        if (params_.D > 0.0) {
            const double bound = dxmin * dxmin / (2.0 * grid_.rank * params_.D);
            if (rp.dt > bound)
                throw ConfigError("dt violates the nD diffusion bound " + std::to_string(bound));
        }
    }
    RunNDResult res;
    res.min_rho_L = state.rho_L.min();
    const long long nsteps = std::llround(rp.t_f / rp.dt);
    std::vector<double> snap_times = rp.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;

    auto record = [&](const SwarmStateND& s, double curl_inf) {
        const PeriodicFieldND rho = s.rho();
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
        res.max_curl = std::max(res.max_curl, curl_inf);
        if (on_row) on_row(row);
    };

    record(state, 0.0);
    for (long long i = 0; i < nsteps; ++i) {
        const bool recording = (i + 1) % rp.record_every == 0 || i + 1 == nsteps;
        try {
            if (rp.halt_on_leader_depletion) {
                const double m = state.rho_L.min();
                if (m <= params_.rho_L_floor) throw LeaderDepletion(m, state.t);
            }
            StepFields sf = assemble(state, recording);
            double dxmin = grid_.dx[0];
            for (int a = 1; a < grid_.rank; ++a) dxmin = std::min(dxmin, grid_.dx[a]);
            if (sf.max_speed > 0.0 && rp.dt > rp.cfl_safety * dxmin / sf.max_speed) {
                res.status = RunStatus::CflViolation;
                res.message = "advective CFL bound violated at t = " + std::to_string(state.t);
                break;
            }
            advance(state, sf, rp.dt);
            if (recording) record(state, sf.curl_inf);
        } catch (const LeaderDepletion& e) {
            res.status = RunStatus::LeaderDepleted;
            res.message = e.what();
            break;
        }
        res.min_rho_L = std::min(res.min_rho_L, state.rho_L.min());
        const double lo = std::min({state.rho_L.min(), state.rho_F.min(), state.eta_F.min()});
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
        while (next_snap < snap_times.size() && state.t >= snap_times[next_snap] - 0.5 * rp.dt) {
            res.snapshots.emplace(state.t, state);
            ++next_snap;
        }
    }
    if (res.status != RunStatus::Completed && (res.rows.empty() || res.rows.back().t < state.t))
        record(state, 0.0);
    res.t_end = state.t;
    return res;
}

} // namespace swarm
