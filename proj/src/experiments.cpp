#include "swarm/experiments.hpp"

#include "swarm/errors.hpp"
#include "swarm/fft.hpp"

#include <json.hpp>

#include <atomic>
#include <mutex>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace swarm {
namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

void run_parallel(int jobs, int count, const std::function<void(int)>& work) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Continuum1D: return "continuum_1d";
        case ExperimentKind::ContinuumND: return "continuum_nd";
        case ExperimentKind::Abm: return "abm";
        case ExperimentKind::Feasibility: return "feasibility";
        case ExperimentKind::RobustnessSweep: return "robustness_sweep";
        case ExperimentKind::PoissonCheck: return "poisson_check";
    }
    return "unknown";
}

TargetDensity ExperimentSpec::make_target_1d(Grid1D g) const {
    switch (target_kind) {
        case TargetKind::Uniform: return uniform_target(g);
        case TargetKind::Monomodal: return von_mises({target_mu.at(0), target_k.at(0)}, g);
        case TargetKind::Bimodal:
            return bimodal_von_mises(target_mu.at(0), target_mu.at(1), target_k.at(0), g);
        default: throw ConfigError("unsupported 1D target kind");
    }
}

TargetDensityND ExperimentSpec::make_target_nd(GridND g) const {
    std::vector<VonMisesParams> per_axis;
    for (int a = 0; a < g.rank; ++a)
        per_axis.push_back({target_mu.at(target_mu.size() == 1 ? 0 : a),
                            target_k.at(target_k.size() == 1 ? 0 : a)});
    return von_mises_nd(per_axis, g);
}

MorseParams ExperimentSpec::plant_kernel() const {
    MorseParams p = kernel;
    p.L_a *= sweep.L_a_factor;
    p.L_r *= sweep.L_r_factor;
    return p;
}

ExperimentSpec parse_experiment(const config::File& file) {
    config::Reader r(file);
    ExperimentSpec spec;
    spec.config_text = file.raw_text;

    const std::string kind = r.str("", "kind");
    if (kind == "continuum_1d") spec.kind = ExperimentKind::Continuum1D;
    else if (kind == "continuum_nd") spec.kind = ExperimentKind::ContinuumND;
    else if (kind == "abm") spec.kind = ExperimentKind::Abm;
    else if (kind == "feasibility") spec.kind = ExperimentKind::Feasibility;
    else if (kind == "robustness_sweep") spec.kind = ExperimentKind::RobustnessSweep;
    else if (kind == "poisson_check") spec.kind = ExperimentKind::PoissonCheck;
    else throw ConfigError("unknown experiment kind: " + kind);

    for (double v : r.list_or("domain", "n", {600}))
        spec.n.push_back(static_cast<int>(v));

    spec.seed = static_cast<std::uint64_t>(r.integer_or("run", "seed", 1));

    if (spec.kind != ExperimentKind::PoissonCheck) {
        spec.control.D = r.number("model", "D");
        spec.control.K = r.number("model", "K");
        spec.control.K_FL = r.number_or("model", "K_FL", 1.0);
        spec.control.K_LF = r.number_or("model", "K_LF", 2.0);
        spec.control.Phi_F = r.number("model", "Phi_F");
        spec.control.rho_L_floor = r.number_or("model", "rho_L_floor", 1e-8);
        spec.control.control_enabled = r.flag_or("model", "control_enabled", true);
        spec.M_L0 = r.number_or("model", "M_L0", spec.control.p() / 2);
        spec.M_F0 = r.number_or("model", "M_F0", spec.control.p() / 2);

        spec.kernel.L_a = r.number("kernel", "L_a");
        spec.kernel.L_r = r.number("kernel", "L_r");
        spec.kernel.alpha = r.number("kernel", "alpha");
        spec.kernel.strength = r.number_or("kernel", "strength", 1.0);
        spec.kernel.validate();

        const std::string tt = r.str("target", "type");
        if (tt == "uniform") {
            spec.target_kind = TargetKind::Uniform;
        } else if (tt == "von_mises") {
            spec.target_kind = TargetKind::Monomodal;
            spec.target_mu = r.list_or("target", "mu", {0.0});
            spec.target_k = r.list("target", "k");
        } else if (tt == "bimodal") {
            spec.target_kind = TargetKind::Bimodal;
            spec.target_mu = {r.number("target", "mu1"), r.number("target", "mu2")};
            spec.target_k = r.list("target", "k");
        } else {
            throw ConfigError("unknown target type: " + tt);
        }

        spec.run.dt = r.number("time", "dt");
        spec.run.t_f = r.number("time", "t_f");
        spec.run.record_every = static_cast<int>(r.integer_or("time", "record_every", 10));
        spec.run.snapshot_times = r.list_or("time", "snapshots", {});
        spec.run.halt_on_leader_depletion = r.flag_or("run", "halt_on_leader_depletion", true);
        spec.run.negativity_abort = r.number_or("run", "negativity_abort", 0.05);
        spec.run.blowup_abort = r.number_or("run", "blowup_abort", 1e6);
        spec.run.cfl_safety = r.number_or("run", "cfl_safety", 0.5);
    }

    if (spec.kind == ExperimentKind::Abm) {
        spec.abm.n_leaders0 = static_cast<int>(r.integer("abm", "N_leaders"));
        spec.abm.n_plastic_followers0 = static_cast<int>(r.integer("abm", "N_plastic_followers"));
        spec.abm.n_nonplastic = static_cast<int>(r.integer("abm", "N_nonplastic"));
        spec.abm.bandwidth = r.number_or("abm", "bandwidth", 0.1);
        spec.abm.eps_density = r.number_or("abm", "eps_density", 1e-6);
        spec.abm_seeds = static_cast<int>(r.integer_or("abm", "seeds", 50));
        spec.abm.dt = spec.run.dt;
        spec.abm.t_f = spec.run.t_f;
        spec.abm.record_every = std::max(1, spec.run.record_every);
        spec.abm.seed = spec.seed;
    }

    if (spec.kind == ExperimentKind::RobustnessSweep) {
        spec.sweep.p_values = r.list("sweep", "p_values");
        const std::string pk = r.str_or("sweep", "perturbation", "none");
        if (pk == "none") spec.sweep.perturbation = PerturbationKind::None;
        else if (pk == "diffusion") spec.sweep.perturbation = PerturbationKind::Diffusion;
        else if (pk == "kernel") spec.sweep.perturbation = PerturbationKind::Kernel;
        else throw ConfigError("unknown perturbation kind: " + pk);
        spec.sweep.D_follower_factor = r.number_or("sweep", "D_follower_factor", 2.0);
        spec.sweep.L_a_factor = r.number_or("sweep", "L_a_factor", 0.8);
        spec.sweep.L_r_factor = r.number_or("sweep", "L_r_factor", 1.2);
        spec.sweep.leader_mass = r.number_or("sweep", "leader_mass", 0.04);
        spec.sweep.r_hat = r.number_or("sweep", "r_hat", 0.5);
        spec.sweep.rate_scale = r.number_or("sweep", "rate_scale", 2.0);
    }

    r.finish();
    if (spec.kind != ExperimentKind::PoissonCheck) spec.control.validate();
    return spec;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, const std::string& preamble) {
    std::ofstream out(path, std::ios::binary); // LF line endings on all platforms
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (!preamble.empty()) out << preamble << "\n";
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << fmt_double(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

namespace {

std::vector<std::vector<double>> diagnostics_rows(const std::vector<DiagnosticsRow>& rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({r.t, r.D_KL, r.M_L, r.M_F, r.err_L2, static_cast<double>(r.flags)});
    return out;
}

const std::vector<std::string> kTimeseriesHeader = {"t", "D_KL", "M_L", "M_F", "err_L2", "flags"};

PeriodicField shift_renormalize(const PeriodicField& f, double mass) {
    // Theorem-2 profiles below threshold are negative in places; translate
    // upwards to become non-negative and re-normalize to the predefined mass.
    PeriodicField out = f;
    const double m = out.min();
    if (m < 0.0)
        for (double& v : out.v) v -= m;
    const double total = integrate(out);
    if (total > 0.0)
        for (double& v : out.v) v *= mass / total;
    return out;
}

nlohmann::json manifest_base(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["kind"] = to_string(spec.kind);
    j["config_text"] = spec.config_text;
    j["config_fnv1a"] = config::fnv1a_hex(spec.config_text);
    return j;
}

void write_manifest(const std::filesystem::path& out_dir, nlohmann::json j, double wall_seconds,
                    const ExperimentResultInfo& info) {
    j["status"] = info.status;
    j["exit_code"] = info.exit_code;
    j["files"] = info.files;
    j["wall_clock_seconds"] = wall_seconds;
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

ExperimentResultInfo run_continuum_1d(const ExperimentSpec& spec,
                                      const std::filesystem::path& out_dir, nlohmann::json& man) {
    const Grid1D g = Grid1D::make(spec.n.at(0));
    const TargetDensity target = spec.make_target_1d(g);
    Control1D ctrl(g, target, spec.kernel, spec.control);
    const SwarmState init = uniform_state(g, spec.M_L0, spec.M_F0, spec.control.Phi_F);
    const Run1DResult res = ctrl.run(init, spec.run);

    ExperimentResultInfo info;
    write_csv(out_dir / "timeseries.csv", kTimeseriesHeader, diagnostics_rows(res.rows));
    info.files.push_back("timeseries.csv");
    for (const auto& [t, snap] : res.snapshots) {
        const std::string name = "snapshot_t" + fmt_time_label(t) + ".csv";
        std::vector<std::vector<double>> rows;
        const PeriodicField rho = snap.state.rho();
        for (int j = 0; j < g.n; ++j)
            rows.push_back({g.x(j), rho.v[j], snap.state.rho_L.v[j], snap.state.rho_F.v[j],
                            snap.state.eta_F.v[j], snap.u.v[j], snap.q.v[j]});
        write_csv(out_dir / name, {"x", "rho", "rho_L", "rho_F", "eta_F", "u", "q"}, rows);
        info.files.push_back(name);
    }
    const auto& last = res.rows.back();
    man["results"] = {{"t_end", res.t_end},
                      {"D_KL_ss", last.D_KL},
                      {"M_L_ss", last.M_L},
                      {"M_F_ss", last.M_F},
                      {"mass_ratio_ss", last.M_F > 0 ? last.M_L / last.M_F : 0.0},
                      {"min_rho_L", res.min_rho_L},
                      {"run_status", to_string(res.status)}};
    info.status = to_string(res.status);
    info.exit_code = res.status == RunStatus::Completed ? 0 : 3;
    std::ostringstream ss;
    ss << "continuum 1D run " << to_string(res.status) << " at t = " << res.t_end
       << ", D_KL(t_f) = " << last.D_KL << ", M_L/M_F = "
       << (last.M_F > 0 ? last.M_L / last.M_F : 0.0);
    info.summary = ss.str();
    return info;
}

ExperimentResultInfo run_continuum_nd(const ExperimentSpec& spec,
                                      const std::filesystem::path& out_dir, nlohmann::json& man) {
    const GridND g = GridND::make(spec.n);
    const TargetDensityND target = spec.make_target_nd(g);
    std::vector<MorseParams> per_axis(g.rank, spec.kernel);
    SeparableMorseKernel kernel(per_axis, g);
    ControlND ctrl(g, target, std::move(kernel), spec.control);
    const SwarmStateND init = uniform_state_nd(g, spec.M_L0, spec.M_F0, spec.control.Phi_F);
    const RunNDResult res = ctrl.run_nd(init, spec.run);

    ExperimentResultInfo info;
    write_csv(out_dir / "timeseries.csv", kTimeseriesHeader, diagnostics_rows(res.rows));
    info.files.push_back("timeseries.csv");
    for (const auto& [t, state] : res.snapshots) {
        const std::string name = "snapshot_t" + fmt_time_label(t) + ".csv";
        std::ostringstream pre;
        pre << "# axes:";
        for (int a = 0; a < g.rank; ++a) pre << " n" << a + 1 << "=" << g.n[a];
        pre << " row-major";
        const VectorFieldND w = ctrl.compute_leader_flux_nd(state);
        const PeriodicFieldND q = ctrl.compute_reaction_q_from_flux_nd(state, w);
        const PeriodicFieldND rho = state.rho();
        std::vector<std::vector<double>> rows;
        rows.reserve(g.size());
        const int n2 = g.rank > 2 ? g.n[2] : 1;
        std::size_t flat = 0;
        for (int i0 = 0; i0 < g.n[0]; ++i0)
            for (int i1 = 0; i1 < g.n[1]; ++i1)
                for (int i2 = 0; i2 < n2; ++i2, ++flat) {
                    std::vector<double> row{g.x(0, i0), g.x(1, i1)};
                    if (g.rank > 2) row.push_back(g.x(2, i2));
                    row.insert(row.end(), {rho.v[flat], state.rho_L.v[flat], state.rho_F.v[flat],
                                           state.eta_F.v[flat]});
                    for (int a = 0; a < g.rank; ++a) {
                        double d = state.rho_L.v[flat];
                        const double s = d < 0.0 ? -1.0 : 1.0;
                        d = s * std::max(std::abs(d), spec.control.rho_L_floor);
                        row.push_back(w[a].v[flat] / d);
                    }
                    row.push_back(q.v[flat]);
                    rows.push_back(std::move(row));
                }
        std::vector<std::string> header{"x", "y"};
        if (g.rank > 2) header.push_back("z");
        header.insert(header.end(), {"rho", "rho_L", "rho_F", "eta_F", "u"});
        header.push_back("u_y");
        if (g.rank > 2) header.push_back("u_z");
        header.push_back("q");
        write_csv(out_dir / name, header, rows, pre.str());
        info.files.push_back(name);
    }
    const auto& last = res.rows.back();
    man["results"] = {{"t_end", res.t_end},
                      {"D_KL_ss", last.D_KL},
                      {"M_L_ss", last.M_L},
                      {"M_F_ss", last.M_F},
                      {"mass_ratio_ss", last.M_F > 0 ? last.M_L / last.M_F : 0.0},
                      {"max_curl", res.max_curl},
                      {"run_status", to_string(res.status)}};
    info.status = to_string(res.status);
    info.exit_code = res.status == RunStatus::Completed ? 0 : 3;
    std::ostringstream ss;
    ss << "continuum " << g.rank << "D run " << to_string(res.status) << " at t = " << res.t_end
       << ", terminal masses (M_L, M_F) = (" << last.M_L << ", " << last.M_F << ")";
    info.summary = ss.str();
    return info;
}

ExperimentResultInfo run_feasibility(const ExperimentSpec& spec,
                                     const std::filesystem::path& out_dir, nlohmann::json& man) {
    const Grid1D g = Grid1D::make(spec.n.at(0));
    const TargetDensity target = spec.make_target_1d(g);
    const SteadyStatePrediction pred =
        predict_steady_profiles(target, spec.kernel, spec.control.D, spec.control.Phi_F,
                                spec.control.K_FL, spec.control.K_LF);
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < g.n; ++j)
        rows.push_back({g.x(j), target.rho.v[j], pred.rho_L_bar.v[j], pred.rho_F_bar.v[j],
                        pred.eta_F_bar.v[j], pred.h.v[j]});
    write_csv(out_dir / "predicted_profiles.csv",
              {"x", "rho_bar", "rho_L_bar", "rho_F_bar", "eta_F_bar", "h"}, rows);
    ExperimentResultInfo info;
    info.files.push_back("predicted_profiles.csv");
    man["results"] = {{"p_hat", pred.p_hat},
                      {"p", spec.control.p()},
                      {"feasible", pred.feasible},
                      {"stability_margin", pred.stability_margin},
                      {"stable", pred.stable},
                      {"M_L_bar", integrate(pred.rho_L_bar)},
                      {"M_F_bar", integrate(pred.rho_F_bar)},
                      {"min_rho_L_bar", pred.min_rho_L_bar},
                      {"argmin_x", pred.argmin_x}};
    info.status = "completed";
    std::ostringstream ss;
    ss << "p_hat = " << pred.p_hat << " (p = " << spec.control.p() << ", "
       << (pred.feasible ? "feasible" : "infeasible") << "), stability margin = "
       << pred.stability_margin << " (" << (pred.stable ? "stable" : "not certified") << ")"
       << ", predicted masses (M_L, M_F) = (" << integrate(pred.rho_L_bar) << ", "
       << integrate(pred.rho_F_bar) << ")";
    info.summary = ss.str();
    return info;
}

ExperimentResultInfo run_poisson_check(const ExperimentSpec& spec,
                                       const std::filesystem::path& out_dir, nlohmann::json& man) {
    const GridND g = GridND::make(spec.n);
    // manufactured solution phi* = cos(x1) cos(x2) [cos(x3)]
    PeriodicFieldND phi_star(g);
    PeriodicFieldND Y(g);
    const int n2 = g.rank > 2 ? g.n[2] : 1;
    std::size_t flat = 0;
    for (int i0 = 0; i0 < g.n[0]; ++i0)
        for (int i1 = 0; i1 < g.n[1]; ++i1)
            for (int i2 = 0; i2 < n2; ++i2, ++flat) {
                double p = std::cos(g.x(0, i0)) * std::cos(g.x(1, i1));
                if (g.rank > 2) p *= std::cos(g.x(2, i2));
                phi_star.v[flat] = p;
                Y.v[flat] = g.rank * p; // -lap(phi*) = d * phi*
            }
    const PoissonSolution mans = poisson_solve_nd(Y);
    double manufactured = 0.0;
    for (std::size_t i = 0; i < phi_star.v.size(); ++i)
        manufactured = std::max(manufactured, std::abs(mans.phi.v[i] - phi_star.v[i]));

    // random smooth zero-mean forcing: divergence/curl round trip
    RngStream rng(spec.seed);
    PeriodicFieldND Yr(g);
    for (std::size_t i = 0; i < Yr.v.size(); ++i)
        Yr.v[i] = rng.normal(0, static_cast<std::uint32_t>(i), 0);
    // smooth by a few diffusion applications of the spectral filter
    {
        auto F = std::vector<std::complex<double>>(fft::spectral_size(g.n.data(), g.rank));
        fft::rfftn(Yr.v.data(), F.data(), g.n.data(), g.rank);
        // Gaussian low-pass; also kill the mean
        const int n0 = g.n[0], n1v = g.n[1];
        const int nlast = g.n[g.rank - 1] / 2 + 1;
        std::size_t fl = 0;
        if (g.rank == 2) {
            for (int i0 = 0; i0 < n0; ++i0)
                for (int i1 = 0; i1 < nlast; ++i1, ++fl) {
                    const int k0 = i0 <= n0 / 2 ? i0 : i0 - n0;
                    const double k2 = static_cast<double>(k0) * k0 + static_cast<double>(i1) * i1;
                    F[fl] *= std::exp(-0.15 * k2);
                }
        } else {
            for (int i0 = 0; i0 < n0; ++i0)
                for (int i1 = 0; i1 < n1v; ++i1)
                    for (int i2 = 0; i2 < nlast; ++i2, ++fl) {
                        const int k0 = i0 <= n0 / 2 ? i0 : i0 - n0;
                        const int k1 = i1 <= n1v / 2 ? i1 : i1 - n1v;
                        const double k2 = static_cast<double>(k0) * k0 +
                                          static_cast<double>(k1) * k1 +
                                          static_cast<double>(i2) * i2;
                        F[fl] *= std::exp(-0.15 * k2);
                    }
        }
        F[0] = 0.0;
        fft::irfftn(F.data(), Yr.v.data(), g.n.data(), g.rank);
    }
    const PoissonSolution rs = poisson_solve_nd(Yr);
    const PeriodicFieldND div = spectral_divergence(rs.w);
    double div_err = 0.0;
    for (std::size_t i = 0; i < div.v.size(); ++i)
        div_err = std::max(div_err, std::abs(div.v[i] - Yr.v[i]));
    const PeriodicFieldND curl = spectral_curl(rs.w);
    double curl_err = 0.0;
    for (double c : curl.v) curl_err = std::max(curl_err, std::abs(c));

    write_csv(out_dir / "poisson_check.csv",
              {"manufactured_linf", "div_roundtrip_linf", "curl_linf"},
              {{manufactured, div_err, curl_err}});
    ExperimentResultInfo info;
    info.files.push_back("poisson_check.csv");
    man["results"] = {{"manufactured_linf", manufactured},
                      {"div_roundtrip_linf", div_err},
                      {"curl_linf", curl_err}};
    info.status = "completed";
    std::ostringstream ss;
    ss << "poisson check: manufactured " << manufactured << ", divergence round-trip " << div_err
       << ", curl " << curl_err;
    info.summary = ss.str();
    return info;
}

} // namespace

SweepResult run_robustness_sweep(const ExperimentSpec& spec, int jobs) {
    const Grid1D g = Grid1D::make(spec.n.at(0));
    const TargetDensity target = spec.make_target_1d(g);
    SweepResult out;
    out.p_hat = compute_p_hat(target, spec.kernel, spec.control.D);
    out.points.resize(spec.sweep.p_values.size());

    run_parallel(jobs, static_cast<int>(spec.sweep.p_values.size()), [&](int i) {
        const double p = spec.sweep.p_values[i];
        SweepPointResult& pt = out.points[i];
        pt.p = p;
        try {
            double r_hat;
            if (spec.sweep.perturbation == PerturbationKind::Diffusion) {
                // rebalance rates so the steady leader mass stays constant
                // across p (keeps the follower-side perturbation amplitude fixed)
                if (p <= spec.sweep.leader_mass)
                    throw ConfigError("p <= target leader mass; rates undefined");
                r_hat = spec.sweep.leader_mass / (p - spec.sweep.leader_mass);
            } else {
                r_hat = spec.sweep.r_hat;
            }
            const auto [K_FL, K_LF] = select_rates(r_hat, spec.sweep.rate_scale);
            ControlParams cp = spec.control;
            cp.K_FL = K_FL;
            cp.K_LF = K_LF;
            cp.Phi_F = 1.0 - p;
            const SteadyStatePrediction pred =
                predict_steady_profiles(target, spec.kernel, cp.D, cp.Phi_F, K_FL, K_LF);
            SwarmState init;
            init.rho_L = shift_renormalize(pred.rho_L_bar, integrate(pred.rho_L_bar));
            init.rho_F = shift_renormalize(pred.rho_F_bar, integrate(pred.rho_F_bar));
            init.eta_F = pred.eta_F_bar;
            Control1D ctrl(g, target, spec.kernel, cp);
            if (spec.sweep.perturbation == PerturbationKind::Diffusion)
                ctrl.set_plant_diffusion_followers(cp.D * spec.sweep.D_follower_factor);
            else if (spec.sweep.perturbation == PerturbationKind::Kernel)
                ctrl.set_plant_kernel(spec.plant_kernel());
            RunParams rp = spec.run;
            rp.snapshot_times.clear();
            const Run1DResult res = ctrl.run(init, rp);
            pt.D_KL_ss = res.rows.back().D_KL;
            pt.M_L_ss = res.rows.back().M_L;
            pt.aborted = res.status != RunStatus::Completed;
            pt.abort_t = pt.aborted ? res.t_end : -1.0;
            pt.status = to_string(res.status);
        } catch (const std::exception& e) {
            pt.aborted = true;
            pt.D_KL_ss = std::numeric_limits<double>::quiet_NaN();
            pt.status = std::string("failed: ") + e.what();
        }
    });
    return out;
}

AbmEnsembleResult run_abm_ensemble(const ExperimentSpec& spec, int seeds, int jobs) {
    const Grid1D g = Grid1D::make(spec.n.at(0));
    const TargetDensity target = spec.make_target_1d(g);
    AbmEnsembleResult out;
    out.per_seed.resize(seeds);
    run_parallel(jobs, seeds, [&](int s) {
        AbmParams ap = spec.abm;
        ap.seed = spec.seed + static_cast<std::uint64_t>(s);
        AgentSim sim(g, target, spec.kernel, spec.control, ap);
        out.per_seed[s] = sim.run_abm();
    });
    double sum = 0.0, sum2 = 0.0, rsum = 0.0, rsum2 = 0.0;
    for (const auto& r : out.per_seed) {
        sum += r.D_KL_ss;
        sum2 += r.D_KL_ss * r.D_KL_ss;
        rsum += r.ratio_ss;
        rsum2 += r.ratio_ss * r.ratio_ss;
    }
    const double n = static_cast<double>(seeds);
    out.mean_D_KL_ss = sum / n;
    out.std_D_KL_ss = std::sqrt(std::max(0.0, sum2 / n - out.mean_D_KL_ss * out.mean_D_KL_ss));
    out.mean_ratio = rsum / n;
    out.std_ratio = std::sqrt(std::max(0.0, rsum2 / n - out.mean_ratio * out.mean_ratio));
    return out;
}

ExperimentResultInfo run_experiment(const ExperimentSpec& spec,
                                    const std::filesystem::path& out_dir, int jobs,
                                    std::optional<int> seeds_override) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json man = manifest_base(spec);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResultInfo info;

    switch (spec.kind) {
        case ExperimentKind::Continuum1D:
            info = run_continuum_1d(spec, out_dir, man);
            break;
        case ExperimentKind::ContinuumND:
            info = run_continuum_nd(spec, out_dir, man);
            break;
        case ExperimentKind::Feasibility:
            info = run_feasibility(spec, out_dir, man);
            break;
        case ExperimentKind::PoissonCheck:
            info = run_poisson_check(spec, out_dir, man);
            break;
        case ExperimentKind::RobustnessSweep: {
            const SweepResult res = run_robustness_sweep(spec, jobs);
            std::vector<std::vector<double>> rows;
            for (const auto& pt : res.points)
                rows.push_back({pt.p, pt.D_KL_ss, pt.M_L_ss, pt.aborted ? 1.0 : 0.0, pt.abort_t,
                                res.p_hat});
            write_csv(out_dir / "sweep.csv",
                      {"p", "D_KL_ss", "M_L_ss", "aborted", "abort_t", "p_hat"}, rows);
            info.files.push_back("sweep.csv");
            man["results"] = {{"p_hat", res.p_hat}};
            info.status = "completed";
            std::ostringstream ss;
            ss << "robustness sweep over " << res.points.size() << " values of p; p_hat = "
               << res.p_hat;
            info.summary = ss.str();
            break;
        }
        case ExperimentKind::Abm: {
            const int seeds = seeds_override.value_or(spec.abm_seeds);
            const AbmEnsembleResult res = run_abm_ensemble(spec, seeds, jobs);
            std::vector<std::vector<double>> rows;
            for (int s = 0; s < seeds; ++s) {
                const auto& r = res.per_seed[s];
                rows.push_back({static_cast<double>(spec.seed + s), r.D_KL_ss, r.M_L_ss, r.M_F_ss,
                                r.ratio_ss, static_cast<double>(r.leader_min_count)});
            }
            write_csv(out_dir / "abm_seeds.csv",
                      {"seed", "D_KL_ss", "M_L_ss", "M_F_ss", "ratio", "leader_min_count"}, rows);
            info.files.push_back("abm_seeds.csv");
            std::vector<std::vector<double>> ts;
            for (const auto& row : res.per_seed.front().rows)
                ts.push_back({row.t, row.D_KL, static_cast<double>(row.leaders),
                              static_cast<double>(row.followers)});
            write_csv(out_dir / "abm_timeseries.csv", {"t", "D_KL", "leaders", "followers"}, ts);
            info.files.push_back("abm_timeseries.csv");
            int aborted = 0;
            for (const auto& r : res.per_seed) aborted += r.aborted ? 1 : 0;
            man["results"] = {{"seeds", seeds},
                              {"mean_D_KL_ss", res.mean_D_KL_ss},
                              {"std_D_KL_ss", res.std_D_KL_ss},
                              {"mean_ratio", res.mean_ratio},
                              {"std_ratio", res.std_ratio},
                              {"aborted_runs", aborted}};
            info.status = "completed";
            std::ostringstream ss;
            ss << "abm ensemble over " << seeds << " seeds: D_KL_ss = " << res.mean_D_KL_ss
               << " +/- " << res.std_D_KL_ss << ", mass ratio = " << res.mean_ratio << " +/- "
               << res.std_ratio;
            info.summary = ss.str();
            break;
        }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    info.files.push_back("manifest.json");
    write_manifest(out_dir, std::move(man), wall, info);
    return info;
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------
namespace {

constexpr const char* kPresetBimodal1D = R"(# bimodal regulation, 1D closed loop
kind = continuum_1d

[domain]
n = 600

[model]
D = 0.05
K = 1.0
K_FL = 1.0
K_LF = 2.0
Phi_F = 0.4
M_L0 = 0.3
M_F0 = 0.3

[kernel]
L_a = 3.141592653589793
L_r = 1.5707963267948966
alpha = 2.0

[target]
type = bimodal
mu1 = 1.5707963267948966
mu2 = -1.5707963267948966
k = 3.0

[time]
dt = 0.001
t_f = 15.0
record_every = 10
snapshots = 1,5,15

[run]
seed = 1
# this target sits below the plasticity threshold (p_hat ~ 0.78 > p = 0.6):
# the steady leader profile has small negative dips, so run through them
halt_on_leader_depletion = false
)";

constexpr const char* kPresetAbmEnsemble = R"(# agent-based bimodal regulation, ensemble
kind = abm

[domain]
n = 600

[model]
D = 0.05
K = 1.0
K_FL = 1.0
K_LF = 2.0
Phi_F = 0.4
M_L0 = 0.3
M_F0 = 0.3

[kernel]
L_a = 3.141592653589793
L_r = 1.5707963267948966
alpha = 2.0

[target]
type = bimodal
mu1 = 1.5707963267948966
mu2 = -1.5707963267948966
k = 3.0

[time]
dt = 0.001
t_f = 15.0
record_every = 100

[run]
seed = 1

[abm]
N_leaders = 300
N_plastic_followers = 300
N_nonplastic = 400
bandwidth = 0.1
eps_density = 1e-6
seeds = 50
)";

constexpr const char* kPresetRobustnessDiffusion = R"(# robustness to a follower diffusion perturbation
kind = robustness_sweep

[domain]
n = 600

[model]
D = 0.02
K = 10.0
Phi_F = 0.4
K_FL = 1.0
K_LF = 2.0

[kernel]
L_a = 3.141592653589793
L_r = 0.7853981633974483
alpha = 2.0

[target]
type = von_mises
mu = 0.0
k = 1.0

[time]
dt = 0.001
t_f = 10.0
record_every = 50

[run]
seed = 1

[sweep]
p_values = 0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6
perturbation = diffusion
D_follower_factor = 2.0
leader_mass = 0.04
rate_scale = 2.0
)";

constexpr const char* kPresetRobustnessKernel = R"(# robustness to interaction kernel perturbations
kind = robustness_sweep

[domain]
n = 600

[model]
D = 0.02
K = 10.0
Phi_F = 0.4
K_FL = 1.0
K_LF = 2.0

[kernel]
L_a = 3.141592653589793
L_r = 0.7853981633974483
alpha = 2.0

[target]
type = von_mises
mu = 0.0
k = 1.0

[time]
dt = 0.001
t_f = 10.0
record_every = 50

[run]
seed = 1

[sweep]
p_values = 0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6
perturbation = kernel
L_a_factor = 0.8
L_r_factor = 1.2
r_hat = 0.5
rate_scale = 2.0
)";

constexpr const char* kPresetMonomodal2D = R"(# 2D monomodal regulation
kind = continuum_nd

[domain]
n = 64,64

[model]
D = 0.05
K = 1.0
K_FL = 1.0
K_LF = 2.0
Phi_F = 0.2
M_L0 = 0.4
M_F0 = 0.4

[kernel]
L_a = 3.141592653589793
L_r = 0.7853981633974483
alpha = 3.2

[target]
type = von_mises
mu = 0.0,0.0
k = 1.0,1.0

[time]
dt = 0.01
t_f = 30.0
record_every = 10
snapshots = 30

[run]
seed = 1
# 2D threshold p_hat ~ 0.97 exceeds p = 0.8: mild structural dips, run through
halt_on_leader_depletion = false
)";

constexpr const char* kPresetPoissonCheck = R"(# spectral Poisson recovery checks
kind = poisson_check

[domain]
n = 64,64

[run]
seed = 7
)";

} // namespace

std::vector<std::string> preset_names() {
    return {"bimodal_1d", "abm_ensemble", "robustness_diffusion", "robustness_kernel",
            "monomodal_2d", "poisson_check"};
}

std::string preset_config(const std::string& name) {
    if (name == "bimodal_1d") return kPresetBimodal1D;
    if (name == "abm_ensemble") return kPresetAbmEnsemble;
    if (name == "robustness_diffusion") return kPresetRobustnessDiffusion;
    if (name == "robustness_kernel") return kPresetRobustnessKernel;
    if (name == "monomodal_2d") return kPresetMonomodal2D;
    if (name == "poisson_check") return kPresetPoissonCheck;
    throw ConfigError("unknown preset: " + name);
}

std::string preset_for_figure(const std::string& figure_id) {
    if (figure_id == "4.1") return "bimodal_1d";
    if (figure_id == "4.2a") return "robustness_diffusion";
    if (figure_id == "4.2b") return "robustness_kernel";
    if (figure_id == "5") return "abm_ensemble";
    if (figure_id == "6.3") return "monomodal_2d";
    throw ConfigError("unknown figure id: " + figure_id +
                      " (expected 4.1, 4.2a, 4.2b, 5, or 6.3)");
}

} // namespace swarm
