// Acceptance suite: runs every headline check at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the failure count.

#include "swarm/agents.hpp"
#include "swarm/control_1d.hpp"
#include "swarm/control_nd.hpp"
#include "swarm/experiments.hpp"
#include "swarm/fft.hpp"
#include "swarm/metrics.hpp"
#include "swarm/rng.hpp"
#include "swarm/steady_state.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace swarm;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> check;
};

int g_failures = 0;

void run_criterion(const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = c.check(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %-28s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), secs, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// --- shared reference configurations -------------------------------------

const MorseParams kBimodalKernel{M_PI, M_PI / 2, 2.0};
const MorseParams kExampleKernel{M_PI, M_PI / 6, 2.0};

ControlParams bimodal_params() {
    ControlParams cp;
    cp.D = 0.05;
    cp.K = 1.0;
    cp.K_FL = 1.0;
    cp.K_LF = 2.0;
    cp.Phi_F = 0.4;
    return cp;
}

struct BimodalRun {
    Run1DResult res;
    Grid1D g = Grid1D::make(600);
    TargetDensity target;
    PeriodicField rho0;
    double max_mass_err = 0.0;
    double max_eta_err = 0.0;
};

const BimodalRun& bimodal_run() {
    static const BimodalRun cached = [] {
        BimodalRun out;
        out.target = bimodal_von_mises(M_PI / 2, -M_PI / 2, 3.0, out.g);
        Control1D sys(out.g, out.target, kBimodalKernel, bimodal_params());
        const SwarmState init = uniform_state(out.g, 0.3, 0.3, 0.4);
        out.rho0 = init.rho();
        RunParams rp;
        rp.dt = 1e-3;
        rp.t_f = 15.0;
        rp.record_every = 10;
        rp.snapshot_times = {1.0, 5.0, 15.0};
        rp.halt_on_leader_depletion = false;
        out.res = sys.run(init, rp);
        for (const auto& row : out.res.rows) {
            out.max_mass_err =
                std::max(out.max_mass_err, std::abs(row.M_L + row.M_F + row.Phi_F_obs - 1.0));
            out.max_eta_err = std::max(out.max_eta_err, std::abs(row.Phi_F_obs - 0.4));
        }
        return out;
    }();
    return cached;
}

double fit_slope(const std::vector<DiagnosticsRow>& rows, double t0, double t1) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.t < t0 || r.t > t1) continue;
        const double y = std::log(r.err_L2);
        sx += r.t;
        sy += y;
        sxx += r.t * r.t;
        sxy += r.t * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SweepAssessment {
    bool ok = false;
    std::string detail;
};

SweepAssessment assess_sweep(const std::string& preset) {
    const ExperimentSpec spec = parse_experiment(config::File::parse(preset_config(preset)));
    const SweepResult res = run_robustness_sweep(spec, 2);
    // detect the transition as the largest ratio jump between neighbours
    std::size_t jump = 0;
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
        const double lo = res.points[i].D_KL_ss;     // smaller p (below-threshold side)
        const double hi = res.points[i + 1].D_KL_ss; // larger p
        if (!(lo > 0.0) || !(hi > 0.0)) continue;
        const double ratio = lo / hi;
        if (ratio > best) {
            best = ratio;
            jump = i;
        }
    }
    const double p_mid = 0.5 * (res.points[jump].p + res.points[jump + 1].p);
    const double grid_step = res.points[1].p - res.points[0].p;
    double below_min = 1e300, above_max = 0.0;
    for (std::size_t i = 0; i <= jump; ++i) below_min = std::min(below_min, res.points[i].D_KL_ss);
    for (std::size_t i = jump + 1; i < res.points.size(); ++i)
        above_max = std::max(above_max, res.points[i].D_KL_ss);
    SweepAssessment out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "transition %.3f vs p_hat %.3f (step %.2f); above %.2e, below %.2e (x%.0f)",
                  p_mid, res.p_hat, grid_step, above_max, below_min, below_min / above_max);
    out.detail = buf;
    out.ok = std::abs(p_mid - res.p_hat) <= grid_step + 1e-12 && above_max * 10.0 <= below_min;
    return out;
}

} // namespace

int main() {
    std::vector<Criterion> criteria;

    criteria.push_back({1, "feedback decay rate", [](std::string& d) {
        const auto& run = bimodal_run();
        if (run.res.status != RunStatus::Completed) {
            d = "run aborted: " + run.res.message;
            return false;
        }
        const double slope = fit_slope(run.res.rows, 0.5, 5.0);
        char buf[128];
        std::snprintf(buf, sizeof buf, "slope %.5f vs -K = -1 (tol 2%%)", slope);
        d = buf;
        return std::abs(slope + 1.0) <= 0.02;
    }});

    criteria.push_back({2, "closed-form density", [](std::string& d) {
        const auto& run = bimodal_run();
        double worst = 0.0;
        for (double t : {1.0, 5.0, 15.0}) {
            const auto it = run.res.snapshots.lower_bound(t - 1e-6);
            if (it == run.res.snapshots.end()) {
                d = "missing snapshot";
                return false;
            }
            const PeriodicField rho = it->second.state.rho();
            const double decay = std::exp(-1.0 * t);
            double err2 = 0.0;
            for (int j = 0; j < run.g.n; ++j) {
                const double closed =
                    run.target.rho.v[j] * (1.0 - decay) + run.rho0.v[j] * decay;
                const double diff = rho.v[j] - closed;
                err2 += diff * diff;
            }
            worst = std::max(worst, std::sqrt(err2 * run.g.dx));
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "max L2 %.2e at t in {1,5,15} (tol 1e-3)", worst);
        d = buf;
        return worst <= 1e-3;
    }});

    criteria.push_back({3, "feasibility threshold", [](std::string& d) {
        const Grid1D g = Grid1D::make(600);
        const double ph = compute_p_hat(von_mises({0.0, 1.0}, g), kExampleKernel, 0.05);
        char buf[128];
        std::snprintf(buf, sizeof buf, "p_hat %.4f vs 0.15 +/- 0.01", ph);
        d = buf;
        return std::abs(ph - 0.15) <= 0.01;
    }});

    criteria.push_back({4, "steady mass ratio", [](std::string& d) {
        const auto& run = bimodal_run();
        const auto& last = run.res.rows.back();
        const double ratio = last.M_L / last.M_F;
        char buf[128];
        std::snprintf(buf, sizeof buf, "M_L/M_F %.4f vs 0.5 +/- 0.02", ratio);
        d = buf;
        return std::abs(ratio - 0.5) <= 0.02;
    }});

    criteria.push_back({5, "steady-state profiles", [](std::string& d) {
        const auto& run = bimodal_run();
        const auto it = run.res.snapshots.lower_bound(15.0 - 1e-6);
        if (it == run.res.snapshots.end()) {
            d = "missing terminal snapshot";
            return false;
        }
        const SteadyStatePrediction pred = predict_steady_profiles(
            run.target, kBimodalKernel, 0.05, 0.4, 1.0, 2.0);
        const auto l2diff = [&](const PeriodicField& a, const PeriodicField& b) {
            double e2 = 0.0;
            for (int j = 0; j < run.g.n; ++j) {
                const double diff = a.v[j] - b.v[j];
                e2 += diff * diff;
            }
            return std::sqrt(e2 * run.g.dx);
        };
        const double eL = l2diff(it->second.state.rho_L, pred.rho_L_bar);
        const double eF = l2diff(it->second.state.rho_F, pred.rho_F_bar);
        const double eE = l2diff(it->second.state.eta_F, pred.eta_F_bar);
        char buf[160];
        std::snprintf(buf, sizeof buf, "L2 (rho_L, rho_F, eta_F) = (%.1e, %.1e, %.1e), tol 5e-3",
                      eL, eF, eE);
        d = buf;
        return eL <= 5e-3 && eF <= 5e-3 && eE <= 5e-3;
    }});

    criteria.push_back({6, "unique follower steady state", [](std::string& d) {
        // long-time relaxation of the non-plastic follower equation with
        // rho frozen at the target, from three distinct initial masses of
        // shape: integrating-factor spectral stepper
        const Grid1D g = Grid1D::make(600);
        const TargetDensity target = von_mises({0.0, 1.0}, g);
        const double D = 0.05, PhiF = 0.4;
        const PeriodicField closed = compute_eta_bar(target, kExampleKernel, D, PhiF);
        const PeriodicField drift = morse_convolution(kExampleKernel, g).apply(target.rho);

        std::vector<PeriodicField> ics;
        ics.emplace_back(g, PhiF / kTwoPi);
        {
            PeriodicField bump = sample(g, [](double x) { return std::exp(2.0 * std::cos(x - 1.0)); });
            const double s = PhiF / integrate(bump);
            for (double& v : bump.v) v *= s;
            ics.push_back(bump);
        }
        {
            PeriodicField wavy = sample(g, [](double x) { return 1.2 + std::cos(2.0 * x + 0.5); });
            const double s = PhiF / integrate(wavy);
            for (double& v : wavy.v) v *= s;
            ics.push_back(wavy);
        }

        const std::size_t nk = static_cast<std::size_t>(g.n / 2 + 1);
        const double dt = 5e-4;
        std::vector<double> decay(nk);
        for (std::size_t k = 0; k < nk; ++k)
            decay[k] = std::exp(-D * static_cast<double>(k * k) * dt);
        double worst = 0.0;
        for (const PeriodicField& ic : ics) {
            std::vector<double> eta = ic.v;
            std::vector<double> flux(g.n);
            const long long steps = std::llround(200.0 / dt);
            for (long long s = 0; s < steps; ++s) {
                for (int j = 0; j < g.n; ++j) flux[j] = eta[j] * drift.v[j];
                auto E = fft::rfft(eta);
                auto F = fft::rfft(flux);
                for (std::size_t k = 0; k < nk; ++k)
                    E[k] = decay[k] * (E[k] - dt * std::complex<double>(0.0, double(k)) * F[k]);
                eta = fft::irfft(E, g.n);
            }
            double e2 = 0.0;
            for (int j = 0; j < g.n; ++j) {
                const double diff = eta[j] - closed.v[j];
                e2 += diff * diff;
            }
            worst = std::max(worst, std::sqrt(e2 * g.dx));
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "max L2 over 3 initial conditions %.2e (tol 1e-4)", worst);
        d = buf;
        return worst <= 1e-4;
    }});

    criteria.push_back({7, "mass conservation", [](std::string& d) {
        const auto& run = bimodal_run();
        char buf[128];
        std::snprintf(buf, sizeof buf, "max |mass-1| %.1e, max |eta-PhiF| %.1e (tol 1e-6)",
                      run.max_mass_err, run.max_eta_err);
        d = buf;
        return run.max_mass_err <= 1e-6 && run.max_eta_err <= 1e-6;
    }});

    criteria.push_back({8, "poisson recovery", [](std::string& d) {
        const ExperimentSpec spec =
            parse_experiment(config::File::parse(preset_config("poisson_check")));
        const GridND g = GridND::make(spec.n);
        PeriodicFieldND phi_star(g), Y(g);
        std::size_t flat = 0;
        for (int i0 = 0; i0 < g.n[0]; ++i0)
            for (int i1 = 0; i1 < g.n[1]; ++i1, ++flat) {
                phi_star.v[flat] = std::cos(g.x(0, i0)) * std::cos(g.x(1, i1));
                Y.v[flat] = 2.0 * phi_star.v[flat];
            }
        const PoissonSolution man = poisson_solve_nd(Y);
        double manufactured = 0.0;
        for (std::size_t i = 0; i < phi_star.v.size(); ++i)
            manufactured = std::max(manufactured, std::abs(man.phi.v[i] - phi_star.v[i]));

        RngStream rng(spec.seed);
        PeriodicFieldND Yr(g);
        for (std::size_t i = 0; i < Yr.v.size(); ++i)
            Yr.v[i] = rng.normal(0, static_cast<std::uint32_t>(i), 0);
        std::vector<std::complex<double>> F(fft::spectral_size(g.n.data(), g.rank));
        fft::rfftn(Yr.v.data(), F.data(), g.n.data(), g.rank);
        flat = 0;
        for (int i0 = 0; i0 < g.n[0]; ++i0)
            for (int i1 = 0; i1 <= g.n[1] / 2; ++i1, ++flat) {
                const int k0 = i0 <= g.n[0] / 2 ? i0 : i0 - g.n[0];
                F[flat] *= std::exp(-0.15 * (double(k0) * k0 + double(i1) * i1));
            }
        F[0] = 0.0;
        fft::irfftn(F.data(), Yr.v.data(), g.n.data(), g.rank);
        const PoissonSolution sol = poisson_solve_nd(Yr);
        const PeriodicFieldND div = spectral_divergence(sol.w);
        double derr = 0.0;
        for (std::size_t i = 0; i < div.v.size(); ++i)
            derr = std::max(derr, std::abs(div.v[i] - Yr.v[i]));
        const PeriodicFieldND curl = spectral_curl(sol.w);
        double cerr = 0.0;
        for (double c : curl.v) cerr = std::max(cerr, std::abs(c));
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "manufactured %.1e (1e-10), div %.1e (1e-8), curl %.1e (1e-10)",
                      manufactured, derr, cerr);
        d = buf;
        return manufactured <= 1e-10 && derr <= 1e-8 && cerr <= 1e-10;
    }});

    criteria.push_back({9, "2D regulation", [](std::string& d) {
        const ExperimentSpec spec =
            parse_experiment(config::File::parse(preset_config("monomodal_2d")));
        const GridND g = GridND::make(spec.n);
        const TargetDensityND target = spec.make_target_nd(g);
        std::vector<MorseParams> per_axis(g.rank, spec.kernel);
        ControlND sys(g, target, SeparableMorseKernel(per_axis, g), spec.control);
        const RunNDResult res =
            sys.run_nd(uniform_state_nd(g, spec.M_L0, spec.M_F0, spec.control.Phi_F), spec.run);
        if (res.status != RunStatus::Completed) {
            d = "run aborted: " + res.message;
            return false;
        }
        const auto& last = res.rows.back();
        double kl_at_5 = 1e300, m_half_L = 0.0, m_half_F = 0.0, max_mass_err = 0.0;
        for (const auto& row : res.rows) {
            if (std::abs(row.t - 5.0) < 0.05) kl_at_5 = row.D_KL;
            if (std::abs(row.t - 15.0) < 0.05) {
                m_half_L = row.M_L;
                m_half_F = row.M_F;
            }
            max_mass_err = std::max(max_mass_err,
                                    std::abs(row.M_L + row.M_F + row.Phi_F_obs - 1.0));
        }
        const bool masses_ok =
            std::abs(last.M_L - 0.26) <= 0.03 && std::abs(last.M_F - 0.53) <= 0.03;
        const bool plateau_ok =
            std::abs(last.M_L - m_half_L) <= 0.005 && std::abs(last.M_F - m_half_F) <= 0.005;
        const bool floor_ok = kl_at_5 <= std::max(10.0 * last.D_KL, 1e-4);
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "masses (%.3f, %.3f) vs (0.26, 0.53)+/-0.03; KL(5) %.1e, KL(tf) %.1e; "
                      "plateau %s; mass err %.0e",
                      last.M_L, last.M_F, kl_at_5, last.D_KL, plateau_ok ? "yes" : "no",
                      max_mass_err);
        d = buf;
        return masses_ok && plateau_ok && floor_ok && max_mass_err <= 1e-6;
    }});

    criteria.push_back({10, "agent-based ensemble", [](std::string& d) {
        const ExperimentSpec spec =
            parse_experiment(config::File::parse(preset_config("abm_ensemble")));
        const AbmEnsembleResult res = run_abm_ensemble(spec, 50, 2);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "mean D_KL %.4f (in [0.01,0.04]), mean ratio %.3f (in [0.38,0.58])",
                      res.mean_D_KL_ss, res.mean_ratio);
        d = buf;
        return res.mean_D_KL_ss >= 0.01 && res.mean_D_KL_ss <= 0.04 && res.mean_ratio >= 0.38 &&
               res.mean_ratio <= 0.58;
    }});

    criteria.push_back({11, "robustness threshold shape", [](std::string& d) {
        const SweepAssessment a = assess_sweep("robustness_diffusion");
        const SweepAssessment b = assess_sweep("robustness_kernel");
        d = "diffusion: " + a.detail + " | kernel: " + b.detail;
        return a.ok && b.ok;
    }});

    criteria.push_back({12, "convolution equivalence", [](std::string& d) {
        std::mt19937 rng(2024);
        std::normal_distribution<double> nd;
        double worst = 0.0;
        for (int n : {128, 600}) {
            const Grid1D g = Grid1D::make(n);
            const PeriodicField kernel = sample_morse_kernel({M_PI, M_PI / 2, 2.0}, g);
            for (int rep = 0; rep < 3; ++rep) {
                PeriodicField f(g);
                for (double& v : f.v) v = nd(rng);
                const PeriodicField fast = circular_convolve(kernel, f);
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j)
                        s += kernel.v[g.wrap(i - j + n / 2)] * f.v[j];
                    worst = std::max(worst, std::abs(fast.v[i] - s * g.dx));
                }
            }
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "max pointwise gap %.1e (tol 1e-10)", worst);
        d = buf;
        return worst <= 1e-10;
    }});

    std::printf("acceptance suite: %zu criteria\n", criteria.size());
    for (const auto& c : criteria) run_criterion(c);
    std::printf("%s: %d of %zu criteria failed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
                g_failures, criteria.size());
    return g_failures;
}
