#include "swarm/agents.hpp"

#include "swarm/errors.hpp"
#include "swarm/fft.hpp"
#include "swarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numeric>

namespace swarm {

int AgentPopulation::n_leaders() const {
    return static_cast<int>(std::count(lambda.begin(), lambda.end(), std::uint8_t{1}));
}

void AbmParams::validate() const {
    if (n_leaders0 < 0 || n_plastic_followers0 < 0 || n_nonplastic < 0)
        throw ConfigError("agent counts must be nonnegative");
    if (n_leaders0 + n_plastic_followers0 <= 0) throw ConfigError("need at least one plastic agent");
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
    if (!(dt > 0.0) || !(t_f > 0.0)) throw ConfigError("dt and t_f must be > 0");
}

// ---------------------------------------------------------------------------
// circular KDE
// ---------------------------------------------------------------------------
namespace {

// Ratios I_k(kappa)/I_0(kappa) by Miller's downward recurrence
// I_{k-1} = I_{k+1} + (2k/kappa) I_k, truncated where the ratio falls
// below 1e-18.
std::vector<double> bessel_ratios(double kappa, int k_cap) {
    const int start = static_cast<int>(kappa + 14.0 * std::sqrt(kappa) + 40.0);
    std::vector<double> r(start + 2, 0.0);
    r[start + 1] = 0.0;
    r[start] = 1e-280;
    for (int k = start; k >= 1; --k) {
        r[k - 1] = r[k + 1] + (2.0 * k / kappa) * r[k];
        if (r[k - 1] > 1e280) {
            const double s = 1e-280;
            for (int j = k - 1; j <= start + 1; ++j) r[j] *= s;
        }
    }
    const double i0 = r[0];
    int kmax = 0;
    for (int k = 0; k <= start; ++k) {
        r[k] /= i0;
        if (r[k] >= 1e-18) kmax = k;
    }
    kmax = std::min(kmax, k_cap);
    r.resize(kmax + 1);
    return r;
}

const std::vector<double>& cached_ratios(double kappa, int k_cap) {
    static std::mutex mu;
    static std::map<std::pair<double, int>, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(kappa, k_cap);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, bessel_ratios(kappa, k_cap)).first;
    return it->second;
}

} // namespace

PeriodicField kde_circular(std::span<const double> positions, std::span<const double> weights,
                           Grid1D grid, double bandwidth) {
    if (positions.empty()) throw EmptySample();
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
    if (weights.size() != positions.size())
        throw std::invalid_argument("kde_circular: weights size mismatch");
    const double kappa = 1.0 / (bandwidth * bandwidth);
    const auto& ratio = cached_ratios(kappa, grid.n / 2 - 1);
    const int kmax = static_cast<int>(ratio.size()) - 1;

    // S_k = sum_p w_p e^{-i k x_p} by per-sample phase recurrence
    std::vector<std::complex<double>> S(kmax + 1, 0.0);
    double total_w = 0.0;
    for (std::size_t p = 0; p < positions.size(); ++p) {
        const double w = weights[p];
        total_w += w;
        const std::complex<double> e(std::cos(positions[p]), -std::sin(positions[p]));
        std::complex<double> z(w, 0.0);
        S[0] += z;
        for (int k = 1; k <= kmax; ++k) {
            z *= e;
            S[k] += z;
        }
    }

    // grid values via inverse rfft; x_j = (j - n/2) dx carries a (-1)^k phase
    std::vector<std::complex<double>> C(grid.n / 2 + 1, 0.0);
    const double scale = grid.n / kTwoPi;
    for (int k = 0; k <= kmax; ++k)
        C[k] = scale * ratio[k] * S[k] * (k % 2 ? -1.0 : 1.0);
    PeriodicField out(grid, fft::irfft(C, grid.n));

    // series truncation can leave ~1e-18-level negative wiggles in empty
    // regions; clamp and restore the exact mass
    for (double& v : out.v) v = std::max(v, 0.0);
    const double mass = integrate(out);
    if (mass > 0.0)
        for (double& v : out.v) v *= total_w / mass;
    return out;
}

PeriodicField kde_circular(std::span<const double> positions, double weight_each, Grid1D grid,
                           double bandwidth) {
    std::vector<double> w(positions.size(), weight_each);
    return kde_circular(positions, w, grid, bandwidth);
}

// ---------------------------------------------------------------------------
// rate factorization
// ---------------------------------------------------------------------------
SwitchRates factorize_rates(const PeriodicField& q, const PeriodicField& rho_L_est,
                            const PeriodicField& rho_F_est, double K_FL, double K_LF, double eps) {
    const Grid1D g = q.grid;
    SwitchRates out{PeriodicField(g), PeriodicField(g), 0};
    for (int j = 0; j < g.n; ++j) {
        const double gj = K_FL * rho_F_est.v[j] - K_LF * rho_L_est.v[j];
        const double rem = q.v[j] - gj;
        const double dF = std::max(rho_F_est.v[j], eps);
        const double dL = std::max(rho_L_est.v[j], eps);
        if (rho_F_est.v[j] < eps || rho_L_est.v[j] < eps) ++out.floored_cells;
        out.kappa_FL.v[j] = K_FL + std::max(rem, 0.0) / dF;
        out.kappa_LF.v[j] = K_LF + std::max(-rem, 0.0) / dL;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pairwise interaction sums
// ---------------------------------------------------------------------------
PairwiseKernelSum::PairwiseKernelSum(const MorseParams& params) : params_(params) {
    params_.validate();
    comp_[0].coef = 1.0 / (params.L_r * (std::exp(kTwoPi / params.L_r) - 1.0));
    comp_[0].L = params.L_r;
    comp_[0].big = std::exp(kTwoPi / params.L_r);
    comp_[1].coef = -params.alpha / (params.L_a * (std::exp(kTwoPi / params.L_a) - 1.0));
    comp_[1].L = params.L_a;
    comp_[1].big = std::exp(kTwoPi / params.L_a);
}

void PairwiseKernelSum::set_sources(std::span<const double> positions) {
    sorted_.assign(positions.begin(), positions.end());
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    for (auto& c : comp_) {
        c.pre_pos.assign(n + 1, 0.0);
        c.pre_neg.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            c.pre_pos[i + 1] = c.pre_pos[i] + std::exp(sorted_[i] / c.L);
            c.pre_neg[i + 1] = c.pre_neg[i] + std::exp(-sorted_[i] / c.L);
        }
    }
}

double PairwiseKernelSum::eval(double x) const {
    if (sorted_.empty()) return 0.0;
    const std::size_t n = sorted_.size();
    const auto lb = [&](double t) {
        return static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), t) -
                                        sorted_.begin());
    };
    const auto ub = [&](double t) {
        return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), t) -
                                        sorted_.begin());
    };
    const std::size_t lb_x = lb(x);
    const std::size_t ub_x = ub(x);
    double total = 0.0;
    for (const auto& c : comp_) {
        auto dpos = [&](std::size_t i0, std::size_t i1) { return c.pre_pos[i1] - c.pre_pos[i0]; };
        auto dneg = [&](std::size_t i0, std::size_t i1) { return c.pre_neg[i1] - c.pre_neg[i0]; };
        const double exm = std::exp(-x / c.L), exp_ = std::exp(x / c.L);
        double acc = 0.0;
        if (x >= 0.0) {
            const std::size_t ub_b = ub(x - M_PI);
            // theta in (x-pi, x): d = x - theta in (0, pi)
            acc += c.big * exm * dpos(ub_b, lb_x) - exp_ * dneg(ub_b, lb_x);
            // theta in [-pi, x-pi]: |d| = theta - x + 2pi (wrapped negative side)
            const double e2m = std::exp((x - kTwoPi) / c.L), e2p = std::exp((kTwoPi - x) / c.L);
            acc -= c.big * e2m * dneg(0, ub_b) - e2p * dpos(0, ub_b);
            // theta in (x, pi): |d| = theta - x (negative side)
            acc -= c.big * exp_ * dneg(ub_x, n) - exm * dpos(ub_x, n);
        } else {
            const std::size_t ub_b = ub(x + M_PI);
            // theta in [-pi, x): d = x - theta (positive side)
            acc += c.big * exm * dpos(0, lb_x) - exp_ * dneg(0, lb_x);
            // theta in (x+pi, pi): d = x - theta + 2pi (wrapped positive side)
            const double e2m = std::exp(-(x + kTwoPi) / c.L), e2p = std::exp((x + kTwoPi) / c.L);
            acc += c.big * e2m * dpos(ub_b, n) - e2p * dneg(ub_b, n);
            // theta in (x, x+pi]: |d| = theta - x (negative side)
            acc -= c.big * exp_ * dneg(ub_x, ub_b) - exm * dpos(ub_x, ub_b);
        }
        total += c.coef * acc;
    }
    return total;
}

// ---------------------------------------------------------------------------
// agent simulation
// ---------------------------------------------------------------------------
namespace {

double interp_periodic(const PeriodicField& f, double x) {
    const int n = f.n();
    double s = (wrap_angle(x) + M_PI) / f.grid.dx;
    if (s < 0.0) s = 0.0;
    int j0 = static_cast<int>(s);
    if (j0 >= n) j0 = n - 1;
    const double fr = s - j0;
    const int j1 = j0 + 1 == n ? 0 : j0 + 1;
    return f.v[j0] * (1.0 - fr) + f.v[j1] * fr;
}

} // namespace

AgentSim::AgentSim(Grid1D g, TargetDensity target, MorseParams kernel, ControlParams cp,
                   AbmParams ap)
    : grid_(g), target_(std::move(target)), kernel_(kernel), cp_(cp), ap_(ap),
      conv_(morse_convolution(kernel, g)), rng_(ap.seed),
      ctrl_(std::make_unique<Control1D>(g, target_, kernel, cp)) {
    cp_.validate();
    ap_.validate();
}

double AgentSim::plastic_weight() const {
    return cp_.p() / (ap_.n_leaders0 + ap_.n_plastic_followers0);
}

double AgentSim::nonplastic_weight() const {
    return ap_.n_nonplastic > 0 ? cp_.Phi_F / ap_.n_nonplastic : 0.0;
}

AgentPopulation AgentSim::initial_population() const {
    AgentPopulation pop;
    const int nlf = ap_.n_leaders0 + ap_.n_plastic_followers0;
    pop.x.resize(nlf);
    pop.lambda.resize(nlf);
    pop.y.resize(ap_.n_nonplastic);
    for (int i = 0; i < nlf; ++i) {
        pop.x[i] = -M_PI + kTwoPi * rng_.uniform(0, static_cast<std::uint32_t>(i), 2);
        pop.lambda[i] = i < ap_.n_leaders0 ? 1 : 0;
    }
    for (int i = 0; i < ap_.n_nonplastic; ++i)
        pop.y[i] = -M_PI + kTwoPi * rng_.uniform(0, static_cast<std::uint32_t>(nlf + i), 2);
    return pop;
}

AgentSim::Estimates AgentSim::estimate_densities(const AgentPopulation& pop) const {
    std::vector<double> leaders, followers;
    leaders.reserve(pop.x.size());
    followers.reserve(pop.x.size());
    for (std::size_t i = 0; i < pop.x.size(); ++i)
        (pop.lambda[i] ? leaders : followers).push_back(pop.x[i]);
    const double wp = plastic_weight();
    const double wn = nonplastic_weight();
    Estimates est;
    est.rho_L = leaders.empty() ? PeriodicField(grid_)
                                : kde_circular(leaders, wp, grid_, ap_.bandwidth);
    est.rho_F = followers.empty() ? PeriodicField(grid_)
                                  : kde_circular(followers, wp, grid_, ap_.bandwidth);
    est.eta_F = pop.y.empty() ? PeriodicField(grid_)
                              : kde_circular(pop.y, wn, grid_, ap_.bandwidth);
    return est;
}

AgentSim::GridControls AgentSim::grid_controls(const Estimates& est) const {
    // continuum control formulas evaluated on the estimated densities
    SwarmState s{est.rho_L, est.rho_F, est.eta_F, 0.0};
    const PeriodicField w = ctrl_->compute_leader_flux(s);
    GridControls gc{PeriodicField(grid_), PeriodicField(grid_), 0};
    for (int j = 0; j < grid_.n; ++j) {
        const double d = est.rho_L.v[j];
        if (d < ap_.eps_density) ++gc.floored_cells;
        gc.u.v[j] = w.v[j] / std::max(d, ap_.eps_density);
    }
    gc.q = ctrl_->compute_reaction_q_from_flux(s, w);
    return gc;
}

void AgentSim::agent_step(AgentPopulation& pop, const PeriodicField& u, const SwitchRates& rates,
                          std::uint64_t step_index) const {
    const int nlf = pop.n_plastic();
    const int m = pop.n_nonplastic();
    PairwiseKernelSum plastic_sum(kernel_), nonplastic_sum(kernel_);
    plastic_sum.set_sources(pop.x);
    nonplastic_sum.set_sources(pop.y);
    const double noise = std::sqrt(2.0 * cp_.D * ap_.dt);
    const double inv_nlf = nlf > 0 ? 1.0 / nlf : 0.0;
    const double inv_m = m > 0 ? 1.0 / m : 0.0;

    // switching probabilities use pre-move positions (Jacobi-consistent
    // with the density estimates the rates were built from)
    std::vector<std::uint8_t> next_lambda(pop.lambda);
    for (int i = 0; i < nlf; ++i) {
        const double r = rng_.uniform(step_index, static_cast<std::uint32_t>(i), 1);
        if (pop.lambda[i]) {
            const double k = interp_periodic(rates.kappa_LF, pop.x[i]);
            if (r < -std::expm1(-k * ap_.dt)) next_lambda[i] = 0;
        } else {
            const double k = interp_periodic(rates.kappa_FL, pop.x[i]);
            if (r < -std::expm1(-k * ap_.dt)) next_lambda[i] = 1;
        }
    }
    for (int i = 0; i < nlf; ++i) {
        double drift = inv_nlf * plastic_sum.eval(pop.x[i]) + inv_m * nonplastic_sum.eval(pop.x[i]);
        if (pop.lambda[i]) drift += interp_periodic(u, pop.x[i]);
        const double dw = rng_.normal(step_index, static_cast<std::uint32_t>(i), 0);
        pop.x[i] = wrap_angle(pop.x[i] + drift * ap_.dt + noise * dw);
    }
    for (int i = 0; i < m; ++i) {
        const double drift =
            inv_m * nonplastic_sum.eval(pop.y[i]) + inv_nlf * plastic_sum.eval(pop.y[i]);
        const double dw = rng_.normal(step_index, static_cast<std::uint32_t>(nlf + i), 0);
        pop.y[i] = wrap_angle(pop.y[i] + drift * ap_.dt + noise * dw);
    }
    pop.lambda = std::move(next_lambda);
}

AbmResult AgentSim::run_abm(AgentPopulation pop) const {
    AbmResult res;
    const long long nsteps = std::llround(ap_.t_f / ap_.dt);
    const int nlf = pop.n_plastic();
    res.leader_min_count = pop.n_leaders();
    const double wp = plastic_weight();

    auto kl_of = [&](const Estimates& est) {
        PeriodicField rho = est.rho_L;
        for (int j = 0; j < grid_.n; ++j) rho.v[j] += est.rho_F.v[j] + est.eta_F.v[j];
        return kl_divergence(rho, target_.rho);
    };

    for (long long step = 0; step < nsteps; ++step) {
        const Estimates est = estimate_densities(pop);
        const GridControls gc = grid_controls(est);
        res.floored_samples += static_cast<std::uint64_t>(gc.floored_cells);
        const SwitchRates rates =
            factorize_rates(gc.q, est.rho_L, est.rho_F, cp_.K_FL, cp_.K_LF, ap_.eps_density);
        if (step % ap_.record_every == 0)
            res.rows.push_back({step * ap_.dt, kl_of(est), pop.n_leaders(),
                                nlf - pop.n_leaders()});
        agent_step(pop, gc.u, rates, static_cast<std::uint64_t>(step));
        const int leaders = pop.n_leaders();
        res.leader_min_count = std::min(res.leader_min_count, leaders);
        if (leaders == 0) {
            res.aborted = true;
            res.t_end = (step + 1) * ap_.dt;
            break;
        }
        res.t_end = (step + 1) * ap_.dt;
    }
    const Estimates est = estimate_densities(pop);
    const int leaders = pop.n_leaders();
    res.rows.push_back({res.t_end, kl_of(est), leaders, nlf - leaders});
    res.D_KL_ss = res.rows.back().D_KL;
    res.M_L_ss = leaders * wp;
    res.M_F_ss = (nlf - leaders) * wp;
    res.ratio_ss = res.M_F_ss > 0.0 ? res.M_L_ss / res.M_F_ss : 0.0;
    return res;
}

} // namespace swarm
