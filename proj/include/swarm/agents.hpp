#pragma once

#include "swarm/control_1d.hpp"
#include "swarm/grid.hpp"
#include "swarm/kernels.hpp"
#include "swarm/rng.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace swarm {

/// Microscopic state: plastic agents x with role labels lambda (1 = leader,
/// 0 = plastic follower) and non-plastic followers y. Counts are constant
/// over a run; only labels change. Positions always wrapped to [-pi, pi).
struct AgentPopulation {
    std::vector<double> x;
    std::vector<std::uint8_t> lambda;
    std::vector<double> y;

    int n_plastic() const { return static_cast<int>(x.size()); }
    int n_nonplastic() const { return static_cast<int>(y.size()); }
    int n_leaders() const;
};

/// Nonnegative switching-rate fields found by factorizing q.
struct SwitchRates {
    PeriodicField kappa_FL; ///< plastic follower -> leader
    PeriodicField kappa_LF; ///< leader -> plastic follower
    int floored_cells = 0;  ///< telemetry: grid cells where a density floor engaged
};

/// Wrapped kernel density estimate with a von Mises smoothing kernel of
/// concentration 1/bandwidth^2, normalized so integrate = sum of weights.
/// Evaluated through the kernel's Fourier-Bessel series (exact to machine
/// precision at the truncation level; verified against the direct sum).
PeriodicField kde_circular(std::span<const double> positions, std::span<const double> weights,
                           Grid1D grid, double bandwidth);
PeriodicField kde_circular(std::span<const double> positions, double weight_each, Grid1D grid,
                           double bandwidth);

/// Mass-action baseline plus positive/negative-part split of the transport
/// remainder:
///   kappa_FL = K_FL + max(q - g, 0) / max(rho_F_est, eps)
///   kappa_LF = K_LF + max(-(q - g), 0) / max(rho_L_est, eps)
/// with g = K_FL rho_F_est - K_LF rho_L_est; satisfies
/// kappa_FL rho_F - kappa_LF rho_L = q wherever both densities exceed eps,
/// reduces to (K_FL, K_LF) at steady state, and keeps both rates >= 0.
SwitchRates factorize_rates(const PeriodicField& q, const PeriodicField& rho_L_est,
                            const PeriodicField& rho_F_est, double K_FL, double K_LF,
                            double eps = 1e-6);

/// Sorted prefix-sum evaluation of S(x) = sum_j f(wrap(x - x_j)) for the
/// piecewise-exponential Morse kernel: exact regrouping of the direct
/// pairwise sum at O(N log N) instead of O(N^2). Coincident points
/// contribute 0 (sgn(0) = 0), so no self-exclusion is needed when
/// evaluating at a source point.
class PairwiseKernelSum {
public:
    explicit PairwiseKernelSum(const MorseParams& params);
    void set_sources(std::span<const double> positions);
    double eval(double x) const;
    int source_count() const { return static_cast<int>(sorted_.size()); }

private:
    struct Component {
        double coef;  // signed prefactor: +1/(L_r (e^{2pi/L_r}-1)) or -alpha/(L_a (...))
        double L;
        double big;   // e^{2pi/L}
        std::vector<double> pre_pos; // prefix sums of e^{+theta/L}
        std::vector<double> pre_neg; // prefix sums of e^{-theta/L}
    };
    double eval_component(const Component& c, double x, std::size_t lb, std::size_t ub_x,
                          std::size_t ub_b, bool b_below) const;

    MorseParams params_;
    std::vector<double> sorted_;
    std::array<Component, 2> comp_;
};

struct AbmParams {
    int n_leaders0 = 300;
    int n_plastic_followers0 = 300;
    int n_nonplastic = 400;
    double bandwidth = 0.1;
    double eps_density = 1e-6;
    double dt = 1e-3;
    double t_f = 15.0;
    std::uint64_t seed = 1;
    int record_every = 100;

    void validate() const;
};

struct AbmRow {
    double t = 0.0;
    double D_KL = 0.0;
    int leaders = 0;
    int followers = 0;
};

struct AbmResult {
    std::vector<AbmRow> rows;
    double D_KL_ss = 0.0;
    double M_L_ss = 0.0;
    double M_F_ss = 0.0;
    double ratio_ss = 0.0; ///< leaders-to-plastic-followers mass ratio at t_f
    int leader_min_count = 0;
    std::uint64_t floored_samples = 0; ///< telemetry from density floors
    bool aborted = false;              ///< leader count reached zero
    double t_end = 0.0;
};

/// Closed-loop agent-based simulation: per step a KDE of the three
/// subpopulations, continuum control formulas on the estimated densities,
/// rate factorization, then an Euler-Maruyama advance with stochastic
/// role switching.
class AgentSim {
public:
    AgentSim(Grid1D g, TargetDensity target, MorseParams kernel, ControlParams cp, AbmParams ap);

    /// Initial population: uniform positions, first n_leaders0 plastic
    /// agents labeled leaders.
    AgentPopulation initial_population() const;

    /// Density estimates of (leaders, plastic followers, non-plastic).
    struct Estimates {
        PeriodicField rho_L, rho_F, eta_F;
    };
    Estimates estimate_densities(const AgentPopulation& pop) const;

    /// Grid control fields from estimated densities: velocity u (floored
    /// division by rho_L_est) and reaction q.
    struct GridControls {
        PeriodicField u, q;
        int floored_cells = 0;
    };
    GridControls grid_controls(const Estimates& est) const;

    /// One Euler-Maruyama step with role switching; drift uses mean
    /// pairwise interactions (1/N_LF and 1/M source weights) plus u_i
    /// lambda_i with u linearly interpolated at agent positions.
    void agent_step(AgentPopulation& pop, const PeriodicField& u, const SwitchRates& rates,
                    std::uint64_t step_index) const;

    AbmResult run_abm(AgentPopulation pop) const;
    AbmResult run_abm() const { return run_abm(initial_population()); }

    const Grid1D& grid() const { return grid_; }
    const TargetDensity& target() const { return target_; }
    const ControlParams& control_params() const { return cp_; }
    const AbmParams& abm_params() const { return ap_; }
    double plastic_weight() const;
    double nonplastic_weight() const;

private:
    Grid1D grid_;
    TargetDensity target_;
    MorseParams kernel_;
    ControlParams cp_;
    AbmParams ap_;
    ConvolutionPlan conv_;
    RngStream rng_;
    std::unique_ptr<Control1D> ctrl_; ///< continuum formula evaluator on estimates
};

} // namespace swarm
