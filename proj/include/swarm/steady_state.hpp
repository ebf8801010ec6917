#pragma once

#include "swarm/grid.hpp"
#include "swarm/grid_nd.hpp"
#include "swarm/kernels.hpp"

#include <optional>
#include <utility>

namespace swarm {

/// Closed-form steady-state record for given (target, kernel, D, Phi_F,
/// K_FL, K_LF). Infeasibility (p <= p_hat) is data, not an error: the
/// robustness experiment deliberately operates below threshold.
struct SteadyStatePrediction {
    PeriodicField h;
    PeriodicField eta_F_bar;
    PeriodicField rho_star_bar;
    PeriodicField rho_L_bar;
    PeriodicField rho_F_bar;
    double p_hat = 0.0;
    bool feasible = false;       ///< strict pointwise positivity of rho_L_bar and rho_F_bar
    double min_rho_L_bar = 0.0;
    double min_rho_F_bar = 0.0;
    double argmin_x = 0.0;       ///< grid location of the positivity-critical minimum
    double stability_margin = 0.0;
    bool stable = false;
};

/// h(x) = exp[(1/D) * zero-mean antiderivative of (f * rho_bar)].
/// Strictly positive and periodic (f * rho_bar has zero mean by Fubini).
PeriodicField compute_h(const TargetDensity& target, const MorseParams& kernel, double D);

/// Closed-form steady non-plastic follower profile Phi_F * h / integral(h).
PeriodicField compute_eta_bar(const TargetDensity& target, const MorseParams& kernel, double D,
                              double Phi_F);

/// Plasticity threshold p_hat = 1 - min_x [rho_bar(x) int(h) / h(x)];
/// the desired density admits strictly positive steady leader/follower
/// profiles iff p > p_hat. Grid-sampled min, so carries O(dx^2) bias.
double compute_p_hat(const TargetDensity& target, const MorseParams& kernel, double D);

SteadyStatePrediction predict_steady_profiles(const TargetDensity& target,
                                              const MorseParams& kernel, double D, double Phi_F,
                                              double K_FL, double K_LF);

/// One-parameter family achieving a steady leaders-to-followers mass ratio
/// r_hat: K_FL = r_hat * rate_scale, K_LF = rate_scale.
std::pair<double, double> select_rates(double r_hat, double rate_scale);

/// Local stability margin 2D - ||rho_bar_x||_2 ||f||_2 (sufficient
/// condition; stable iff margin > 0). The kernel norm uses a refined
/// jump-aware quadrature, the density-gradient norm grid quadrature.
std::pair<double, bool> check_local_stability(const TargetDensity& target,
                                              const MorseParams& kernel, double D);

/// nD variant: margin = 2D - sum_i ||rho_bar_{x_i}||_2 ||f_i||_2.
std::pair<double, bool> check_local_stability_nd(const TargetDensityND& target,
                                                 const SeparableMorseKernel& kernel, double D);

/// nD h built from the axis-0 antiderivative of f_0 * rho_bar; asserts
/// cross-axis agreement (valid under the isotropy hypothesis) to 1e-6.
PeriodicFieldND compute_h_nd(const TargetDensityND& target, const SeparableMorseKernel& kernel,
                             double D);
PeriodicFieldND compute_eta_bar_nd(const TargetDensityND& target,
                                   const SeparableMorseKernel& kernel, double D, double Phi_F);
double compute_p_hat_nd(const TargetDensityND& target, const SeparableMorseKernel& kernel,
                        double D);

struct SteadyStatePredictionND {
    PeriodicFieldND eta_F_bar;
    PeriodicFieldND rho_L_bar;
    PeriodicFieldND rho_F_bar;
    double p_hat = 0.0;
    bool feasible = false;
    double stability_margin = 0.0;
    bool stable = false;
};

SteadyStatePredictionND predict_steady_profiles_nd(const TargetDensityND& target,
                                                   const SeparableMorseKernel& kernel, double D,
                                                   double Phi_F, double K_FL, double K_LF);

} // namespace swarm
