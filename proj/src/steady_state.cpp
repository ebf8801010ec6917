#include "swarm/steady_state.hpp"

#include "swarm/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace swarm {

PeriodicField compute_h(const TargetDensity& target, const MorseParams& kernel, double D) {
    if (D == 0.0) throw DiffusionZero();
    const Grid1D g = target.rho.grid;
    const PeriodicField conv = morse_convolution(kernel, g).apply(target.rho);
    PeriodicField A = antiderivative(conv);
    PeriodicField h(g);
    for (int j = 0; j < g.n; ++j) h.v[j] = std::exp(A.v[j] / D);
    return h;
}

PeriodicField compute_eta_bar(const TargetDensity& target, const MorseParams& kernel, double D,
                              double Phi_F) {
    PeriodicField h = compute_h(target, kernel, D);
    const double scale = Phi_F / integrate(h);
    for (double& v : h.v) v *= scale;
    return h;
}

double compute_p_hat(const TargetDensity& target, const MorseParams& kernel, double D) {
    const PeriodicField h = compute_h(target, kernel, D);
    const double inth = integrate(h);
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < h.n(); ++j) m = std::min(m, target.rho.v[j] * inth / h.v[j]);
    return 1.0 - m;
}

SteadyStatePrediction predict_steady_profiles(const TargetDensity& target,
                                              const MorseParams& kernel, double D, double Phi_F,
                                              double K_FL, double K_LF) {
    const Grid1D g = target.rho.grid;
    SteadyStatePrediction out;
    out.h = compute_h(target, kernel, D);
    const double inth = integrate(out.h);

    out.eta_F_bar = out.h;
    for (double& v : out.eta_F_bar.v) v *= Phi_F / inth;

    const double a = K_FL + K_LF;
    const double b = K_FL - K_LF;
    out.rho_star_bar = PeriodicField(g);
    out.rho_L_bar = PeriodicField(g);
    out.rho_F_bar = PeriodicField(g);
    int jmin = 0;
    double expr_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n; ++j) {
        const double diff = target.rho.v[j] - out.eta_F_bar.v[j];
        out.rho_star_bar.v[j] = (b / a) * diff;
        out.rho_L_bar.v[j] = 0.5 * (1.0 + b / a) * diff;
        out.rho_F_bar.v[j] = 0.5 * (1.0 - b / a) * diff;
        const double expr = target.rho.v[j] * inth / out.h.v[j];
        if (expr < expr_min) {
            expr_min = expr;
            jmin = j;
        }
    }
    out.p_hat = 1.0 - expr_min;
    out.min_rho_L_bar = out.rho_L_bar.min();
    out.min_rho_F_bar = out.rho_F_bar.min();
    out.argmin_x = g.x(jmin);
    out.feasible = out.min_rho_L_bar > 0.0 && out.min_rho_F_bar > 0.0;
    auto [margin, stable] = check_local_stability(target, kernel, D);
    out.stability_margin = margin;
    out.stable = stable;
    return out;
}

std::pair<double, double> select_rates(double r_hat, double rate_scale) {
    if (!(r_hat > 0.0)) throw NonpositiveRatio();
    if (!(rate_scale > 0.0)) throw ConfigError("rate_scale must be > 0");
    return {r_hat * rate_scale, rate_scale};
}

std::pair<double, bool> check_local_stability(const TargetDensity& target,
                                              const MorseParams& kernel, double D) {
    const double grad_norm = l2_norm(derivative(target.rho, 1));
    const double margin = 2.0 * D - grad_norm * morse_kernel_l2_norm(kernel);
    return {margin, margin > 0.0};
}

std::pair<double, bool> check_local_stability_nd(const TargetDensityND& target,
                                                 const SeparableMorseKernel& kernel, double D) {
    double sum = 0.0;
    for (int a = 0; a < kernel.rank(); ++a)
        sum += l2_norm(derivative_axis(target.rho, a, 1)) * kernel.component_l2_norm(a);
    const double margin = 2.0 * D - sum;
    return {margin, margin > 0.0};
}

PeriodicFieldND compute_h_nd(const TargetDensityND& target, const SeparableMorseKernel& kernel,
                             double D) {
    if (D == 0.0) throw DiffusionZero();
    const GridND g = target.rho.grid;
    // antiderivative of f_0 * rho_bar along axis 0; legitimate under the
    // isotropy hypothesis, guarded by cross-axis agreement below
    PeriodicFieldND A = axis_antiderivative(kernel.convolve_component(0, target.rho), 0);
    double guard = 0.0;
    for (int a = 1; a < g.rank; ++a) {
        const PeriodicFieldND Aa = axis_antiderivative(kernel.convolve_component(a, target.rho), a);
        for (std::size_t i = 0; i < A.v.size(); ++i)
            guard = std::max(guard, std::abs(A.v[i] - Aa.v[i]));
    }
    if (guard > 1e-6)
        throw std::logic_error("compute_h_nd: cross-axis antiderivative disagreement " +
                               std::to_string(guard) + "; kernel is not isotropic");
    PeriodicFieldND h(g);
    for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] = std::exp(A.v[i] / D);
    return h;
}

PeriodicFieldND compute_eta_bar_nd(const TargetDensityND& target,
                                   const SeparableMorseKernel& kernel, double D, double Phi_F) {
    PeriodicFieldND h = compute_h_nd(target, kernel, D);
    const double scale = Phi_F / integrate(h);
    for (double& v : h.v) v *= scale;
    return h;
}

double compute_p_hat_nd(const TargetDensityND& target, const SeparableMorseKernel& kernel,
                        double D) {
    const PeriodicFieldND h = compute_h_nd(target, kernel, D);
    const double inth = integrate(h);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.v.size(); ++i)
        m = std::min(m, target.rho.v[i] * inth / h.v[i]);
    return 1.0 - m;
}

SteadyStatePredictionND predict_steady_profiles_nd(const TargetDensityND& target,
                                                   const SeparableMorseKernel& kernel, double D,
                                                   double Phi_F, double K_FL, double K_LF) {
    SteadyStatePredictionND out;
    PeriodicFieldND h = compute_h_nd(target, kernel, D);
    const double inth = integrate(h);
    out.eta_F_bar = h;
    for (double& v : out.eta_F_bar.v) v *= Phi_F / inth;
    const double a = K_FL + K_LF;
    const double b = K_FL - K_LF;
    out.rho_L_bar = PeriodicFieldND(target.rho.grid);
    out.rho_F_bar = PeriodicFieldND(target.rho.grid);
    double expr_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.v.size(); ++i) {
        const double diff = target.rho.v[i] - out.eta_F_bar.v[i];
        out.rho_L_bar.v[i] = 0.5 * (1.0 + b / a) * diff;
        out.rho_F_bar.v[i] = 0.5 * (1.0 - b / a) * diff;
        expr_min = std::min(expr_min, target.rho.v[i] * inth / h.v[i]);
    }
    out.p_hat = 1.0 - expr_min;
    out.feasible = out.rho_L_bar.min() > 0.0 && out.rho_F_bar.min() > 0.0;
    auto [margin, stable] = check_local_stability_nd(target, kernel, D);
    out.stability_margin = margin;
    out.stable = stable;
    return out;
}

} // namespace swarm
