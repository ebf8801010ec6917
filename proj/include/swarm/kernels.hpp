#pragma once

#include "swarm/grid.hpp"
#include "swarm/grid_nd.hpp"

#include <string>
#include <vector>

namespace swarm {

/// Periodic Morse interaction kernel parameters: short-range repulsion on
/// scale L_r, long-range attraction on scale L_a weighted by alpha.
/// strength scales the whole kernel; 0 disables interactions (f = 0).
struct MorseParams {
    double L_a = M_PI;
    double L_r = M_PI / 2;
    double alpha = 2.0;
    double strength = 1.0;

    static MorseParams zero() { return {M_PI, M_PI / 2, 0.0, 0.0}; }
    void validate() const;
    bool operator==(const MorseParams&) const = default;
};

/// One exponential component f_i(x) = sgn(x)/(exp(2pi/L)-1) *
/// [exp((2pi-|x|)/L) - exp(|x|/L)], x in [-pi, pi).
double morse_component(double x, double L);

/// f(x) = f_r(x)/L_r - (alpha/L_a) f_a(x). Odd, zero-mean, with a jump
/// discontinuity at the origin where f(0) = 0 (sgn(0) = 0).
double morse_kernel_1d(const MorseParams& p, double x);

/// Antiderivative of morse_component (even, kink at the origin).
double morse_component_potential(double x, double L);

/// Zero-mean antiderivative of the 1D Morse kernel (the pair potential up
/// to sign). Mean of the raw antiderivative over S is (-L_r + alpha L_a)/pi.
double morse_potential_1d(const MorseParams& p, double x);

/// L2(S) norm of the 1D kernel by refined jump-aware quadrature (the
/// kernel jumps at the origin, where the plain grid rectangle rule is
/// only first-order accurate).
double morse_kernel_l2_norm(const MorseParams& p);

/// Kernel samples on a grid in x order (for circular_convolve and output).
PeriodicField sample_morse_kernel(const MorseParams& p, Grid1D g);

/// Cached convolution plan for a sampled Morse kernel.
ConvolutionPlan morse_convolution(const MorseParams& p, Grid1D g);

/// Separable d-dimensional Morse kernel: the gradient of the scalar
/// potential G(x) = prod_i Wt(x_i) / Wt(0)^(d-1), where Wt is the zero-mean
/// 1D Morse potential of that axis. Componentwise
///   f_i(x) = f_1D(x_i) * prod_{j != i} Wt(x_j)/Wt(0),
/// which reduces to the 1D kernel along each axis and makes the axis-wise
/// antiderivatives of f_i * psi coincide for every periodic psi (the
/// Theorem-5 isotropy hypothesis) when all axes share parameters.
///
/// Grid sampling uses the discrete spectral antiderivative of the sampled
/// 1D kernel as the transverse factor, so the isotropy identity holds
/// exactly on the grid; eval() uses the closed-form potential (the two
/// agree to O(dx^2)).
class SeparableMorseKernel {
public:
    SeparableMorseKernel(std::vector<MorseParams> per_axis, GridND g);

    int rank() const { return grid_.rank; }
    const GridND& grid() const { return grid_; }
    const std::vector<MorseParams>& params() const { return params_; }

    /// Closed-form component evaluation at an arbitrary point.
    double eval_component(int axis, const std::vector<double>& x) const;
    std::vector<double> eval(const std::vector<double>& x) const;

    /// Grid samples of component `axis` in displacement order.
    const std::vector<double>& component_samples(int axis) const { return samples_[axis]; }

    /// Convolution f_i * f for component `axis` (cached spectra).
    PeriodicFieldND convolve_component(int axis, const PeriodicFieldND& f) const;
    VectorFieldND convolve(const PeriodicFieldND& f) const;

    /// Convolution of the scalar potential G with f (used for the nD h).
    PeriodicFieldND convolve_potential(const PeriodicFieldND& f) const;

    /// L2 norm over Omega of component `axis` (refined jump-aware quadrature
    /// along the kernel axis, grid quadrature transverse).
    double component_l2_norm(int axis) const;

private:
    std::vector<MorseParams> params_;
    GridND grid_;
    std::vector<std::vector<double>> samples_;     // per-axis component, displacement order
    std::vector<ConvolutionPlanND> plans_;         // per-axis component
    ConvolutionPlanND potential_plan_;             // scalar potential G
    std::vector<std::vector<double>> axis_kernel_; // sampled 1D kernel per axis
    std::vector<std::vector<double>> axis_pot_;    // discrete antiderivative per axis
    std::vector<double> pot_at_zero_;              // axis_pot_ at displacement 0
};

/// Isotropy certificate for an nD kernel: the per-axis zero-mean
/// antiderivatives of f_i * psi must coincide as functions on the torus.
/// Returns the max pairwise L-infinity discrepancy; small residual
/// certifies the Theorem-5 hypothesis numerically.
double check_isotropy(const SeparableMorseKernel& kernel, const PeriodicFieldND& psi);

/// von Mises density parameters; Z is computed by grid quadrature at the
/// working resolution so discrete unit mass holds exactly there.
struct VonMisesParams {
    double mu = 0.0;
    double k = 1.0;

    void validate() const;
};

enum class TargetKind { Uniform, Monomodal, Bimodal, Custom };

/// Desired density profile: nonnegative, unit mass by construction.
struct TargetDensity {
    PeriodicField rho;
    TargetKind kind = TargetKind::Custom;
    std::string describe() const;
};

struct TargetDensityND {
    PeriodicFieldND rho;
    TargetKind kind = TargetKind::Custom;
};

TargetDensity uniform_target(Grid1D g);
TargetDensity von_mises(const VonMisesParams& p, Grid1D g);
TargetDensity bimodal_von_mises(double mu1, double mu2, double k, Grid1D g);

/// Product of per-axis von Mises factors, unit mass on Omega.
TargetDensityND von_mises_nd(const std::vector<VonMisesParams>& per_axis, GridND g);

} // namespace swarm
