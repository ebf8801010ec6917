#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace swarm {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps a coordinate or displacement into [-pi, pi).
inline double wrap_angle(double x) {
    double y = std::remainder(x, kTwoPi);
    if (y >= M_PI) y -= kTwoPi;
    return y;
}

/// Uniform periodic grid on S = [-pi, pi), x_j = (j - n/2) * dx.
/// The midpoint j = n/2 is exactly 0 so that odd kernels sample their
/// jump at the origin as 0 (sgn(0) = 0) rather than a rounding artifact.
struct Grid1D {
    int n = 0;
    double dx = 0.0;

    static Grid1D make(int n);

    double x(int j) const { return (j - n / 2) * dx; }
    int wrap(long long j) const {
        long long m = j % n;
        return static_cast<int>(m < 0 ? m + n : m);
    }
    bool operator==(const Grid1D&) const = default;
};

/// Scalar samples on a Grid1D; density (1/rad) or velocity (rad/time)
/// depending on context. Plain value type, cheap to copy and share.
struct PeriodicField {
    Grid1D grid;
    std::vector<double> v;

    PeriodicField() = default;
    explicit PeriodicField(Grid1D g, double fill = 0.0) : grid(g), v(g.n, fill) {}
    PeriodicField(Grid1D g, std::vector<double> values);

    int n() const { return grid.n; }
    double& operator[](std::size_t j) { return v[j]; }
    double operator[](std::size_t j) const { return v[j]; }

    bool finite() const;
    double min() const;
    double max() const;
};

/// Samples fn(x_j) onto the grid.
PeriodicField sample(Grid1D g, const std::function<double(double)>& fn);

/// Central finite difference, first (order=1) or second (order=2)
/// derivative with modulo-n wraparound.
PeriodicField derivative(const PeriodicField& f, int order);

/// Rectangle-rule quadrature, dx * sum. Spectrally accurate for smooth
/// periodic integrands.
double integrate(const PeriodicField& f);

/// L2 norm sqrt(integral of f^2).
double l2_norm(const PeriodicField& f);

/// Zero-mean spectral antiderivative: F with F' = f and integrate(F) = 0.
/// Only periodic when integrate(f) = 0; if |integrate(f)| > tol_mass the
/// optional warning flag is set and the result is only locally an
/// antiderivative (the mean is removed before inverting).
PeriodicField antiderivative(const PeriodicField& f, bool* nonzero_mean_warning = nullptr,
                             double tol_mass = 1e-10);

/// Spectral first derivative (multiplication by ik). The time steppers use
/// central differences; this is exposed for spectral verification paths.
PeriodicField spectral_derivative(const PeriodicField& f);

/// Circular convolution (kernel * f)(x_i) = dx * sum_j kernel(x_i - x_j) f(x_j),
/// continuous-integral scaling. kernel is given as grid samples in x order.
PeriodicField circular_convolve(const PeriodicField& kernel, const PeriodicField& f);

/// Caches the kernel spectrum so repeated convolutions against the same
/// kernel cost two transforms each.
class ConvolutionPlan {
public:
    ConvolutionPlan() = default;
    /// kernel_x_order: samples kernel(x_j) on the grid.
    ConvolutionPlan(Grid1D g, const std::vector<double>& kernel_x_order);
    /// Builds the kernel samples from a callable evaluated at wrapped
    /// displacements (exact 0 at displacement 0).
    ConvolutionPlan(Grid1D g, const std::function<double(double)>& kernel_fn);

    PeriodicField apply(const PeriodicField& f) const;
    const Grid1D& grid() const { return grid_; }
    bool empty() const { return spectrum_.empty(); }

private:
    Grid1D grid_;
    std::vector<std::complex<double>> spectrum_; // rfft of kernel in displacement order
};

} // namespace swarm
