#pragma once

#include "swarm/grid.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace swarm {

/// Tensor product of 1D periodic grids on [-pi, pi)^d, d = 2 or 3.
/// Row-major storage, last axis fastest.
struct GridND {
    int rank = 0;
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> dx{0.0, 0.0, 0.0};

    static GridND make(const std::vector<int>& n_per_axis);

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < rank; ++a) s *= static_cast<std::size_t>(n[a]);
        return s;
    }
    double x(int axis, int j) const { return (j - n[axis] / 2) * dx[axis]; }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < rank; ++a) v *= dx[a];
        return v;
    }
    /// Stride of one step along `axis` in the flattened array.
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = axis + 1; a < rank; ++a) s *= static_cast<std::size_t>(n[a]);
        return s;
    }
    bool operator==(const GridND&) const = default;
};

struct PeriodicFieldND {
    GridND grid;
    std::vector<double> v;

    PeriodicFieldND() = default;
    explicit PeriodicFieldND(GridND g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    PeriodicFieldND(GridND g, std::vector<double> values);

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    bool finite() const;
    double min() const;
    double max() const;
};

/// One scalar component per axis.
using VectorFieldND = std::vector<PeriodicFieldND>;

double integrate(const PeriodicFieldND& f);
double l2_norm(const PeriodicFieldND& f);

/// Central difference along one axis.
PeriodicFieldND derivative_axis(const PeriodicFieldND& f, int axis, int order);

/// Central-difference Laplacian (compact 2nd-difference stencil per axis).
PeriodicFieldND laplacian_fd(const PeriodicFieldND& f);

/// Central-difference divergence of a vector field.
PeriodicFieldND divergence_fd(const VectorFieldND& w);

/// Spectral operators, used by the Poisson solver and its verification.
PeriodicFieldND spectral_derivative_axis(const PeriodicFieldND& f, int axis);
PeriodicFieldND spectral_divergence(const VectorFieldND& w);
/// 2D scalar curl dw2/dx1 - dw1/dx2; in 3D returns the curl magnitude field.
PeriodicFieldND spectral_curl(const VectorFieldND& w);

/// Zero-mean antiderivative along one axis: modes with k_axis = 0 are
/// dropped (per-line zero-mean convention), the rest divided by i*k_axis.
PeriodicFieldND axis_antiderivative(const PeriodicFieldND& f, int axis);

struct PoissonSolution {
    PeriodicFieldND phi; ///< mean-zero potential with lap(phi) = -(Y - mean Y)
    VectorFieldND w;     ///< w = -grad(phi): div w = Y - mean Y, curl w = 0
};

/// Spectral Poisson solve on the torus. The mean of Y is subtracted before
/// solving (the k = 0 mode is not invertible); analytically the control
/// forcing has zero mean, so this only removes floating-point drift.
PoissonSolution poisson_solve_nd(const PeriodicFieldND& Y);

/// Separable nD circular convolution with cached component spectra.
class ConvolutionPlanND {
public:
    ConvolutionPlanND() = default;
    /// kernel samples given in displacement order (flattened row-major).
    ConvolutionPlanND(GridND g, const std::vector<double>& kernel_disp_order);
    PeriodicFieldND apply(const PeriodicFieldND& f) const;
    const GridND& grid() const { return grid_; }
    bool empty() const { return spectrum_.empty(); }

private:
    GridND grid_;
    std::vector<std::complex<double>> spectrum_;
};

} // namespace swarm
