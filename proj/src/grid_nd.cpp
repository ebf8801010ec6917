#include "swarm/grid_nd.hpp"

#include "swarm/fft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swarm {
namespace {

// Iterates the rfftn spectral layout: all axes full length except the last
// (n_last/2 + 1). fn(flat_index, k0, k1, k2) receives signed wavenumbers.
template <typename F>
void for_each_mode(const GridND& g, F&& fn) {
    const int r = g.rank;
    const int n0 = g.n[0];
    const int n1 = r > 1 ? g.n[1] : 1;
    const int n2 = r > 2 ? g.n[2] : 1;
    const int lastn = g.n[r - 1];
    const int nlast = lastn / 2 + 1;
    auto signed_k = [](int idx, int n) { return idx <= n / 2 ? idx : idx - n; };
    std::size_t flat = 0;
    if (r == 2) {
        for (int i0 = 0; i0 < n0; ++i0)
            for (int i1 = 0; i1 < nlast; ++i1, ++flat) fn(flat, signed_k(i0, n0), i1, 0);
    } else {
        for (int i0 = 0; i0 < n0; ++i0)
            for (int i1 = 0; i1 < n1; ++i1)
                for (int i2 = 0; i2 < nlast; ++i2, ++flat)
                    fn(flat, signed_k(i0, n0), signed_k(i1, n1), i2);
    }
    (void)n2;
}

std::vector<std::complex<double>> forward(const PeriodicFieldND& f) {
    std::vector<std::complex<double>> out(fft::spectral_size(f.grid.n.data(), f.grid.rank));
    fft::rfftn(f.v.data(), out.data(), f.grid.n.data(), f.grid.rank);
    return out;
}

PeriodicFieldND backward(const GridND& g, const std::vector<std::complex<double>>& F) {
    PeriodicFieldND out(g);
    fft::irfftn(F.data(), out.v.data(), g.n.data(), g.rank);
    return out;
}

} // namespace

GridND GridND::make(const std::vector<int>& n_per_axis) {
    if (n_per_axis.size() < 2 || n_per_axis.size() > 3)
        throw std::invalid_argument("GridND: rank must be 2 or 3");
    GridND g;
    g.rank = static_cast<int>(n_per_axis.size());
    for (int a = 0; a < g.rank; ++a) {
        if (n_per_axis[a] < 8 || n_per_axis[a] % 2 != 0)
            throw std::invalid_argument("GridND: n per axis must be even and >= 8");
        g.n[a] = n_per_axis[a];
        g.dx[a] = kTwoPi / n_per_axis[a];
    }
    return g;
}

PeriodicFieldND::PeriodicFieldND(GridND g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
    if (v.size() != g.size()) throw std::invalid_argument("PeriodicFieldND: size mismatch");
}

bool PeriodicFieldND::finite() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
double PeriodicFieldND::min() const { return *std::min_element(v.begin(), v.end()); }
double PeriodicFieldND::max() const { return *std::max_element(v.begin(), v.end()); }

double integrate(const PeriodicFieldND& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.grid.cell_volume();
}

double l2_norm(const PeriodicFieldND& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s * f.grid.cell_volume());
}

PeriodicFieldND derivative_axis(const PeriodicFieldND& f, int axis, int order) {
    const GridND& g = f.grid;
    if (axis < 0 || axis >= g.rank) throw std::invalid_argument("derivative_axis: bad axis");
    PeriodicFieldND out(g);
    const std::size_t stride = g.stride(axis);
    const int na = g.n[axis];
    const std::size_t total = g.size();
    const std::size_t block = stride * static_cast<std::size_t>(na); // one periodic line repeats every `block`
    const double c1 = 1.0 / (2.0 * g.dx[axis]);
    const double c2 = 1.0 / (g.dx[axis] * g.dx[axis]);
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            for (int j = 0; j < na; ++j) {
                const std::size_t idx = base + off + static_cast<std::size_t>(j) * stride;
                const std::size_t jp = base + off + static_cast<std::size_t>(j + 1 == na ? 0 : j + 1) * stride;
                const std::size_t jm = base + off + static_cast<std::size_t>(j == 0 ? na - 1 : j - 1) * stride;
                if (order == 1)
                    out.v[idx] = (f.v[jp] - f.v[jm]) * c1;
                else if (order == 2)
                    out.v[idx] = (f.v[jp] - 2.0 * f.v[idx] + f.v[jm]) * c2;
                else
                    throw std::invalid_argument("derivative_axis: order must be 1 or 2");
            }
        }
    }
    return out;
}

PeriodicFieldND laplacian_fd(const PeriodicFieldND& f) {
    PeriodicFieldND out = derivative_axis(f, 0, 2);
    for (int a = 1; a < f.grid.rank; ++a) {
        PeriodicFieldND d = derivative_axis(f, a, 2);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += d.v[i];
    }
    return out;
}

PeriodicFieldND divergence_fd(const VectorFieldND& w) {
    if (w.empty()) throw std::invalid_argument("divergence_fd: empty vector field");
    PeriodicFieldND out = derivative_axis(w[0], 0, 1);
    for (int a = 1; a < w[0].grid.rank; ++a) {
        PeriodicFieldND d = derivative_axis(w[a], a, 1);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += d.v[i];
    }
    return out;
}

PeriodicFieldND spectral_derivative_axis(const PeriodicFieldND& f, int axis) {
    auto F = forward(f);
    const int r = f.grid.rank;
    const int nlast = f.grid.n[r - 1];
    for_each_mode(f.grid, [&](std::size_t flat, int k0, int k1, int k2) {
        int k = axis == 0 ? k0 : (axis == 1 ? k1 : k2);
        // the Nyquist mode of the differentiated axis has no odd representative
        if (axis < r - 1 && std::abs(k) == f.grid.n[axis] / 2) k = 0;
        if (axis == r - 1 && k == nlast / 2) k = 0;
        F[flat] *= std::complex<double>(0.0, static_cast<double>(k));
    });
    return backward(f.grid, F);
}

PeriodicFieldND spectral_divergence(const VectorFieldND& w) {
    PeriodicFieldND out = spectral_derivative_axis(w[0], 0);
    for (int a = 1; a < w[0].grid.rank; ++a) {
        PeriodicFieldND d = spectral_derivative_axis(w[a], a);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += d.v[i];
    }
    return out;
}

PeriodicFieldND spectral_curl(const VectorFieldND& w) {
    const GridND& g = w[0].grid;
    if (g.rank == 2) {
        PeriodicFieldND a = spectral_derivative_axis(w[1], 0); // d w2 / d x1
        PeriodicFieldND b = spectral_derivative_axis(w[0], 1); // d w1 / d x2
        for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
        return a;
    }
    // 3D: pointwise Euclidean norm of the curl vector
    PeriodicFieldND c0 = spectral_derivative_axis(w[2], 1);
    {
        PeriodicFieldND t = spectral_derivative_axis(w[1], 2);
        for (std::size_t i = 0; i < c0.v.size(); ++i) c0.v[i] -= t.v[i];
    }
    PeriodicFieldND c1 = spectral_derivative_axis(w[0], 2);
    {
        PeriodicFieldND t = spectral_derivative_axis(w[2], 0);
        for (std::size_t i = 0; i < c1.v.size(); ++i) c1.v[i] -= t.v[i];
    }
    PeriodicFieldND c2 = spectral_derivative_axis(w[1], 0);
    {
        PeriodicFieldND t = spectral_derivative_axis(w[0], 1);
        for (std::size_t i = 0; i < c2.v.size(); ++i) c2.v[i] -= t.v[i];
    }
    PeriodicFieldND out(g);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = std::sqrt(c0.v[i] * c0.v[i] + c1.v[i] * c1.v[i] + c2.v[i] * c2.v[i]);
    return out;
}

PeriodicFieldND axis_antiderivative(const PeriodicFieldND& f, int axis) {
    auto F = forward(f);
    const int r = f.grid.rank;
    for_each_mode(f.grid, [&](std::size_t flat, int k0, int k1, int k2) {
        int k = axis == 0 ? k0 : (axis == 1 ? k1 : k2);
        if (std::abs(k) == f.grid.n[axis] / 2) k = 0; // Nyquist dropped
        if (k == 0)
            F[flat] = 0.0;
        else
            F[flat] /= std::complex<double>(0.0, static_cast<double>(k));
    });
    (void)r;
    return backward(f.grid, F);
}

PoissonSolution poisson_solve_nd(const PeriodicFieldND& Y) {
    const GridND& g = Y.grid;
    auto F = forward(Y);
    F[0] = 0.0; // remove mean: the k = 0 mode is the torus solvability constraint
    //phi_hat = Y_hat / |k|^2  (from lap(phi) = -Y)
    std::vector<std::complex<double>> ph(F.size());
    for_each_mode(g, [&](std::size_t flat, int k0, int k1, int k2) {
        const double k2sum = static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1 +
                             static_cast<double>(k2) * k2;
        ph[flat] = k2sum > 0 ? F[flat] / k2sum : 0.0;
    });
    PoissonSolution sol;
    sol.phi = backward(g, ph);
    sol.w.reserve(g.rank);
    for (int a = 0; a < g.rank; ++a) {
        // w = -grad(phi): w_hat = -i k_a phi_hat
        auto wa = ph;
        for_each_mode(g, [&](std::size_t flat, int k0, int k1, int k2) {
            const int k = a == 0 ? k0 : (a == 1 ? k1 : k2);
            wa[flat] *= std::complex<double>(0.0, -static_cast<double>(k));
        });
        sol.w.push_back(backward(g, wa));
    }
    return sol;
}

ConvolutionPlanND::ConvolutionPlanND(GridND g, const std::vector<double>& kernel_disp_order)
    : grid_(g) {
    if (kernel_disp_order.size() != g.size())
        throw std::invalid_argument("ConvolutionPlanND: kernel size mismatch");
    spectrum_.resize(fft::spectral_size(g.n.data(), g.rank));
    fft::rfftn(kernel_disp_order.data(), spectrum_.data(), g.n.data(), g.rank);
}

PeriodicFieldND ConvolutionPlanND::apply(const PeriodicFieldND& f) const {
    if (!(f.grid == grid_)) throw std::invalid_argument("ConvolutionPlanND: grid mismatch");
    auto F = forward(f);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= spectrum_[i];
    PeriodicFieldND out = backward(grid_, F);
    const double scale = grid_.cell_volume();
    for (double& x : out.v) x *= scale;
    return out;
}

} // namespace swarm
