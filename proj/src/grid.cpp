#include "swarm/grid.hpp"

#include "swarm/fft.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarm {

Grid1D Grid1D::make(int n) {
    if (n < 8 || n % 2 != 0)
        throw std::invalid_argument("Grid1D: n must be even and >= 8, got " + std::to_string(n));
    return Grid1D{n, kTwoPi / n};
}

PeriodicField::PeriodicField(Grid1D g, std::vector<double> values) : grid(g), v(std::move(values)) {
    if (static_cast<int>(v.size()) != g.n)
        throw std::invalid_argument("PeriodicField: value count does not match grid");
}

bool PeriodicField::finite() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double PeriodicField::min() const { return *std::min_element(v.begin(), v.end()); }
double PeriodicField::max() const { return *std::max_element(v.begin(), v.end()); }

PeriodicField sample(Grid1D g, const std::function<double(double)>& fn) {
    PeriodicField out(g);
    for (int j = 0; j < g.n; ++j) out.v[j] = fn(g.x(j));
    return out;
}

PeriodicField derivative(const PeriodicField& f, int order) {
    const int n = f.n();
    const double dx = f.grid.dx;
    PeriodicField out(f.grid);
    if (order == 1) {
        const double c = 1.0 / (2.0 * dx);
        for (int j = 0; j < n; ++j) {
            const int jp = j + 1 == n ? 0 : j + 1;
            const int jm = j == 0 ? n - 1 : j - 1;
            out.v[j] = (f.v[jp] - f.v[jm]) * c;
        }
    } else if (order == 2) {
        const double c = 1.0 / (dx * dx);
        for (int j = 0; j < n; ++j) {
            const int jp = j + 1 == n ? 0 : j + 1;
            const int jm = j == 0 ? n - 1 : j - 1;
            out.v[j] = (f.v[jp] - 2.0 * f.v[j] + f.v[jm]) * c;
        }
    } else {
        throw std::invalid_argument("derivative: order must be 1 or 2");
    }
    return out;
}

double integrate(const PeriodicField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.grid.dx;
}

double l2_norm(const PeriodicField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s * f.grid.dx);
}

PeriodicField antiderivative(const PeriodicField& f, bool* nonzero_mean_warning, double tol_mass) {
    const int n = f.n();
    if (nonzero_mean_warning) *nonzero_mean_warning = std::abs(integrate(f)) > tol_mass;
    auto F = fft::rfft(f.v);
    F[0] = 0.0; // removes the mean; also fixes integrate(result) = 0
    for (std::size_t k = 1; k < F.size(); ++k)
        F[k] /= std::complex<double>(0.0, static_cast<double>(k));
    F[n / 2] = 0.0; // Nyquist mode has no odd antiderivative representative
    return PeriodicField(f.grid, fft::irfft(F, n));
}

PeriodicField spectral_derivative(const PeriodicField& f) {
    const int n = f.n();
    auto F = fft::rfft(f.v);
    for (std::size_t k = 0; k < F.size(); ++k)
        F[k] *= std::complex<double>(0.0, static_cast<double>(k));
    if (n % 2 == 0) F[n / 2] = 0.0; // Nyquist mode has no well-defined odd derivative
    return PeriodicField(f.grid, fft::irfft(F, n));
}

namespace {
// Convolution arrays live in displacement order: index m corresponds to
// displacement wrap(m*dx). Kernel samples in x order (index j at x_j =
// (j - n/2)*dx) are rotated by n/2.
std::vector<double> to_displacement_order(const Grid1D& g, const std::vector<double>& x_order) {
    std::vector<double> d(x_order.size());
    const int n = g.n;
    for (int m = 0; m < n; ++m) d[m] = x_order[(m + n / 2) % n];
    return d;
}
} // namespace

ConvolutionPlan::ConvolutionPlan(Grid1D g, const std::vector<double>& kernel_x_order) : grid_(g) {
    if (static_cast<int>(kernel_x_order.size()) != g.n)
        throw std::invalid_argument("ConvolutionPlan: kernel size does not match grid");
    spectrum_ = fft::rfft(to_displacement_order(g, kernel_x_order));
}

ConvolutionPlan::ConvolutionPlan(Grid1D g, const std::function<double(double)>& kernel_fn) : grid_(g) {
    std::vector<double> k(g.n);
    for (int m = 0; m < g.n; ++m) {
        double d = m == 0 ? 0.0 : wrap_angle(m * g.dx);
        if (g.n % 2 == 0 && m == g.n / 2) d = -M_PI;
        k[m] = kernel_fn(d);
    }
    spectrum_ = fft::rfft(k);
}

PeriodicField ConvolutionPlan::apply(const PeriodicField& f) const {
    if (!(f.grid == grid_)) throw std::invalid_argument("ConvolutionPlan: grid mismatch");
    auto F = fft::rfft(f.v);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= spectrum_[k];
    PeriodicField out(grid_, fft::irfft(F, grid_.n));
    for (double& x : out.v) x *= grid_.dx;
    return out;
}

PeriodicField circular_convolve(const PeriodicField& kernel, const PeriodicField& f) {
    if (!(kernel.grid == f.grid)) throw std::invalid_argument("circular_convolve: grid mismatch");
    return ConvolutionPlan(kernel.grid, kernel.v).apply(f);
}

} // namespace swarm
