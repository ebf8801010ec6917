#include "swarm/kernels.hpp"

#include "swarm/errors.hpp"
#include "swarm/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace swarm {

void MorseParams::validate() const {
    if (!(L_a > 0.0 && L_a <= kTwoPi) || !(L_r > 0.0 && L_r <= kTwoPi))
        throw ConfigError("Morse length scales must lie in (0, 2pi]");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("Morse alpha must be finite and >= 0");
    if (!std::isfinite(strength)) throw ConfigError("Morse strength must be finite");
}

double morse_component(double x, double L) {
    const double ax = std::abs(x);
    const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return s / (std::exp(kTwoPi / L) - 1.0) * (std::exp((kTwoPi - ax) / L) - std::exp(ax / L));
}

double morse_kernel_1d(const MorseParams& p, double x) {
    return p.strength *
           (morse_component(x, p.L_r) / p.L_r - (p.alpha / p.L_a) * morse_component(x, p.L_a));
}

double morse_component_potential(double x, double L) {
    const double ax = std::abs(x);
    return -L * (std::exp((kTwoPi - ax) / L) + std::exp(ax / L)) / (std::exp(kTwoPi / L) - 1.0);
}

double morse_potential_1d(const MorseParams& p, double x) {
    // mean over S of each component potential is -L^2/pi
    const double mean = (-p.L_r + p.alpha * p.L_a) / M_PI;
    return p.strength * (morse_component_potential(x, p.L_r) / p.L_r -
                         (p.alpha / p.L_a) * morse_component_potential(x, p.L_a) - mean);
}

PeriodicField sample_morse_kernel(const MorseParams& p, Grid1D g) {
    p.validate();
    return sample(g, [&](double x) { return morse_kernel_1d(p, x); });
}

ConvolutionPlan morse_convolution(const MorseParams& p, Grid1D g) {
    p.validate();
    return ConvolutionPlan(g, [&](double d) { return morse_kernel_1d(p, d); });
}

namespace {

// Samples in displacement order: index m -> wrapped m*dx, exact 0 at m = 0.
std::vector<double> sample_displacements(int n, double dx, const std::function<double(double)>& fn) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        double d = m == 0 ? 0.0 : wrap_angle(m * dx);
        if (m == n / 2) d = -M_PI;
        out[m] = fn(d);
    }
    return out;
}

// Discrete zero-mean spectral antiderivative of a 1D sample vector.
std::vector<double> discrete_antiderivative(const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    auto F = fft::rfft(f);
    F[0] = 0.0;
    for (std::size_t k = 1; k < F.size(); ++k)
        F[k] /= std::complex<double>(0.0, static_cast<double>(k));
    F[n / 2] = 0.0;
    return fft::irfft(F, n);
}

double transverse_l2_norm_1d(const MorseParams& p) {
    const int m = 1 << 14;
    const double h = M_PI / m;
    const double w0 = morse_potential_1d(p, 0.0);
    auto g2 = [&](double x) {
        const double val = morse_potential_1d(p, x) / w0;
        return val * val;
    };
    double s = g2(0.0) + g2(M_PI);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * g2(i * h);
    return std::sqrt(2.0 * s * h / 3.0);
}

} // namespace

double morse_kernel_l2_norm(const MorseParams& p) {
    // composite Simpson on [0, pi] with the origin sampled at the one-sided
    // limit f(0+) = strength (1/L_r - alpha/L_a)
    const int m = 1 << 14;
    const double h = M_PI / m;
    auto f2 = [&](double x) {
        const double val =
            x == 0.0 ? p.strength * (1.0 / p.L_r - p.alpha / p.L_a) : morse_kernel_1d(p, x);
        return val * val;
    };
    double s = f2(0.0) + f2(M_PI);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f2(i * h);
    return std::sqrt(2.0 * s * h / 3.0); // f^2 is even
}

SeparableMorseKernel::SeparableMorseKernel(std::vector<MorseParams> per_axis, GridND g)
    : params_(std::move(per_axis)), grid_(g) {
    if (static_cast<int>(params_.size()) != g.rank)
        throw std::invalid_argument("SeparableMorseKernel: one MorseParams per axis required");
    for (const auto& p : params_) p.validate();

    axis_kernel_.resize(g.rank);
    axis_pot_.resize(g.rank);
    pot_at_zero_.resize(g.rank);
    for (int a = 0; a < g.rank; ++a) {
        axis_kernel_[a] = sample_displacements(
            g.n[a], g.dx[a], [&](double d) { return morse_kernel_1d(params_[a], d); });
        axis_pot_[a] = discrete_antiderivative(axis_kernel_[a]);
        pot_at_zero_[a] = axis_pot_[a][0];
        if (std::abs(pot_at_zero_[a]) < 1e-12)
            throw std::invalid_argument("SeparableMorseKernel: degenerate potential at origin");
    }

    const int r = g.rank;
    const int n0 = g.n[0], n1 = g.n[1], n2 = r > 2 ? g.n[2] : 1;
    auto flatten = [&](int i0, int i1, int i2) {
        return (static_cast<std::size_t>(i0) * n1 + i1) * n2 + i2;
    };
    samples_.resize(r);
    plans_.resize(r);
    for (int a = 0; a < r; ++a) {
        std::vector<double> comp(g.size());
        for (int i0 = 0; i0 < n0; ++i0)
            for (int i1 = 0; i1 < n1; ++i1)
                for (int i2 = 0; i2 < n2; ++i2) {
                    const int idx[3] = {i0, i1, i2};
                    double val = axis_kernel_[a][idx[a]];
                    for (int b = 0; b < r; ++b)
                        if (b != a) val *= axis_pot_[b][idx[b]] / pot_at_zero_[b];
                    comp[flatten(i0, i1, i2)] = val;
                }
        samples_[a] = comp;
        plans_[a] = ConvolutionPlanND(g, comp);
    }
    // scalar potential anchored on axis 0: G = prod_j Wt_j / prod_{j>0} Wt_j(0)
    std::vector<double> pot(g.size());
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const int idx[3] = {i0, i1, i2};
                double val = axis_pot_[0][idx[0]];
                for (int b = 1; b < r; ++b) val *= axis_pot_[b][idx[b]] / pot_at_zero_[b];
                pot[flatten(i0, i1, i2)] = val;
            }
    potential_plan_ = ConvolutionPlanND(g, pot);
}

double SeparableMorseKernel::eval_component(int axis, const std::vector<double>& x) const {
    double val = morse_kernel_1d(params_[axis], wrap_angle(x[axis]));
    for (int b = 0; b < grid_.rank; ++b)
        if (b != axis)
            val *= morse_potential_1d(params_[b], wrap_angle(x[b])) /
                   morse_potential_1d(params_[b], 0.0);
    return val;
}

std::vector<double> SeparableMorseKernel::eval(const std::vector<double>& x) const {
    std::vector<double> out(grid_.rank);
    for (int a = 0; a < grid_.rank; ++a) out[a] = eval_component(a, x);
    return out;
}

PeriodicFieldND SeparableMorseKernel::convolve_component(int axis, const PeriodicFieldND& f) const {
    return plans_[axis].apply(f);
}

VectorFieldND SeparableMorseKernel::convolve(const PeriodicFieldND& f) const {
    VectorFieldND out;
    out.reserve(grid_.rank);
    for (int a = 0; a < grid_.rank; ++a) out.push_back(plans_[a].apply(f));
    return out;
}

PeriodicFieldND SeparableMorseKernel::convolve_potential(const PeriodicFieldND& f) const {
    return potential_plan_.apply(f);
}

double SeparableMorseKernel::component_l2_norm(int axis) const {
    double norm = morse_kernel_l2_norm(params_[axis]);
    for (int b = 0; b < grid_.rank; ++b)
        if (b != axis) norm *= transverse_l2_norm_1d(params_[b]);
    return norm;
}

double check_isotropy(const SeparableMorseKernel& kernel, const PeriodicFieldND& psi) {
    const int r = kernel.rank();
    std::vector<PeriodicFieldND> anti;
    anti.reserve(r);
    for (int a = 0; a < r; ++a)
        anti.push_back(axis_antiderivative(kernel.convolve_component(a, psi), a));
    double residual = 0.0;
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b)
            for (std::size_t i = 0; i < anti[a].v.size(); ++i)
                residual = std::max(residual, std::abs(anti[a].v[i] - anti[b].v[i]));
    return residual;
}

void VonMisesParams::validate() const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("von Mises concentration must be >= 0");
    if (!std::isfinite(mu)) throw ConfigError("von Mises mean must be finite");
}

std::string TargetDensity::describe() const {
    switch (kind) {
        case TargetKind::Uniform: return "uniform";
        case TargetKind::Monomodal: return "monomodal von Mises";
        case TargetKind::Bimodal: return "bimodal von Mises";
        default: return "custom samples";
    }
}

TargetDensity uniform_target(Grid1D g) {
    return {PeriodicField(g, 1.0 / kTwoPi), TargetKind::Uniform};
}

TargetDensity von_mises(const VonMisesParams& p, Grid1D g) {
    p.validate();
    PeriodicField rho = sample(g, [&](double x) { return std::exp(p.k * std::cos(x - p.mu)); });
    const double z = 1.0 / integrate(rho);
    for (double& v : rho.v) v *= z;
    return {std::move(rho), p.k == 0.0 ? TargetKind::Uniform : TargetKind::Monomodal};
}

TargetDensity bimodal_von_mises(double mu1, double mu2, double k, Grid1D g) {
    VonMisesParams{mu1, k}.validate();
    PeriodicField rho = sample(g, [&](double x) {
        return std::exp(k * std::cos(x - mu1)) + std::exp(k * std::cos(x - mu2));
    });
    const double z = 1.0 / integrate(rho);
    for (double& v : rho.v) v *= z;
    return {std::move(rho), TargetKind::Bimodal};
}

TargetDensityND von_mises_nd(const std::vector<VonMisesParams>& per_axis, GridND g) {
    if (static_cast<int>(per_axis.size()) != g.rank)
        throw std::invalid_argument("von_mises_nd: one parameter set per axis required");
    const int n0 = g.n[0], n1 = g.n[1], n2 = g.rank > 2 ? g.n[2] : 1;
    std::vector<std::vector<double>> factor(g.rank);
    for (int a = 0; a < g.rank; ++a) {
        per_axis[a].validate();
        factor[a].resize(g.n[a]);
        for (int j = 0; j < g.n[a]; ++j)
            factor[a][j] = std::exp(per_axis[a].k * std::cos(g.x(a, j) - per_axis[a].mu));
    }
    PeriodicFieldND rho(g);
    std::size_t flat = 0;
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2, ++flat) {
                double val = factor[0][i0] * factor[1][i1];
                if (g.rank > 2) val *= factor[2][i2];
                rho.v[flat] = val;
            }
    const double z = 1.0 / integrate(rho);
    for (double& v : rho.v) v *= z;
    return {std::move(rho), TargetKind::Monomodal};
}

} // namespace swarm
