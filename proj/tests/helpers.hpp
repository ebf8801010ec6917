#pragma once

// Shared test oracles, independent of the implementation paths they check.

#include "swarm/grid.hpp"
#include "swarm/rng.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace testutil {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fb, double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

inline double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                            double eps = 1e-13) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

inline swarm::PeriodicField random_smooth_field(swarm::Grid1D g, unsigned seed, int modes = 8) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    swarm::PeriodicField f(g);
    for (int k = 0; k <= modes; ++k) {
        const double a = nd(rng), b = nd(rng);
        for (int j = 0; j < g.n; ++j)
            f.v[j] += a * std::cos(k * g.x(j)) + b * std::sin(k * g.x(j));
    }
    return f;
}

/// A smooth strictly positive density with the requested mass.
inline swarm::PeriodicField random_density(swarm::Grid1D g, unsigned seed, double mass = 1.0) {
    swarm::PeriodicField f = random_smooth_field(g, seed, 5);
    double lo = f.min();
    for (double& v : f.v) v = v - lo + 0.3;
    const double scale = mass / swarm::integrate(f);
    for (double& v : f.v) v *= scale;
    return f;
}

/// von Mises sampler (Best & Fisher 1979 wrapped-Cauchy rejection) driven
/// by the counter RNG so tests are reproducible.
class VonMisesSampler {
public:
    VonMisesSampler(double mu, double kappa, std::uint64_t seed)
        : mu_(mu), kappa_(kappa), rng_(seed) {
        const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
        r_ = (1.0 + rho * rho) / (2.0 * rho);
    }
    double operator()() {
        for (;;) {
            const double u1 = next(), u2 = next(), u3 = next();
            const double z = std::cos(M_PI * u1);
            const double f = (1.0 + r_ * z) / (r_ + z);
            const double c = kappa_ * (r_ - f);
            if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
                const double sign = u3 < 0.5 ? -1.0 : 1.0;
                return swarm::wrap_angle(mu_ + sign * std::acos(f));
            }
        }
    }

private:
    double next() { return rng_.uniform(counter_++, 0, 9); }
    double mu_, kappa_, r_;
    swarm::RngStream rng_;
    std::uint64_t counter_ = 0;
};

} // namespace testutil
