#include "swarm/metrics.hpp"

#include "swarm/errors.hpp"

#include <cmath>

namespace swarm {
namespace {

double kl_sum(const double* rho, const double* target, std::size_t n, double cell) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rho[i];
        if (r < 1e-14) continue; // 0 log 0 = 0 convention
        s += r * std::log(r / target[i]);
    }
    return s * cell;
}

} // namespace

double kl_divergence(const PeriodicField& rho, const PeriodicField& target) {
    if (target.min() <= 0.0) throw TargetVanishes();
    return kl_sum(rho.v.data(), target.v.data(), rho.v.size(), rho.grid.dx);
}

double kl_divergence(const PeriodicFieldND& rho, const PeriodicFieldND& target) {
    if (target.min() <= 0.0) throw TargetVanishes();
    return kl_sum(rho.v.data(), target.v.data(), rho.v.size(), rho.grid.cell_volume());
}

double l2_error(const PeriodicField& rho, const PeriodicField& target) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.v.size(); ++i) {
        const double d = target.v[i] - rho.v[i];
        s += d * d;
    }
    return std::sqrt(s * rho.grid.dx);
}

double l2_error(const PeriodicFieldND& rho, const PeriodicFieldND& target) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.v.size(); ++i) {
        const double d = target.v[i] - rho.v[i];
        s += d * d;
    }
    return std::sqrt(s * rho.grid.cell_volume());
}

} // namespace swarm
