#include "swarm/fft.hpp"
#include "swarm/grid.hpp"
#include "swarm/grid_nd.hpp"
#include "swarm/kernels.hpp"
#include "swarm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace swarm;

namespace {

// adaptive Simpson quadrature, independent of the grid rectangle rule
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fb, double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double eps = 1e-13) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

PeriodicField random_field(Grid1D g, unsigned seed, int modes = 8) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    PeriodicField f(g);
    for (int k = 0; k <= modes; ++k) {
        const double a = nd(rng), b = nd(rng);
        for (int j = 0; j < g.n; ++j) f.v[j] += a * std::cos(k * g.x(j)) + b * std::sin(k * g.x(j));
    }
    return f;
}

// direct O(n^2) cyclic convolution of x-order kernel samples
PeriodicField convolve_direct(const PeriodicField& kernel, const PeriodicField& f) {
    const Grid1D g = f.grid;
    PeriodicField out(g);
    for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.n; ++j) s += kernel.v[g.wrap(i - j + g.n / 2)] * f.v[j];
        out.v[i] = s * g.dx;
    }
    return out;
}

} // namespace

TEST_CASE("grid construction validates n") {
    CHECK_THROWS(Grid1D::make(7));
    CHECK_THROWS(Grid1D::make(6));
    CHECK_THROWS(Grid1D::make(9));
    const Grid1D g = Grid1D::make(600);
    CHECK(g.dx == doctest::Approx(kTwoPi / 600).epsilon(1e-15));
    CHECK(g.x(0) == doctest::Approx(-M_PI).epsilon(1e-15));
    CHECK(g.x(300) == 0.0); // exact zero at the midpoint
}

TEST_CASE("derivative of a constant vanishes exactly") {
    const Grid1D g = Grid1D::make(64);
    const PeriodicField c(g, 3.7);
    for (int order : {1, 2}) {
        const PeriodicField d = derivative(c, order);
        for (double v : d.v) CHECK(v == 0.0);
    }
}

TEST_CASE("central differences are second-order accurate on sin") {
    auto max_err = [](int n, int order) {
        const Grid1D g = Grid1D::make(n);
        const PeriodicField f = sample(g, [](double x) { return std::sin(x); });
        const PeriodicField d = derivative(f, order);
        double e = 0.0;
        for (int j = 0; j < g.n; ++j) {
            const double exact = order == 1 ? std::cos(g.x(j)) : -std::sin(g.x(j));
            e = std::max(e, std::abs(d.v[j] - exact));
        }
        return e;
    };
    for (int order : {1, 2}) {
        const double e1 = max_err(256, order);
        const double e2 = max_err(512, order);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.10)); // halving dx cuts error 4x
    }
}

TEST_CASE("integrate: uniform, odd, and von Mises mass") {
    const Grid1D g = Grid1D::make(600);
    CHECK(integrate(PeriodicField(g, 1.0 / kTwoPi)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(integrate(sample(g, [](double x) { return std::sin(x); }))) < 1e-13);

    // normalization constant cross-checked against adaptive quadrature
    const double Z_oracle = 1.0 / adaptive_quad(
        [](double x) { return std::exp(3.0 * std::cos(x)); }, -M_PI, M_PI);
    const PeriodicField vm = sample(g, [&](double x) {
        return Z_oracle * std::exp(3.0 * std::cos(x));
    });
    CHECK(std::abs(integrate(vm) - 1.0) < 1e-10);
}

TEST_CASE("antiderivative: closed forms and zero-mean convention") {
    const Grid1D g = Grid1D::make(256);
    SUBCASE("zero maps to zero") {
        const PeriodicField F = antiderivative(PeriodicField(g));
        for (double v : F.v) CHECK(v == 0.0);
    }
    SUBCASE("cos -> sin") {
        const PeriodicField F = antiderivative(sample(g, [](double x) { return std::cos(x); }));
        for (int j = 0; j < g.n; ++j)
            CHECK(F.v[j] == doctest::Approx(std::sin(g.x(j))).epsilon(1e-10));
    }
    SUBCASE("sin -> -cos (already zero mean)") {
        const PeriodicField F = antiderivative(sample(g, [](double x) { return std::sin(x); }));
        for (int j = 0; j < g.n; ++j)
            CHECK(F.v[j] == doctest::Approx(-std::cos(g.x(j))).epsilon(1e-10));
        CHECK(std::abs(integrate(F)) < 1e-12);
    }
    SUBCASE("nonzero mean sets the warning flag") {
        bool warn = false;
        antiderivative(PeriodicField(g, 1.0), &warn);
        CHECK(warn);
        warn = true;
        antiderivative(sample(g, [](double x) { return std::sin(x); }), &warn);
        CHECK(!warn);
    }
}

TEST_CASE("derivative-antiderivative round trip at order dx^2") {
    for (int n : {128, 256}) {
        const Grid1D g = Grid1D::make(n);
        PeriodicField f = random_field(g, 11, 6);
        const double mean = integrate(f) / kTwoPi;
        for (double& v : f.v) v -= mean;
        const PeriodicField back = derivative(antiderivative(f), 1);
        double err = 0.0;
        for (int j = 0; j < g.n; ++j) err = std::max(err, std::abs(back.v[j] - f.v[j]));
        // truncation of the central difference on resolved modes
        CHECK(err < 50.0 * g.dx * g.dx);
    }
}

TEST_CASE("integrate(derivative(f)) telescopes to zero") {
    const Grid1D g = Grid1D::make(300);
    const PeriodicField f = random_field(g, 5);
    CHECK(std::abs(integrate(derivative(f, 1))) < 1e-12);
    CHECK(std::abs(integrate(derivative(f, 2))) < 1e-10);
}

TEST_CASE("circular convolution: trivial cases") {
    const Grid1D g = Grid1D::make(128);
    const PeriodicField kernel = sample_morse_kernel({M_PI, M_PI / 6, 2.0}, g);
    SUBCASE("zero input") {
        const PeriodicField out = circular_convolve(kernel, PeriodicField(g));
        for (double v : out.v) CHECK(v == 0.0);
    }
    SUBCASE("odd kernel against constant density vanishes") {
        const PeriodicField out = circular_convolve(kernel, PeriodicField(g, 1.0 / kTwoPi));
        for (double v : out.v) CHECK(std::abs(v) < 1e-14);
    }
}

TEST_CASE("fft convolution matches the direct O(n^2) sum") {
    // Morse kernel against von Mises and randomized fields
    for (int n : {128, 600}) {
        const Grid1D g = Grid1D::make(n);
        const PeriodicField kernel = sample_morse_kernel({M_PI, M_PI / 2, 2.0}, g);
        const TargetDensity vm = von_mises({0.0, 3.0}, g);
        const PeriodicField a = circular_convolve(kernel, vm.rho);
        const PeriodicField b = convolve_direct(kernel, vm.rho);
        for (int j = 0; j < n; ++j) CHECK(std::abs(a.v[j] - b.v[j]) < 1e-10);

        const PeriodicField f = random_field(g, 100 + n);
        const PeriodicField c = circular_convolve(kernel, f);
        const PeriodicField d = convolve_direct(kernel, f);
        for (int j = 0; j < n; ++j) CHECK(std::abs(c.v[j] - d.v[j]) < 1e-10);
    }
}

TEST_CASE("convolution is bilinear and shift-equivariant") {
    const Grid1D g = Grid1D::make(128);
    const PeriodicField kernel = sample_morse_kernel({M_PI, M_PI / 3, 1.5}, g);
    const PeriodicField f = random_field(g, 21);
    const PeriodicField h = random_field(g, 22);
    SUBCASE("bilinearity") {
        PeriodicField combo(g);
        for (int j = 0; j < g.n; ++j) combo.v[j] = 2.0 * f.v[j] - 3.0 * h.v[j];
        const PeriodicField lhs = circular_convolve(kernel, combo);
        const PeriodicField cf = circular_convolve(kernel, f);
        const PeriodicField ch = circular_convolve(kernel, h);
        for (int j = 0; j < g.n; ++j)
            CHECK(lhs.v[j] == doctest::Approx(2.0 * cf.v[j] - 3.0 * ch.v[j]).epsilon(1e-11));
    }
    SUBCASE("cyclic shift equivariance") {
        const int shift = 17;
        PeriodicField fs(g);
        for (int j = 0; j < g.n; ++j) fs.v[j] = f.v[g.wrap(j - shift)];
        const PeriodicField cs = circular_convolve(kernel, fs);
        const PeriodicField c = circular_convolve(kernel, f);
        for (int j = 0; j < g.n; ++j)
            CHECK(cs.v[j] == doctest::Approx(c.v[g.wrap(j - shift)]).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("spectral derivative matches analytic on smooth fields") {
    const Grid1D g = Grid1D::make(128);
    const PeriodicField f = sample(g, [](double x) { return std::exp(std::cos(x)); });
    const PeriodicField d = spectral_derivative(f);
    for (int j = 0; j < g.n; ++j) {
        const double exact = -std::sin(g.x(j)) * std::exp(std::cos(g.x(j)));
        CHECK(d.v[j] == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
    }
}

// ---------------------------------------------------------------------------
// spectral Poisson solver
// ---------------------------------------------------------------------------

TEST_CASE("poisson: zero forcing gives zero potential and flux") {
    const GridND g = GridND::make({16, 16});
    const PoissonSolution sol = poisson_solve_nd(PeriodicFieldND(g));
    for (double v : sol.phi.v) CHECK(v == 0.0);
    for (const auto& w : sol.w)
        for (double v : w.v) CHECK(v == 0.0);
}

TEST_CASE("poisson: manufactured solution on 64x64") {
    const GridND g = GridND::make({64, 64});
    PeriodicFieldND phi_star(g), Y(g);
    std::size_t flat = 0;
    for (int i0 = 0; i0 < 64; ++i0)
        for (int i1 = 0; i1 < 64; ++i1, ++flat) {
            phi_star.v[flat] = std::cos(g.x(0, i0)) * std::cos(g.x(1, i1));
            Y.v[flat] = 2.0 * phi_star.v[flat];
        }
    const PoissonSolution sol = poisson_solve_nd(Y);
    double err = 0.0;
    for (std::size_t i = 0; i < phi_star.v.size(); ++i)
        err = std::max(err, std::abs(sol.phi.v[i] - phi_star.v[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("poisson: divergence and curl round trip on smooth random forcing") {
    const GridND g = GridND::make({64, 64});
    RngStream rng(7);
    PeriodicFieldND Y(g);
    for (std::size_t i = 0; i < Y.v.size(); ++i)
        Y.v[i] = rng.normal(0, static_cast<std::uint32_t>(i), 0);
    // smooth low-pass in spectral space and remove the mean
    {
        std::vector<std::complex<double>> F(fft::spectral_size(g.n.data(), g.rank));
        fft::rfftn(Y.v.data(), F.data(), g.n.data(), g.rank);
        std::size_t fl = 0;
        for (int i0 = 0; i0 < 64; ++i0)
            for (int i1 = 0; i1 < 33; ++i1, ++fl) {
                const int k0 = i0 <= 32 ? i0 : i0 - 64;
                F[fl] *= std::exp(-0.2 * (k0 * k0 + i1 * i1));
            }
        F[0] = 0.0;
        fft::irfftn(F.data(), Y.v.data(), g.n.data(), g.rank);
    }
    const PoissonSolution sol = poisson_solve_nd(Y);
    const PeriodicFieldND div = spectral_divergence(sol.w);
    double derr = 0.0;
    for (std::size_t i = 0; i < div.v.size(); ++i)
        derr = std::max(derr, std::abs(div.v[i] - Y.v[i]));
    CHECK(derr < 1e-8);
    const PeriodicFieldND curl = spectral_curl(sol.w);
    double cerr = 0.0;
    for (double c : curl.v) cerr = std::max(cerr, std::abs(c));
    CHECK(cerr < 1e-10);
}

TEST_CASE("poisson in 3D: manufactured solution") {
    const GridND g = GridND::make({16, 16, 16});
    PeriodicFieldND phi_star(g), Y(g);
    std::size_t flat = 0;
    for (int i0 = 0; i0 < 16; ++i0)
        for (int i1 = 0; i1 < 16; ++i1)
            for (int i2 = 0; i2 < 16; ++i2, ++flat) {
                phi_star.v[flat] =
                    std::cos(g.x(0, i0)) * std::cos(g.x(1, i1)) * std::cos(g.x(2, i2));
                Y.v[flat] = 3.0 * phi_star.v[flat];
            }
    const PoissonSolution sol = poisson_solve_nd(Y);
    double err = 0.0;
    for (std::size_t i = 0; i < phi_star.v.size(); ++i)
        err = std::max(err, std::abs(sol.phi.v[i] - phi_star.v[i]));
    CHECK(err < 1e-12);
    const PeriodicFieldND curl = spectral_curl(sol.w);
    for (double c : curl.v) CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("nd grids reject odd sizes") {
    CHECK_THROWS(GridND::make({63, 64}));
    CHECK_THROWS(GridND::make({64}));
    CHECK_THROWS(GridND::make({16, 16, 16, 16}));
}
