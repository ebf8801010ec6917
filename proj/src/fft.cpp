#include "swarm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace swarm::fft {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
// Each thread keeps its own plans + aligned buffers, planning under a
// process-wide mutex.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct Plan {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    std::size_t n_real = 0, n_cplx = 0;

    Plan(const int* dims, int rank) {
        n_real = 1;
        for (int i = 0; i < rank; ++i) n_real *= static_cast<std::size_t>(dims[i]);
        n_cplx = spectral_size(dims, rank);
        real = fftw_alloc_real(n_real);
        cplx = fftw_alloc_complex(n_cplx);
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd = fftw_plan_dft_r2c(rank, dims, real, cplx, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r(rank, dims, cplx, real, FFTW_ESTIMATE);
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
    }
    ~Plan() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(cplx);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

Plan& plan_for(const int* dims, int rank) {
    thread_local std::map<std::vector<int>, Plan> cache;
    std::vector<int> key(dims, dims + rank);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.try_emplace(std::move(key), dims, rank).first;
    return it->second;
}

} // namespace

std::size_t spectral_size(const int* dims, int rank) {
    std::size_t s = 1;
    for (int i = 0; i + 1 < rank; ++i) s *= static_cast<std::size_t>(dims[i]);
    return s * (static_cast<std::size_t>(dims[rank - 1]) / 2 + 1);
}

void rfftn(const double* in, std::complex<double>* out, const int* dims, int rank) {
    Plan& p = plan_for(dims, rank);
    std::memcpy(p.real, in, p.n_real * sizeof(double));
    fftw_execute(p.fwd);
    std::memcpy(static_cast<void*>(out), p.cplx, p.n_cplx * sizeof(fftw_complex));
}

void irfftn(const std::complex<double>* in, double* out, const int* dims, int rank) {
    Plan& p = plan_for(dims, rank);
    std::memcpy(p.cplx, static_cast<const void*>(in), p.n_cplx * sizeof(fftw_complex));
    fftw_execute(p.bwd);
    const double norm = 1.0 / static_cast<double>(p.n_real);
    for (std::size_t i = 0; i < p.n_real; ++i) out[i] = p.real[i] * norm;
}

void rfft(const double* in, std::complex<double>* out, int n) { rfftn(in, out, &n, 1); }

void irfft(const std::complex<double>* in, double* out, int n) { irfftn(in, out, &n, 1); }

std::vector<std::complex<double>> rfft(const std::vector<double>& in) {
    std::vector<std::complex<double>> out(in.size() / 2 + 1);
    rfft(in.data(), out.data(), static_cast<int>(in.size()));
    return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& in, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    irfft(in.data(), out.data(), n);
    return out;
}

} // namespace swarm::fft
