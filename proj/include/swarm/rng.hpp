#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace swarm {

/// Philox4x32-10 counter-based block cipher (Salmon et al. 2011 constants).
/// Pure function of (counter, key): parallel per-agent draws are
/// reproducible regardless of execution order.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

/// Keyed stream of independent draws addressed by (step, agent, substream).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint32_t stream_id = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32) ^ stream_id} {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform(std::uint64_t step, std::uint32_t agent, std::uint32_t substream) const;

    /// Standard normal (Box-Muller, cosine branch).
    double normal(std::uint64_t step, std::uint32_t agent, std::uint32_t substream) const;

    std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t agent,
                                       std::uint32_t substream) const;

private:
    std::array<std::uint32_t, 2> key_;
};

} // namespace swarm
