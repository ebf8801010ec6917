#include "swarm/rng.hpp"

#include <cmath>

namespace swarm {
namespace {

constexpr double kTwoPiRng = 6.283185307179586476925286766559;
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& x, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> x = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        round_once(x, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return x;
}

std::array<std::uint32_t, 4> RngStream::block(std::uint64_t step, std::uint32_t agent,
                                              std::uint32_t substream) const {
    return philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                       agent, substream},
                      key_);
}

double RngStream::uniform(std::uint64_t step, std::uint32_t agent, std::uint32_t substream) const {
    const auto b = block(step, agent, substream);
    return to_unit_double(b[0], b[1]);
}

double RngStream::normal(std::uint64_t step, std::uint32_t agent, std::uint32_t substream) const {
    const auto b = block(step, agent, substream);
    // Box-Muller; u1 shifted away from zero
    const double u1 = (static_cast<double>(((static_cast<std::uint64_t>(b[0]) << 32 | b[1]) >> 11) + 1)) * 0x1.0p-53;
    const double u2 = to_unit_double(b[2], b[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPiRng * u2);
}

} // namespace swarm
