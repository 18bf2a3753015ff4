#include "resonance/noise.hpp"

#include <cmath>
#include <numbers>

namespace resonance {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Counter lane 3 carries the high path bits; uniforms use a disjoint lane tag.
constexpr std::uint32_t kUniformLane = 0x80000000u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

Philox4x32::Counter block(const NoiseStream& s, std::uint64_t lane_index, std::uint32_t lane_tag)
{
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(lane_index),
        static_cast<std::uint32_t>(lane_index >> 32) ^ lane_tag,
        static_cast<std::uint32_t>(s.path_index),
        static_cast<std::uint32_t>(s.path_index >> 32),
    };
    const Philox4x32::Key key{
        static_cast<std::uint32_t>(s.master_seed),
        static_cast<std::uint32_t>(s.master_seed >> 32),
    };
    return Philox4x32::generate(ctr, key);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::array<double, 2> NoiseStream::normal_pair(std::uint64_t pair_index) const
{
    const auto r = block(*this, pair_index, 0u);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NoiseStream::normal(std::uint64_t step_index) const
{
    return normal_pair(step_index / 2)[step_index % 2];
}

double NoiseStream::uniform(std::uint64_t index) const
{
    const auto r = block(*this, index, kUniformLane);
    return to_open_unit(r[0], r[1]);
}

}  // namespace resonance
