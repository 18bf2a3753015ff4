#pragma once

// Counter-based Gaussian noise.
//
// Every standard normal used by a simulation is a pure function of
// (master_seed, path_index, step_index): the 64-bit seed is the Philox key and
// (step_index / 2, path_index) is the counter. One Philox block yields two
// 53-bit uniforms, turned into two normals by Box-Muller; even steps take the
// cosine branch, odd steps the sine branch.

#include <array>
#include <cstdint>

namespace resonance {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key);
};

struct NoiseStream {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;

    /// The two standard normals for steps 2*pair_index and 2*pair_index + 1.
    std::array<double, 2> normal_pair(std::uint64_t pair_index) const;
    /// The standard normal for one step; random access.
    double normal(std::uint64_t step_index) const;
    /// Uniform in (0, 1) keyed by a separate counter lane; used for auxiliary draws.
    double uniform(std::uint64_t index) const;
};

/// Sequential reader over a stream's normals, caching the current pair.
class NormalSequence {
public:
    explicit NormalSequence(NoiseStream stream, std::uint64_t first_step = 0)
        : stream_(stream), next_(first_step)
    {
    }

    double next()
    {
        const std::uint64_t pair = next_ / 2;
        if (!valid_ || pair != cached_pair_) {
            cache_ = stream_.normal_pair(pair);
            cached_pair_ = pair;
            valid_ = true;
        }
        return cache_[next_++ % 2];
    }

    std::uint64_t position() const { return next_; }

private:
    NoiseStream stream_;
    std::uint64_t next_;
    std::array<double, 2> cache_{};
    std::uint64_t cached_pair_ = 0;
    bool valid_ = false;
};

}  // namespace resonance
