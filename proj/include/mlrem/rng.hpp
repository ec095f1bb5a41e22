#pragma once

#include <array>
#include <cstdint>

namespace mlrem {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The output block is a pure function of (key, counter), so any sample can be
/// regenerated from its index without replaying a sequential stream.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

/// SplitMix64 finalizer, used to derive independent 64-bit seeds from a base seed.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept;

/// Stream of random numbers identified by (seed, stream).
///
/// Stream `s` of seed `k` walks the Philox counter (b_lo, b_hi, s_lo, s_hi) for
/// block b = 0, 1, ...; each block yields four 32-bit words consumed in order.
/// uniform() consumes two words (high word first) and returns
/// ((u64 >> 11) + 0.5) * 2^-53, which lies strictly inside (0, 1).
/// normal() uses Box-Muller on two uniforms and returns the cosine branch
/// first, then the cached sine branch on the following call.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;
    double normal() noexcept;
    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mlrem
