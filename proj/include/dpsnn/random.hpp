#pragma once

#include <array>
#include <cstdint>

namespace dpsnn {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123). Pure function of
/// (counter, key); every random draw in the simulator is derived from it so
/// that results never depend on evaluation order or partitioning.
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Stream tags keep the counter spaces of unrelated consumers disjoint.
enum class StreamTag : std::uint32_t
{
    connectivity = 1,
    external_input = 2,
    initial_state = 3,
};

/// Sequential reader over the Philox output for one keyed stream. The
/// stream identity is (seed, a, b, tag); the fourth counter word walks
/// through consecutive blocks.
class CounterStream
{
public:
    CounterStream(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
            StreamTag tag);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_open_closed() { return 1.0 - uniform(); }
    /// Unbiased integer in [0, bound); bound > 0.
    std::uint32_t uniform_below(std::uint32_t bound);

private:
    void refill();

    PhiloxKey key_;
    PhiloxCounter counter_;
    PhiloxCounter block_{};
    unsigned used_ = 4;
};

} // namespace dpsnn
