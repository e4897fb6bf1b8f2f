#include "dpsnn/random.hpp"

namespace dpsnn {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi,
        std::uint32_t &lo)
{
    const std::uint64_t product = std::uint64_t{a} * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline PhiloxCounter philox_round(const PhiloxCounter &ctr, const PhiloxKey &key)
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(philox_m0, ctr[0], hi0, lo0);
    mulhilo(philox_m1, ctr[2], hi1, lo1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key)
{
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += philox_w0;
            key[1] += philox_w1;
        }
        counter = philox_round(counter, key);
    }
    return counter;
}

CounterStream::CounterStream(
        std::uint64_t seed, std::uint32_t a, std::uint32_t b, StreamTag tag)
        : key_{static_cast<std::uint32_t>(seed),
                  static_cast<std::uint32_t>(seed >> 32)}
        , counter_{a, b, static_cast<std::uint32_t>(tag), 0u}
{
}

void CounterStream::refill()
{
    block_ = philox4x32(counter_, key_);
    ++counter_[3];
    used_ = 0;
}

std::uint32_t CounterStream::next_u32()
{
    if (used_ == 4)
    {
        refill();
    }
    return block_[used_++];
}

std::uint64_t CounterStream::next_u64()
{
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double CounterStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint32_t CounterStream::uniform_below(std::uint32_t bound)
{
    // Lemire's multiply-shift with rejection of the biased low range.
    std::uint64_t m = std::uint64_t{next_u32()} * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound)
    {
        const std::uint32_t threshold = (0u - bound) % bound;
        while (low < threshold)
        {
            m = std::uint64_t{next_u32()} * bound;
            low = static_cast<std::uint32_t>(m);
        }
    }
    return static_cast<std::uint32_t>(m >> 32);
}

} // namespace dpsnn
