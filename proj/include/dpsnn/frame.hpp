#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpsnn {

/// Per-step spike message between two ranks.
///
/// Wire layout, all integers little-endian:
///   offset 0   4 bytes  magic "DPSN"
///   offset 4   u8       version (1)
///   offset 5   u16      sender rank
///   offset 7   u32      step
///   offset 11  u32      count
///   offset 15  count x u32 source neuron ids
struct SpikeFrame
{
    std::uint16_t sender_rank = 0;
    std::uint32_t step = 0;
    std::vector<std::uint32_t> sources;

    bool operator==(const SpikeFrame &) const = default;
};

inline constexpr std::size_t frame_header_size = 15;
inline constexpr std::uint8_t frame_version = 1;

std::vector<std::uint8_t> encode_frame(const SpikeFrame &frame);

/// Throws FrameCorruption on bad magic, unsupported version, or a length
/// that disagrees with the declared count.
SpikeFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Validates a header and returns the payload length it announces; used by
/// stream transports to delimit frames.
std::size_t frame_payload_size(std::span<const std::uint8_t> header);

} // namespace dpsnn
