#include "dpsnn/frame.hpp"

#include <algorithm>
#include <string>

#include "byte_io.hpp"
#include "dpsnn/errors.hpp"

namespace dpsnn {

namespace {

constexpr std::uint8_t magic[4] = {'D', 'P', 'S', 'N'};

} // namespace

std::vector<std::uint8_t> encode_frame(const SpikeFrame &frame)
{
    using detail::put_le;
    std::vector<std::uint8_t> out;
    out.reserve(frame_header_size + 4 * frame.sources.size());
    out.insert(out.end(), std::begin(magic), std::end(magic));
    put_le(out, frame_version);
    put_le(out, frame.sender_rank);
    put_le(out, frame.step);
    put_le(out, static_cast<std::uint32_t>(frame.sources.size()));
    for (std::uint32_t id : frame.sources)
    {
        put_le(out, id);
    }
    return out;
}

std::size_t frame_payload_size(std::span<const std::uint8_t> header)
{
    if (header.size() < frame_header_size)
    {
        throw FrameCorruption("frame shorter than its " +
                std::to_string(frame_header_size) + "-byte header");
    }
    if (!std::equal(std::begin(magic), std::end(magic), header.begin()))
    {
        throw FrameCorruption("bad frame magic");
    }
    if (header[4] != frame_version)
    {
        throw FrameCorruption("unsupported frame version " + std::to_string(header[4]));
    }
    return std::size_t{4} * detail::get_le<std::uint32_t>(header, 11);
}

SpikeFrame decode_frame(std::span<const std::uint8_t> bytes)
{
    const std::size_t payload = frame_payload_size(bytes);
    if (bytes.size() != frame_header_size + payload)
    {
        throw FrameCorruption("frame length " + std::to_string(bytes.size()) +
                " does not match declared payload of " + std::to_string(payload) + " bytes");
    }
    SpikeFrame frame;
    frame.sender_rank = detail::get_le<std::uint16_t>(bytes, 5);
    frame.step = detail::get_le<std::uint32_t>(bytes, 7);
    frame.sources.resize(payload / 4);
    for (std::size_t i = 0; i < frame.sources.size(); ++i)
    {
        frame.sources[i] = detail::get_le<std::uint32_t>(bytes, frame_header_size + 4 * i);
    }
    return frame;
}

} // namespace dpsnn
