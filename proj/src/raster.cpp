#include "dpsnn/raster.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "byte_io.hpp"
#include "dpsnn/network.hpp"

namespace dpsnn {

namespace {

std::vector<std::uint8_t> encode(std::span<const SpikeRecord> raster)
{
    std::vector<std::uint8_t> bytes;
    bytes.reserve(raster.size() * 8);
    for (const SpikeRecord &r : raster)
    {
        detail::put_le(bytes, r.step);
        detail::put_le(bytes, r.neuron);
    }
    return bytes;
}

} // namespace

void write_raster_binary(std::ostream &out, std::span<const SpikeRecord> raster)
{
    const std::vector<std::uint8_t> bytes = encode(raster);
    out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<SpikeRecord> read_raster_binary(std::istream &in)
{
    std::vector<SpikeRecord> raster;
    std::uint8_t buf[8];
    while (in.read(reinterpret_cast<char *>(buf), sizeof(buf)))
    {
        raster.push_back({detail::get_le<std::uint32_t>(buf, 0),
                detail::get_le<std::uint32_t>(buf, 4)});
    }
    if (in.gcount() != 0)
    {
        throw std::runtime_error("binary raster has a trailing partial record");
    }
    return raster;
}

void write_raster_csv(std::ostream &out, std::span<const SpikeRecord> raster,
        std::span<const std::pair<std::string, std::string>> provenance)
{
    for (const auto &[key, value] : provenance)
    {
        out << "# " << key << " = " << value << '\n';
    }
    out << "step,neuron\n";
    for (const SpikeRecord &r : raster)
    {
        out << r.step << ',' << r.neuron << '\n';
    }
}

std::vector<SpikeRecord> read_raster_csv(std::istream &in)
{
    std::vector<SpikeRecord> raster;
    std::string line;
    bool header = false;
    while (std::getline(in, line))
    {
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        if (!header)
        {
            if (line != "step,neuron")
            {
                throw std::runtime_error("CSV raster must start with `step,neuron`");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
        {
            throw std::runtime_error("malformed raster line: " + line);
        }
        raster.push_back({static_cast<std::uint32_t>(std::stoul(line.substr(0, comma))),
                static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1)))});
    }
    return raster;
}

std::uint64_t raster_checksum(std::span<const SpikeRecord> raster)
{
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::uint8_t byte : encode(raster))
    {
        hash ^= byte;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t internal_events_from_raster(std::span<const SpikeRecord> raster,
        const Network &net)
{
    std::uint64_t events = 0;
    for (const SpikeRecord &r : raster)
    {
        events += net.fanout(r.neuron);
    }
    return events;
}

} // namespace dpsnn
