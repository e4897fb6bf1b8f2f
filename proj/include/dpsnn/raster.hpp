#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsnn/engine.hpp"

namespace dpsnn {

enum class RasterFormat
{
    binary,
    csv,
    none,
};

/// Binary raster: consecutive (u32 step, u32 neuron) little-endian pairs,
/// no header.
void write_raster_binary(std::ostream &out, std::span<const SpikeRecord> raster);
std::vector<SpikeRecord> read_raster_binary(std::istream &in);

/// CSV raster: optional `# key = value` provenance lines, then the header
/// `step,neuron` and one record per line.
void write_raster_csv(std::ostream &out, std::span<const SpikeRecord> raster,
        std::span<const std::pair<std::string, std::string>> provenance = {});
std::vector<SpikeRecord> read_raster_csv(std::istream &in);

/// 64-bit FNV-1a over the binary encoding; equal rasters give equal sums.
std::uint64_t raster_checksum(std::span<const SpikeRecord> raster);

/// Recounts internal events from a raster: sum over spikes of the
/// spiker's fanout.
std::uint64_t internal_events_from_raster(std::span<const SpikeRecord> raster,
        const Network &net);

} // namespace dpsnn
