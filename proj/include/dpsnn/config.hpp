#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dpsnn/energy.hpp"
#include "dpsnn/engine.hpp"
#include "dpsnn/keyvalue.hpp"
#include "dpsnn/network.hpp"
#include "dpsnn/plasticity.hpp"
#include "dpsnn/raster.hpp"
#include "dpsnn/runtime.hpp"
#include "dpsnn/stimulus.hpp"

namespace dpsnn {

struct CalibrateSettings
{
    double target_hz = 5.1;
    double band_hz = 1.5;
    double probe_seconds = 0.5;
    double scale_lo = 0.0;
    double scale_hi = 4.0;
    double tolerance_hz = 0.4;
    int max_iterations = 32;

    bool operator==(const CalibrateSettings &) const = default;
};

/// Optional mains reading attached to a run so that an energy report can be
/// produced alongside the metrics.
struct PowerSettings
{
    std::string label = "desk";
    PowerMeasurement measurement;

    bool operator==(const PowerSettings &) const = default;
};

/// Everything one benchmark invocation needs. Keys of the text form:
///   grid.*       GridSpec (grid.x, grid.y, grid.model, ...)
///   stimulus.*   StimulusSpec plus stimulus.seed
///   lif.*        AdaptiveLifParams
///   stdp.*       StdpParams
///   sim.*        dt_ms, seconds, exc_scale
///   run.*        ranks, transport, timeout_s, raster, build_threads
///   calibrate.*  CalibrateSettings
///   power.*      PowerSettings; present only when power.current is set
struct RunConfig
{
    GridSpec grid;
    StimulusSpec stimulus;
    std::uint64_t stimulus_seed = 1;
    AdaptiveLifParams lif;
    StdpParams stdp;
    double dt_ms = 1.0;
    double seconds = 3.0;
    double exc_scale = 1.0;
    std::uint32_t ranks = 1;
    TransportKind transport = TransportKind::in_memory;
    double timeout_s = 30.0;
    RasterFormat raster_format = RasterFormat::binary;
    unsigned build_threads = 0;
    CalibrateSettings calibrate;
    std::optional<PowerSettings> power;

    bool operator==(const RunConfig &) const = default;

    EngineConfig engine_config() const;
    RunOptions run_options() const;
    std::uint32_t steps() const { return steps_for(seconds, dt_ms); }
};

/// Parses and validates. Unknown keys, malformed values and broken
/// invariants are all collected into one ConfigError.
RunConfig config_from_document(const KeyValueDocument &doc);
/// Complete document: every field, defaults included.
KeyValueDocument config_to_document(const RunConfig &config);

/// Throws ConfigError listing every broken invariant.
void validate(const RunConfig &config);

} // namespace dpsnn
