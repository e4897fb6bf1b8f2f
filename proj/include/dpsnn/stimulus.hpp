#pragma once

#include <cstdint>

namespace dpsnn {

/// Aggregate Poisson drive standing in for the external synapses of each
/// neuron. Arrivals are delivered as ext_weight * count, but counted as
/// individual synaptic events.
struct StimulusSpec
{
    std::uint32_t ext_synapses_per_neuron = 594;
    double ext_rate_hz = 3.0;
    double ext_weight = 0.5;

    bool operator==(const StimulusSpec &) const = default;
};

void validate(const StimulusSpec &stim);

/// Poisson(ext_synapses_per_neuron * ext_rate_hz * dt / 1000) external
/// arrivals for one neuron in one step, drawn from a stream keyed by
/// (seed, neuron, step) alone.
std::uint32_t poisson_external(std::uint32_t neuron, std::uint32_t step,
        const StimulusSpec &stim, double dt_ms, std::uint64_t seed);

/// neurons * seconds * (mean_rate_hz * fanout + ext_rate_hz * ext_syn)
double expected_event_count(double neurons, double seconds, double mean_rate_hz,
        double fanout, double ext_syn, double ext_rate_hz);

} // namespace dpsnn
