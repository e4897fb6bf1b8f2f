#include "dpsnn/stimulus.hpp"

#include <cmath>
#include <stdexcept>

#include "dpsnn/random.hpp"

namespace dpsnn {

void validate(const StimulusSpec &stim)
{
    if (!(stim.ext_rate_hz >= 0.0))
    {
        throw std::invalid_argument("ext_rate_hz must be non-negative");
    }
}

namespace {

// Inversion by sequential search. exp(-mean) must stay well above the
// smallest normal double, so larger means are split into chunks; a sum of
// independent Poisson variates is Poisson with the summed mean.
constexpr double max_chunk_mean = 256.0;

std::uint32_t poisson_inversion(CounterStream &rng, double mean)
{
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    while (u >= cdf)
    {
        ++k;
        p *= mean / k;
        const double next = cdf + p;
        if (next == cdf)
        {
            break;
        }
        cdf = next;
    }
    return k;
}

} // namespace

std::uint32_t poisson_external(std::uint32_t neuron, std::uint32_t step,
        const StimulusSpec &stim, double dt_ms, std::uint64_t seed)
{
    double mean = stim.ext_synapses_per_neuron * stim.ext_rate_hz * dt_ms / 1000.0;
    if (!(mean > 0.0))
    {
        return 0;
    }
    CounterStream rng(seed, neuron, step, StreamTag::external_input);
    std::uint32_t total = 0;
    while (mean > max_chunk_mean)
    {
        total += poisson_inversion(rng, max_chunk_mean);
        mean -= max_chunk_mean;
    }
    return total + poisson_inversion(rng, mean);
}

double expected_event_count(double neurons, double seconds, double mean_rate_hz,
        double fanout, double ext_syn, double ext_rate_hz)
{
    return neurons * seconds * (mean_rate_hz * fanout + ext_rate_hz * ext_syn);
}

} // namespace dpsnn
