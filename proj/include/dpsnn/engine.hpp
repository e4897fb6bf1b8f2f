#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "dpsnn/delay_ring.hpp"
#include "dpsnn/neuron.hpp"
#include "dpsnn/partition.hpp"
#include "dpsnn/plasticity.hpp"
#include "dpsnn/stimulus.hpp"

namespace dpsnn {

struct EngineConfig
{
    double dt_ms = 1.0;
    StimulusSpec stimulus;
    std::uint64_t stimulus_seed = 1;
    /// Multiplies every excitatory efficacy at delivery; the knob tuned by
    /// rate calibration.
    double exc_scale = 1.0;
    AdaptiveLifParams lif;
    StdpParams stdp;
    bool record_raster = true;
};

struct SpikeRecord
{
    std::uint32_t step = 0;
    std::uint32_t neuron = 0;

    auto operator<=>(const SpikeRecord &) const = default;
};

struct RunMetrics
{
    std::uint32_t neurons = 0;
    double simulated_seconds = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t total_spikes = 0;
    std::uint64_t internal_synaptic_events = 0;
    std::uint64_t external_synaptic_events = 0;
    double mean_rate_hz = 0.0;

    std::uint64_t total_synaptic_events() const
    {
        return internal_synaptic_events + external_synaptic_events;
    }
    /// Synaptic events per wall-clock second.
    double throughput() const;
    /// Recomputes mean_rate_hz = spikes / (neurons * simulated seconds).
    void update_rate();
};

/// Sums counters over ranks; wall time is the slowest rank's.
RunMetrics merge_metrics(std::span<const RunMetrics> per_rank);

/// Adds each synapse's efficacy to the ring (excitatory ones scaled by
/// exc_scale) and returns the number of synaptic events, one per synapse.
std::uint64_t deliver_spike(DelayRing &ring, std::span<const IncomingSynapse> synapses,
        double exc_scale = 1.0);

/// Clock-driven simulation of one rank's share of the network.
///
/// A step is split so the distributed runtime can exchange spikes between
/// integration and delivery:
///   integrate()  drains the current ring slot, adds external Poisson input,
///                updates local neurons in ascending id order and returns the
///                ids that fired;
///   deliver()    expands the step's spikes (local and remote, ascending
///                source id) through this rank's synapse table and applies
///                STDP when enabled;
///   advance()    moves to the next slot.
/// Delivery in ascending source order makes every accumulator sum in the
/// same order regardless of the partition.
class Engine
{
public:
    Engine(RankPartition part, EngineConfig config);

    std::uint32_t current_step() const { return step_; }
    const RankPartition &partition() const { return part_; }
    const EngineConfig &config() const { return config_; }

    std::vector<std::uint32_t> integrate();
    void deliver(std::span<const std::uint32_t> sorted_sources);
    void advance();

    /// integrate + deliver(local spikes) + advance, for a rank with no peers.
    std::vector<std::uint32_t> step();
    void run(std::uint32_t steps);

    const RunMetrics &metrics() const { return metrics_; }
    const std::vector<SpikeRecord> &raster() const { return raster_; }
    std::span<const NeuronState> states() const { return states_; }
    void set_state(std::uint32_t local, const NeuronState &state) { states_[local] = state; }
    std::span<const IncomingSynapse> synapses() const { return part_.synapses; }
    const DelayRing &ring() const { return ring_; }

private:
    void apply_plasticity(std::span<const std::uint32_t> sorted_sources);

    RankPartition part_;
    EngineConfig config_;
    IzhikevichParams rs_params_;
    IzhikevichParams fs_params_;
    DelayRing ring_;
    std::vector<NeuronState> states_;
    std::vector<double> input_;
    std::vector<std::uint32_t> last_local_spikes_;
    std::uint32_t step_ = 0;
    RunMetrics metrics_;
    std::vector<SpikeRecord> raster_;

    // plasticity state, allocated only when enabled
    std::optional<StdpRule> stdp_;
    std::vector<double> pre_trace_;
    std::vector<double> post_trace_;
    std::vector<bool> plastic_row_;
    std::vector<std::uint64_t> incoming_offsets_;
    std::vector<std::uint64_t> incoming_synapse_;
    std::vector<std::uint32_t> incoming_row_;
};

/// Initial state used for every neuron of the given kind.
NeuronState resting_state(NeuronKind kind, const AdaptiveLifParams &lif);

} // namespace dpsnn
