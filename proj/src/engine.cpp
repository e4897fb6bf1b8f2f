#include "dpsnn/engine.hpp"

#include <algorithm>
#include <string>

#include "dpsnn/errors.hpp"

namespace dpsnn {

double RunMetrics::throughput() const
{
    return wall_seconds > 0.0 ? static_cast<double>(total_synaptic_events()) / wall_seconds
                              : 0.0;
}

void RunMetrics::update_rate()
{
    mean_rate_hz = neurons > 0 && simulated_seconds > 0.0
            ? static_cast<double>(total_spikes) / (neurons * simulated_seconds)
            : 0.0;
}

RunMetrics merge_metrics(std::span<const RunMetrics> per_rank)
{
    RunMetrics out;
    for (const RunMetrics &m : per_rank)
    {
        out.neurons += m.neurons;
        out.simulated_seconds = std::max(out.simulated_seconds, m.simulated_seconds);
        out.wall_seconds = std::max(out.wall_seconds, m.wall_seconds);
        out.total_spikes += m.total_spikes;
        out.internal_synaptic_events += m.internal_synaptic_events;
        out.external_synaptic_events += m.external_synaptic_events;
    }
    out.update_rate();
    return out;
}

std::uint64_t deliver_spike(DelayRing &ring, std::span<const IncomingSynapse> synapses,
        double exc_scale)
{
    for (const IncomingSynapse &syn : synapses)
    {
        const double w = syn.weight > 0.0f ? syn.weight * exc_scale : syn.weight;
        ring.add(syn.local_target, syn.delay_steps, w);
    }
    return synapses.size();
}

NeuronState resting_state(NeuronKind kind, const AdaptiveLifParams &lif)
{
    NeuronState s;
    switch (kind)
    {
    case NeuronKind::regular_spiking:
    case NeuronKind::fast_spiking:
    {
        const IzhikevichParams p = izhikevich_preset(kind == NeuronKind::regular_spiking
                        ? IzhikevichKind::regular_spiking
                        : IzhikevichKind::fast_spiking);
        s.v = p.c;
        s.w = p.b * p.c;
        break;
    }
    case NeuronKind::adaptive_lif_exc:
    case NeuronKind::adaptive_lif_inh:
        s.v = lif.v_rest;
        s.w = 0.0;
        break;
    }
    return s;
}

Engine::Engine(RankPartition part, EngineConfig config)
        : part_(std::move(part))
        , config_(config)
        , rs_params_(izhikevich_preset(IzhikevichKind::regular_spiking))
        , fs_params_(izhikevich_preset(IzhikevichKind::fast_spiking))
        , ring_(static_cast<std::uint32_t>(part_.local_neurons.size()), part_.max_delay_steps)
        , input_(part_.local_neurons.size(), 0.0)
{
    if (!(config_.dt_ms > 0.0))
    {
        throw std::invalid_argument("dt must be positive");
    }
    validate(config_.stimulus);
    validate(config_.lif);
    states_.reserve(part_.kinds.size());
    for (NeuronKind kind : part_.kinds)
    {
        states_.push_back(resting_state(kind, config_.lif));
    }
    metrics_.neurons = static_cast<std::uint32_t>(part_.local_neurons.size());

    if (config_.stdp.enabled)
    {
        stdp_.emplace(config_.stdp, config_.dt_ms);
        pre_trace_.assign(part_.sources.size(), 0.0);
        post_trace_.assign(part_.local_neurons.size(), 0.0);
        plastic_row_.resize(part_.sources.size());
        for (std::size_t r = 0; r < part_.sources.size(); ++r)
        {
            plastic_row_[r] = part_.source_excitatory[r] != 0;
        }
        // incoming index: for each local target, (row, synapse) pairs
        std::vector<std::uint64_t> counts(part_.local_neurons.size() + 1, 0);
        for (const IncomingSynapse &syn : part_.synapses)
        {
            ++counts[syn.local_target + 1];
        }
        for (std::size_t i = 1; i < counts.size(); ++i)
        {
            counts[i] += counts[i - 1];
        }
        incoming_offsets_ = counts;
        incoming_synapse_.resize(part_.synapses.size());
        incoming_row_.resize(part_.synapses.size());
        std::vector<std::uint64_t> fill(counts.begin(), counts.end() - 1);
        for (std::size_t r = 0; r < part_.sources.size(); ++r)
        {
            for (std::uint64_t k = part_.source_offsets[r]; k < part_.source_offsets[r + 1]; ++k)
            {
                const std::uint64_t slot = fill[part_.synapses[k].local_target]++;
                incoming_synapse_[slot] = k;
                incoming_row_[slot] = static_cast<std::uint32_t>(r);
            }
        }
    }
}

std::vector<std::uint32_t> Engine::integrate()
{
    ring_.drain(input_);
    const double dt = config_.dt_ms;
    const StimulusSpec &stim = config_.stimulus;
    std::vector<std::uint32_t> spikes;
    for (std::uint32_t i = 0; i < states_.size(); ++i)
    {
        const std::uint32_t id = part_.local_neurons[i];
        const std::uint32_t arrivals =
                poisson_external(id, step_, stim, dt, config_.stimulus_seed);
        metrics_.external_synaptic_events += arrivals;
        const double current = input_[i] + stim.ext_weight * arrivals;

        StepResult result;
        try
        {
            switch (part_.kinds[i])
            {
            case NeuronKind::regular_spiking:
                result = step_izhikevich(states_[i], rs_params_, current, dt);
                break;
            case NeuronKind::fast_spiking:
                result = step_izhikevich(states_[i], fs_params_, current, dt);
                break;
            case NeuronKind::adaptive_lif_exc:
            case NeuronKind::adaptive_lif_inh:
                result = step_adaptive_lif(states_[i], config_.lif, current, dt);
                break;
            }
        }
        catch (const NumericalDivergence &)
        {
            throw NumericalDivergence(id);
        }
        states_[i] = result.state;
        if (result.spiked)
        {
            states_[i].last_spike_step = step_;
            spikes.push_back(id);
            if (config_.record_raster)
            {
                raster_.push_back({step_, id});
            }
        }
    }
    metrics_.total_spikes += spikes.size();
    last_local_spikes_ = spikes;
    return spikes;
}

void Engine::deliver(std::span<const std::uint32_t> sorted_sources)
{
    for (std::uint32_t source : sorted_sources)
    {
        if (source >= part_.total_neurons)
        {
            throw ProtocolViolation("spike from unknown neuron id " + std::to_string(source));
        }
        const std::int32_t row = part_.source_row[source];
        if (row < 0)
        {
            if (std::binary_search(part_.local_neurons.begin(), part_.local_neurons.end(),
                        source))
            {
                continue; // local neuron whose targets all live elsewhere
            }
            throw ProtocolViolation("rank " + std::to_string(part_.rank) +
                    " holds no synapses for remote source " + std::to_string(source));
        }
        metrics_.internal_synaptic_events +=
                deliver_spike(ring_, part_.row(static_cast<std::size_t>(row)), config_.exc_scale);
    }
    if (stdp_)
    {
        apply_plasticity(sorted_sources);
    }
}

void Engine::apply_plasticity(std::span<const std::uint32_t> sorted_sources)
{
    const StdpRule &rule = *stdp_;
    for (double &t : pre_trace_)
    {
        t *= rule.pre_decay();
    }
    for (double &t : post_trace_)
    {
        t *= rule.post_decay();
    }
    for (std::uint32_t source : sorted_sources)
    {
        const std::int32_t row = part_.source_row[source];
        if (row < 0 || !plastic_row_[static_cast<std::size_t>(row)])
        {
            continue;
        }
        for (std::uint64_t k = part_.source_offsets[row]; k < part_.source_offsets[row + 1]; ++k)
        {
            IncomingSynapse &syn = part_.synapses[k];
            syn.weight = static_cast<float>(rule.depress(syn.weight, post_trace_[syn.local_target]));
        }
    }
    for (std::uint32_t id : last_local_spikes_)
    {
        const auto local = static_cast<std::uint32_t>(
                std::lower_bound(part_.local_neurons.begin(), part_.local_neurons.end(), id) -
                part_.local_neurons.begin());
        for (std::uint64_t k = incoming_offsets_[local]; k < incoming_offsets_[local + 1]; ++k)
        {
            const std::uint32_t row = incoming_row_[k];
            if (!plastic_row_[row])
            {
                continue;
            }
            IncomingSynapse &syn = part_.synapses[incoming_synapse_[k]];
            syn.weight = static_cast<float>(rule.potentiate(syn.weight, pre_trace_[row]));
        }
    }
    for (std::uint32_t source : sorted_sources)
    {
        const std::int32_t row = part_.source_row[source];
        if (row >= 0)
        {
            pre_trace_[static_cast<std::size_t>(row)] += 1.0;
        }
    }
    for (std::uint32_t id : last_local_spikes_)
    {
        const auto local = std::lower_bound(part_.local_neurons.begin(),
                part_.local_neurons.end(), id) - part_.local_neurons.begin();
        post_trace_[static_cast<std::size_t>(local)] += 1.0;
    }
}

void Engine::advance()
{
    ring_.advance();
    ++step_;
    metrics_.simulated_seconds = step_ * config_.dt_ms / 1000.0;
    metrics_.update_rate();
}

std::vector<std::uint32_t> Engine::step()
{
    std::vector<std::uint32_t> spikes = integrate();
    deliver(spikes);
    advance();
    return spikes;
}

void Engine::run(std::uint32_t steps)
{
    for (std::uint32_t s = 0; s < steps; ++s)
    {
        step();
    }
}

} // namespace dpsnn
