#include "dpsnn/partition.hpp"

#include <algorithm>
#include <string>

#include "dpsnn/errors.hpp"

namespace dpsnn {

namespace {

void check_rank_count(const GridSpec &spec, std::uint32_t ranks)
{
    if (ranks == 0)
    {
        throw InfeasiblePartition("rank count must be at least 1");
    }
    if (ranks > spec.column_count())
    {
        throw InfeasiblePartition("cannot split " + std::to_string(spec.column_count()) +
                " columns over " + std::to_string(ranks) + " ranks");
    }
    if (ranks > UINT16_MAX)
    {
        throw InfeasiblePartition("rank ids are limited to 16 bits");
    }
}

} // namespace

PartitionMap::PartitionMap(const GridSpec &spec, std::uint32_t ranks)
        : ranks_(ranks)
        , columns_(spec.column_count())
        , neurons_per_column_(spec.neurons_per_column)
{
    check_rank_count(spec, ranks);
}

std::vector<std::uint32_t> PartitionMap::columns_of(std::uint32_t rank) const
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t c = rank; c < columns_; c += ranks_)
    {
        out.push_back(c);
    }
    return out;
}

RankPartition partition_rank(const Network &net, std::uint32_t ranks, std::uint32_t rank)
{
    const PartitionMap map(net.spec(), ranks);
    if (rank >= ranks)
    {
        throw InfeasiblePartition("rank " + std::to_string(rank) + " out of range");
    }
    const std::uint32_t npc = net.spec().neurons_per_column;
    const std::uint32_t total = net.neuron_count();

    RankPartition part;
    part.rank = rank;
    part.rank_count = ranks;
    part.total_neurons = total;
    part.dt_ms = net.dt_ms();
    part.max_delay_steps = net.max_delay_steps();

    std::vector<std::int32_t> local_index(total, -1);
    for (std::uint32_t column : map.columns_of(rank))
    {
        for (std::uint32_t n = column * npc; n < (column + 1) * npc; ++n)
        {
            local_index[n] = static_cast<std::int32_t>(part.local_neurons.size());
            part.local_neurons.push_back(n);
            part.kinds.push_back(net.kind(n));
        }
    }

    part.source_row.assign(total, -1);
    std::vector<bool> sends(ranks, false);
    std::vector<bool> receives(ranks, false);
    std::vector<std::uint16_t> dests;
    for (std::uint32_t src = 0; src < total; ++src)
    {
        const std::uint32_t src_rank = map.rank_of_neuron(src);
        const std::size_t before = part.synapses.size();
        dests.clear();
        for (const Synapse &syn : net.outgoing(src))
        {
            const std::uint32_t target_rank = map.rank_of_neuron(syn.target);
            if (target_rank == rank)
            {
                part.synapses.push_back({static_cast<std::uint32_t>(local_index[syn.target]),
                        syn.weight, syn.delay_steps});
            }
            else if (src_rank == rank)
            {
                dests.push_back(static_cast<std::uint16_t>(target_rank));
            }
        }
        if (part.synapses.size() != before)
        {
            part.source_row[src] = static_cast<std::int32_t>(part.sources.size());
            part.sources.push_back(src);
            part.source_excitatory.push_back(is_excitatory(net.kind(src)) ? 1 : 0);
            part.source_offsets.push_back(part.synapses.size());
            if (src_rank != rank)
            {
                receives[src_rank] = true;
            }
        }
        if (src_rank == rank)
        {
            std::sort(dests.begin(), dests.end());
            dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
            for (std::uint16_t d : dests)
            {
                sends[d] = true;
            }
            part.destinations.insert(part.destinations.end(), dests.begin(), dests.end());
            part.destination_offsets.push_back(part.destinations.size());
        }
    }
    for (std::uint32_t r = 0; r < ranks; ++r)
    {
        if (sends[r])
        {
            part.send_to.push_back(static_cast<std::uint16_t>(r));
        }
        if (receives[r])
        {
            part.recv_from.push_back(static_cast<std::uint16_t>(r));
        }
    }
    return part;
}

std::vector<RankPartition> partition(const Network &net, std::uint32_t ranks)
{
    check_rank_count(net.spec(), ranks);
    std::vector<RankPartition> parts;
    parts.reserve(ranks);
    for (std::uint32_t r = 0; r < ranks; ++r)
    {
        parts.push_back(partition_rank(net, ranks, r));
    }
    return parts;
}

} // namespace dpsnn
