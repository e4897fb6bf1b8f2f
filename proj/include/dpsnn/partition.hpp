#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpsnn/network.hpp"

namespace dpsnn {

/// Columns are dealt round-robin in row-major order: column c lives on
/// rank c mod P, so per-rank column counts differ by at most one.
class PartitionMap
{
public:
    PartitionMap(const GridSpec &spec, std::uint32_t ranks);

    std::uint32_t ranks() const { return ranks_; }
    std::uint32_t rank_of_column(std::uint32_t column) const { return column % ranks_; }
    std::uint32_t rank_of_neuron(std::uint32_t neuron) const
    {
        return rank_of_column(neuron / neurons_per_column_);
    }
    std::vector<std::uint32_t> columns_of(std::uint32_t rank) const;

private:
    std::uint32_t ranks_;
    std::uint32_t columns_;
    std::uint32_t neurons_per_column_;
};

/// Synapse as stored on the rank that owns its target.
struct IncomingSynapse
{
    std::uint32_t local_target = 0;
    float weight = 0.0f;
    std::uint16_t delay_steps = 1;

    bool operator==(const IncomingSynapse &) const = default;
};

/// Everything one rank needs: its neurons, and for every source neuron in
/// the network (local or remote) the synapses that land on this rank, kept
/// in the source's original order. Spikes therefore cross the wire as bare
/// source ids and are expanded receiver-side.
struct RankPartition
{
    std::uint32_t rank = 0;
    std::uint32_t rank_count = 1;
    std::uint32_t total_neurons = 0;
    double dt_ms = 1.0;
    std::uint16_t max_delay_steps = 1;

    /// Global ids of local neurons, ascending.
    std::vector<std::uint32_t> local_neurons;
    std::vector<NeuronKind> kinds;

    /// Sources with at least one target here, ascending, and their CSR rows.
    std::vector<std::uint32_t> sources;
    std::vector<std::uint64_t> source_offsets{0};
    std::vector<IncomingSynapse> synapses;
    /// 1 when the row's source is excitatory (eligible for STDP).
    std::vector<std::uint8_t> source_excitatory;
    /// Global id -> row in `sources`, or -1.
    std::vector<std::int32_t> source_row;

    /// For each local neuron, the other ranks holding at least one of its
    /// targets (CSR over local index).
    std::vector<std::uint32_t> destination_offsets{0};
    std::vector<std::uint16_t> destinations;

    /// Static communication graph, ascending rank ids, self excluded.
    std::vector<std::uint16_t> send_to;
    std::vector<std::uint16_t> recv_from;

    std::span<const IncomingSynapse> row(std::size_t r) const
    {
        return std::span<const IncomingSynapse>(synapses).subspan(
                source_offsets[r], source_offsets[r + 1] - source_offsets[r]);
    }
    std::span<const std::uint16_t> destinations_of(std::uint32_t local) const
    {
        return std::span<const std::uint16_t>(destinations).subspan(
                destination_offsets[local],
                destination_offsets[local + 1] - destination_offsets[local]);
    }
};

/// Splits the network over P ranks. Throws InfeasiblePartition when P is 0,
/// exceeds the column count, or exceeds 65535.
std::vector<RankPartition> partition(const Network &net, std::uint32_t ranks);

/// Builds only the given rank's share (used by single-rank processes of a
/// multi-host run).
RankPartition partition_rank(const Network &net, std::uint32_t ranks, std::uint32_t rank);

} // namespace dpsnn
