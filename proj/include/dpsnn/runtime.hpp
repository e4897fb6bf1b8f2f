#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "dpsnn/engine.hpp"
#include "dpsnn/frame.hpp"
#include "dpsnn/network.hpp"
#include "dpsnn/partition.hpp"
#include "dpsnn/transport.hpp"

namespace dpsnn {

/// Per-step spike exchange over the static communication graph. Every step
/// each rank sends exactly one frame (possibly empty) to each rank it feeds
/// and waits for exactly one frame from each rank that feeds it; the empty
/// frames double as the step barrier.
class SpikeExchanger
{
public:
    SpikeExchanger(Transport &transport, const RankPartition &part,
            std::chrono::milliseconds timeout);

    /// Returns the remote spikes destined to this rank for `step`, in
    /// ascending source order. Must be called once per step, in order.
    std::vector<std::uint32_t> exchange(std::uint32_t step,
            std::span<const std::uint32_t> local_spikes);

    std::uint64_t frames_sent() const { return frames_sent_; }
    std::uint64_t bytes_sent() const { return bytes_sent_; }

private:
    void accept(Incoming item, std::uint32_t step);

    Transport &transport_;
    const RankPartition &part_;
    std::chrono::milliseconds timeout_;
    bool started_ = false;
    std::vector<std::uint32_t> next_step_;
    std::vector<bool> feeds_me_;
    std::vector<bool> closed_;
    std::vector<std::deque<SpikeFrame>> pending_;
    std::vector<std::vector<std::uint32_t>> outgoing_;
    std::uint64_t frames_sent_ = 0;
    std::uint64_t bytes_sent_ = 0;
};

/// Applies remote spikes through this rank's synapse table. Equivalent to
/// Engine::deliver for spikes that all originate elsewhere.
void deliver_remote(Engine &engine, std::span<const std::uint32_t> sorted_remote);

enum class TransportKind
{
    in_memory,
    tcp,
};

struct RunOptions
{
    std::uint32_t ranks = 1;
    TransportKind transport = TransportKind::in_memory;
    std::chrono::milliseconds timeout{30000};
};

struct RankOutcome
{
    RunMetrics metrics;
    std::vector<SpikeRecord> raster;
    std::uint64_t frames_sent = 0;
    std::uint64_t bytes_sent = 0;
};

struct RunResult
{
    RunMetrics metrics;
    std::vector<RunMetrics> per_rank;
    /// Global raster sorted by (step, neuron).
    std::vector<SpikeRecord> raster;
};

std::uint32_t steps_for(double seconds, double dt_ms);

/// Drives one rank for `steps` steps. transport may be null for P = 1.
RankOutcome run_rank(const RankPartition &part, const EngineConfig &config,
        Transport *transport, std::uint32_t steps, std::chrono::milliseconds timeout);

/// Runs all ranks of a partitioned network inside this process, one thread
/// per rank, over loopback queues or TCP on 127.0.0.1.
RunResult run_local(const Network &net, const EngineConfig &config, std::uint32_t steps,
        const RunOptions &options = {});

} // namespace dpsnn
