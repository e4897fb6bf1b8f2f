#include "dpsnn/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "dpsnn/errors.hpp"
#include "dpsnn/tcp_transport.hpp"

namespace dpsnn {

SpikeExchanger::SpikeExchanger(Transport &transport, const RankPartition &part,
        std::chrono::milliseconds timeout)
        : transport_(transport)
        , part_(part)
        , timeout_(timeout)
        , next_step_(part.rank_count, 0)
        , feeds_me_(part.rank_count, false)
        , closed_(part.rank_count, false)
        , pending_(part.rank_count)
        , outgoing_(part.rank_count)
{
    for (std::uint16_t q : part.recv_from)
    {
        feeds_me_[q] = true;
    }
}

void SpikeExchanger::accept(Incoming item, std::uint32_t step)
{
    const std::uint16_t from = item.from;
    if (from >= part_.rank_count)
    {
        throw ProtocolViolation("message from unknown rank " + std::to_string(from));
    }
    if (item.disconnected)
    {
        closed_[from] = true;
        return;
    }
    SpikeFrame frame = decode_frame(item.bytes);
    if (frame.sender_rank != from)
    {
        throw ProtocolViolation("frame claims sender " + std::to_string(frame.sender_rank) +
                " but arrived from rank " + std::to_string(from));
    }
    if (!feeds_me_[from])
    {
        throw ProtocolViolation("rank " + std::to_string(from) +
                " is not in the incoming communication graph of rank " +
                std::to_string(part_.rank));
    }
    if (frame.step != next_step_[from])
    {
        throw ProtocolViolation("rank " + std::to_string(from) + " sent step " +
                std::to_string(frame.step) + ", expected " +
                std::to_string(next_step_[from]) + " (rank " + std::to_string(part_.rank) +
                " at step " + std::to_string(step) + ")");
    }
    ++next_step_[from];
    pending_[from].push_back(std::move(frame));
}

std::vector<std::uint32_t> SpikeExchanger::exchange(std::uint32_t step,
        std::span<const std::uint32_t> local_spikes)
{
    if (!started_)
    {
        std::fill(next_step_.begin(), next_step_.end(), step);
        started_ = true;
    }

    for (std::uint16_t q : part_.send_to)
    {
        outgoing_[q].clear();
    }
    for (std::uint32_t id : local_spikes)
    {
        const auto local = static_cast<std::uint32_t>(
                std::lower_bound(part_.local_neurons.begin(), part_.local_neurons.end(), id) -
                part_.local_neurons.begin());
        for (std::uint16_t q : part_.destinations_of(local))
        {
            outgoing_[q].push_back(id);
        }
    }
    for (std::uint16_t q : part_.send_to)
    {
        SpikeFrame frame{static_cast<std::uint16_t>(part_.rank), step, outgoing_[q]};
        std::vector<std::uint8_t> bytes = encode_frame(frame);
        bytes_sent_ += bytes.size();
        ++frames_sent_;
        try
        {
            transport_.send(q, std::move(bytes));
        }
        catch (const ExchangeFailure &e)
        {
            throw ExchangeFailure(std::string(e.what()) + " at step " + std::to_string(step), q,
                    step);
        }
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::vector<std::uint32_t> remote;
    for (std::uint16_t q : part_.recv_from)
    {
        while (pending_[q].empty())
        {
            if (closed_[q])
            {
                throw ExchangeFailure("rank " + std::to_string(q) + " disconnected before step " +
                                std::to_string(step),
                        q, step);
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now());
            std::optional<Incoming> item;
            if (left.count() > 0)
            {
                item = transport_.receive(left);
            }
            if (!item)
            {
                throw ExchangeFailure("timed out waiting for rank " + std::to_string(q) +
                                " at step " + std::to_string(step),
                        q, step);
            }
            accept(std::move(*item), step);
        }
        const SpikeFrame &frame = pending_[q].front();
        remote.insert(remote.end(), frame.sources.begin(), frame.sources.end());
        pending_[q].pop_front();
    }
    std::sort(remote.begin(), remote.end());
    return remote;
}

void deliver_remote(Engine &engine, std::span<const std::uint32_t> sorted_remote)
{
    engine.deliver(sorted_remote);
}

std::uint32_t steps_for(double seconds, double dt_ms)
{
    return static_cast<std::uint32_t>(std::llround(seconds * 1000.0 / dt_ms));
}

RankOutcome run_rank(const RankPartition &part, const EngineConfig &config,
        Transport *transport, std::uint32_t steps, std::chrono::milliseconds timeout)
{
    Engine engine(part, config);
    std::optional<SpikeExchanger> exchanger;
    if (part.rank_count > 1)
    {
        if (transport == nullptr)
        {
            throw std::invalid_argument("multi-rank run needs a transport");
        }
        exchanger.emplace(*transport, engine.partition(), timeout);
    }

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::uint32_t> merged;
    for (std::uint32_t s = 0; s < steps; ++s)
    {
        const std::vector<std::uint32_t> local = engine.integrate();
        if (exchanger)
        {
            const std::vector<std::uint32_t> remote =
                    exchanger->exchange(engine.current_step(), local);
            merged.clear();
            std::merge(local.begin(), local.end(), remote.begin(), remote.end(),
                    std::back_inserter(merged));
            engine.deliver(merged);
        }
        else
        {
            engine.deliver(local);
        }
        engine.advance();
    }
    RankOutcome out;
    out.metrics = engine.metrics();
    out.metrics.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.raster = engine.raster();
    if (exchanger)
    {
        out.frames_sent = exchanger->frames_sent();
        out.bytes_sent = exchanger->bytes_sent();
    }
    return out;
}

namespace {

class ErrorSink
{
public:
    void record(std::exception_ptr e)
    {
        std::lock_guard lock(mutex_);
        if (!first_)
        {
            first_ = e;
        }
    }
    void rethrow()
    {
        if (first_)
        {
            std::rethrow_exception(first_);
        }
    }

private:
    std::mutex mutex_;
    std::exception_ptr first_;
};

} // namespace

RunResult run_local(const Network &net, const EngineConfig &config, std::uint32_t steps,
        const RunOptions &options)
{
    std::vector<RankPartition> parts = partition(net, options.ranks);
    const auto ranks = static_cast<std::uint16_t>(options.ranks);
    std::vector<RankOutcome> outcomes(ranks);
    ErrorSink errors;

    if (ranks == 1)
    {
        outcomes[0] = run_rank(parts[0], config, nullptr, steps, options.timeout);
    }
    else if (options.transport == TransportKind::in_memory)
    {
        LoopbackHub hub(ranks);
        std::vector<std::jthread> threads;
        for (std::uint16_t r = 0; r < ranks; ++r)
        {
            threads.emplace_back([&, r] {
                try
                {
                    auto endpoint = hub.endpoint(r);
                    outcomes[r] = run_rank(parts[r], config, endpoint.get(), steps, options.timeout);
                }
                catch (...)
                {
                    errors.record(std::current_exception());
                    hub.abort(r);
                }
            });
        }
    }
    else
    {
        std::vector<TcpListener> listeners;
        std::vector<Endpoint> endpoints;
        listeners.reserve(ranks);
        for (std::uint16_t r = 0; r < ranks; ++r)
        {
            listeners.emplace_back(0, "127.0.0.1");
            endpoints.push_back({"127.0.0.1", listeners.back().port()});
        }
        std::vector<std::jthread> threads;
        for (std::uint16_t r = 0; r < ranks; ++r)
        {
            threads.emplace_back([&, r] {
                try
                {
                    TcpTransport transport(r, endpoints, std::move(listeners[r]), options.timeout);
                    outcomes[r] = run_rank(parts[r], config, &transport, steps, options.timeout);
                }
                catch (...)
                {
                    errors.record(std::current_exception());
                }
            });
        }
    }
    errors.rethrow();

    RunResult result;
    for (RankOutcome &o : outcomes)
    {
        result.per_rank.push_back(o.metrics);
        result.raster.insert(result.raster.end(), o.raster.begin(), o.raster.end());
    }
    std::sort(result.raster.begin(), result.raster.end());
    result.metrics = merge_metrics(result.per_rank);
    return result;
}

} // namespace dpsnn
