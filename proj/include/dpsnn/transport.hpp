#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace dpsnn {

/// One item taken off a rank's inbound queue: either an encoded frame or
/// the notice that a peer went away.
struct Incoming
{
    std::uint16_t from = 0;
    bool disconnected = false;
    std::vector<std::uint8_t> bytes;
};

/// Point-to-point byte transport between ranks. Implementations guarantee
/// reliable, per-pair FIFO delivery of whole frames.
class Transport
{
public:
    virtual ~Transport() = default;

    virtual std::uint16_t rank() const = 0;
    virtual std::uint16_t size() const = 0;

    /// Throws ExchangeFailure if the peer cannot be reached.
    virtual void send(std::uint16_t to, std::vector<std::uint8_t> frame) = 0;

    /// Next inbound item from any peer, or nullopt once timeout elapses.
    virtual std::optional<Incoming> receive(std::chrono::milliseconds timeout) = 0;
};

/// Thread-safe inbound queue shared by the transports.
class Mailbox
{
public:
    void push(Incoming item);
    std::optional<Incoming> pop(std::chrono::milliseconds timeout);

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<Incoming> queue_;
};

/// In-process transport: one mailbox per rank, ranks run as threads.
class LoopbackHub
{
public:
    explicit LoopbackHub(std::uint16_t ranks);

    std::unique_ptr<Transport> endpoint(std::uint16_t rank);

    /// Tells every rank that `failed_rank` is gone, waking blocked receivers.
    void abort(std::uint16_t failed_rank);

    std::uint16_t size() const { return static_cast<std::uint16_t>(mailboxes_.size()); }
    Mailbox &mailbox(std::uint16_t rank) { return *mailboxes_[rank]; }

private:
    std::vector<std::unique_ptr<Mailbox>> mailboxes_;
};

} // namespace dpsnn
