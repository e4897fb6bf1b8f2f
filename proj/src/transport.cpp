#include "dpsnn/transport.hpp"

#include <stdexcept>

#include "dpsnn/errors.hpp"

namespace dpsnn {

void Mailbox::push(Incoming item)
{
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(item));
    }
    ready_.notify_one();
}

std::optional<Incoming> Mailbox::pop(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mutex_);
    if (!ready_.wait_for(lock, timeout, [this] { return !queue_.empty(); }))
    {
        return std::nullopt;
    }
    Incoming item = std::move(queue_.front());
    queue_.pop_front();
    return item;
}

namespace {

class LoopbackTransport : public Transport
{
public:
    LoopbackTransport(LoopbackHub &hub, std::uint16_t rank) : hub_(hub), rank_(rank) {}

    std::uint16_t rank() const override { return rank_; }
    std::uint16_t size() const override { return hub_.size(); }

    void send(std::uint16_t to, std::vector<std::uint8_t> frame) override
    {
        if (to >= hub_.size())
        {
            throw ExchangeFailure("no such rank " + std::to_string(to), to, 0);
        }
        hub_.mailbox(to).push({rank_, false, std::move(frame)});
    }

    std::optional<Incoming> receive(std::chrono::milliseconds timeout) override
    {
        return hub_.mailbox(rank_).pop(timeout);
    }

private:
    LoopbackHub &hub_;
    std::uint16_t rank_;
};

} // namespace

LoopbackHub::LoopbackHub(std::uint16_t ranks)
{
    for (std::uint16_t r = 0; r < ranks; ++r)
    {
        mailboxes_.push_back(std::make_unique<Mailbox>());
    }
}

std::unique_ptr<Transport> LoopbackHub::endpoint(std::uint16_t rank)
{
    if (rank >= size())
    {
        throw std::out_of_range("loopback rank out of range");
    }
    return std::make_unique<LoopbackTransport>(*this, rank);
}

void LoopbackHub::abort(std::uint16_t failed_rank)
{
    for (std::uint16_t r = 0; r < size(); ++r)
    {
        if (r != failed_rank)
        {
            mailboxes_[r]->push({failed_rank, true, {}});
        }
    }
}

} // namespace dpsnn
