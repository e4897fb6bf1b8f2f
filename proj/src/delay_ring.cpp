#include "dpsnn/delay_ring.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dpsnn/errors.hpp"

namespace dpsnn {

DelayRing::DelayRing(std::uint32_t neurons, std::uint16_t max_delay_steps)
        : neurons_(neurons)
        , length_(std::uint32_t{max_delay_steps} + 1)
        , data_(std::size_t{length_} * neurons, 0.0)
{
    if (max_delay_steps == 0)
    {
        throw ContractViolation("delay ring needs a maximum delay of at least one step");
    }
}

double DelayRing::pending(std::uint32_t target, std::uint16_t delay_steps) const
{
    if (delay_steps >= length_)
    {
        throw std::out_of_range("delay beyond ring length");
    }
    return data_[std::size_t{(head_ + delay_steps) % length_} * neurons_ + target];
}

void DelayRing::drain(std::span<double> out)
{
    if (out.size() != neurons_)
    {
        throw std::invalid_argument("drain buffer size mismatch");
    }
    const auto slot = data_.begin() + static_cast<std::ptrdiff_t>(std::size_t{head_} * neurons_);
    std::copy(slot, slot + neurons_, out.begin());
    std::fill(slot, slot + neurons_, 0.0);
}

void DelayRing::advance()
{
    head_ = head_ + 1 == length_ ? 0 : head_ + 1;
}

void DelayRing::reject_delay(std::uint16_t delay_steps) const
{
    if (delay_steps == 0)
    {
        throw ContractViolation("synaptic delay of 0 steps; the minimum is 1");
    }
    throw ContractViolation("synaptic delay of " + std::to_string(delay_steps) +
            " steps exceeds the ring capacity " + std::to_string(length_ - 1));
}

} // namespace dpsnn
