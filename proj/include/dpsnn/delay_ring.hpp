#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dpsnn {

/// Circular buffer of future synaptic input: one accumulator per local
/// neuron per slot, length = max delay + 1 so that the slot being drained
/// never aliases a pending delivery.
class DelayRing
{
public:
    DelayRing(std::uint32_t neurons, std::uint16_t max_delay_steps);

    std::uint32_t length() const { return length_; }
    std::uint32_t neurons() const { return neurons_; }

    /// Adds weight to target's accumulator delay_steps slots ahead of the
    /// current one. delay_steps must be in [1, max delay].
    void add(std::uint32_t target, std::uint16_t delay_steps, double weight)
    {
        if (delay_steps == 0 || delay_steps >= length_) [[unlikely]]
        {
            reject_delay(delay_steps);
        }
        std::uint32_t slot = head_ + delay_steps;
        if (slot >= length_)
        {
            slot -= length_;
        }
        data_[std::size_t{slot} * neurons_ + target] += weight;
    }

    /// Pending input delay_steps ahead of the current slot (0 = current).
    double pending(std::uint32_t target, std::uint16_t delay_steps) const;

    /// Moves the current slot into out (size = neurons) and zeroes it.
    void drain(std::span<double> out);
    void advance();

private:
    [[noreturn]] void reject_delay(std::uint16_t delay_steps) const;

    std::uint32_t neurons_;
    std::uint32_t length_;
    std::uint32_t head_ = 0;
    std::vector<double> data_;
};

} // namespace dpsnn
