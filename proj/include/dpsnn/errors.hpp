#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpsnn {

/// Integration produced a non-finite membrane or adaptation value.
class NumericalDivergence : public std::runtime_error
{
public:
    static constexpr std::uint32_t unknown_neuron = UINT32_MAX;

    explicit NumericalDivergence(std::uint32_t neuron = unknown_neuron);

    std::uint32_t neuron() const { return neuron_; }

private:
    std::uint32_t neuron_;
};

/// The requested grid cannot realise the requested fanout.
class InfeasibleSpec : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

class InfeasiblePartition : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (e.g. a zero-step delay).
class ContractViolation : public std::logic_error
{
    using std::logic_error::logic_error;
};

/// Malformed bytes on the wire: bad magic, unsupported version, truncation.
class FrameCorruption : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// A well-formed frame that breaks the exchange protocol (wrong step,
/// unexpected sender, unknown source neuron).
class ProtocolViolation : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// A peer disconnected or did not deliver its frame before the timeout.
class ExchangeFailure : public std::runtime_error
{
public:
    ExchangeFailure(const std::string &what, int rank, std::uint32_t step)
            : std::runtime_error(what), rank_(rank), step_(step)
    {
    }

    int rank() const { return rank_; }
    std::uint32_t step() const { return step_; }

private:
    int rank_;
    std::uint32_t step_;
};

class CalibrationFailure : public std::runtime_error
{
public:
    CalibrationFailure(const std::string &what, double achieved_rate_hz)
            : std::runtime_error(what), achieved_rate_hz_(achieved_rate_hz)
    {
    }

    double achieved_rate_hz() const { return achieved_rate_hz_; }

private:
    double achieved_rate_hz_;
};

/// A derived metric has no defined value (e.g. energy per zero events).
class UndefinedMetric : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Configuration failed validation; carries one diagnostic per bad field.
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(std::vector<std::string> diagnostics);

    const std::vector<std::string> &diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

} // namespace dpsnn
