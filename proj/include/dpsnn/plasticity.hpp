#pragma once

#include <cstdint>
#include <span>

namespace dpsnn {

struct StdpParams
{
    double a_plus = 0.005;
    double a_minus = 0.00525;
    double tau_plus = 20.0;
    double tau_minus = 20.0;
    double w_min = 0.0;
    double w_max = 0.1;
    bool enabled = false;

    bool operator==(const StdpParams &) const = default;
};

void validate(const StdpParams &params);

/// Pairwise window: +a_plus e^{-dt/tau_plus} for dt = t_post - t_pre > 0,
/// -a_minus e^{dt/tau_minus} for dt < 0, zero at dt = 0.
double stdp_delta_w(double dt_pre_post, const StdpParams &params);

/// Per-step primitives of the all-to-all trace rule. A trace holds
/// sum_k exp(-(t - t_k) / tau) over earlier spikes; each step the caller
/// decays every trace, applies weight updates from the decayed values, and
/// only then bumps the traces of neurons that spiked in that step, so that
/// coincident pre/post spikes contribute nothing.
class StdpRule
{
public:
    StdpRule(const StdpParams &params, double dt_ms);

    const StdpParams &params() const { return params_; }
    double pre_decay() const { return pre_decay_; }
    double post_decay() const { return post_decay_; }

    /// Weight after a presynaptic spike meets the postsynaptic trace.
    double depress(double weight, double post_trace) const
    {
        return clamp(weight - params_.a_minus * post_trace);
    }

    /// Weight after a postsynaptic spike meets the presynaptic trace.
    double potentiate(double weight, double pre_trace) const
    {
        return clamp(weight + params_.a_plus * pre_trace);
    }

    double clamp(double weight) const;

private:
    StdpParams params_;
    double pre_decay_;
    double post_decay_;
    double lower_;
};

/// Runs the trace rule for a single excitatory synapse over the given spike
/// steps (each list ascending) and returns the final weight. With
/// params.enabled == false the weight is returned untouched.
double apply_stdp(double weight, std::span<const std::uint32_t> pre_steps,
        std::span<const std::uint32_t> post_steps, double dt_ms,
        const StdpParams &params);

} // namespace dpsnn
