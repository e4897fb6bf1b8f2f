#include "dpsnn/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpsnn {

void validate(const StdpParams &params)
{
    if (!(params.tau_plus > 0.0) || !(params.tau_minus > 0.0))
    {
        throw std::invalid_argument("STDP time constants must be positive");
    }
    if (!(params.w_min <= params.w_max))
    {
        throw std::invalid_argument("STDP w_min must not exceed w_max");
    }
    if (!(params.a_plus >= 0.0) || !(params.a_minus >= 0.0))
    {
        throw std::invalid_argument("STDP amplitudes must be non-negative");
    }
}

double stdp_delta_w(double dt_pre_post, const StdpParams &params)
{
    if (dt_pre_post > 0.0)
    {
        return params.a_plus * std::exp(-dt_pre_post / params.tau_plus);
    }
    if (dt_pre_post < 0.0)
    {
        return -params.a_minus * std::exp(dt_pre_post / params.tau_minus);
    }
    return 0.0;
}

StdpRule::StdpRule(const StdpParams &params, double dt_ms)
        : params_(params)
        , pre_decay_(std::exp(-dt_ms / params.tau_plus))
        , post_decay_(std::exp(-dt_ms / params.tau_minus))
        , lower_(std::max(0.0, params.w_min))
{
    validate(params);
}

double StdpRule::clamp(double weight) const
{
    // excitatory weights may shrink to zero but never change sign
    return std::clamp(weight, lower_, std::max(lower_, params_.w_max));
}

double apply_stdp(double weight, std::span<const std::uint32_t> pre_steps,
        std::span<const std::uint32_t> post_steps, double dt_ms,
        const StdpParams &params)
{
    if (!params.enabled || (pre_steps.empty() && post_steps.empty()))
    {
        return weight;
    }
    const StdpRule rule(params, dt_ms);
    const std::uint32_t first = std::min(pre_steps.empty() ? UINT32_MAX : pre_steps.front(),
            post_steps.empty() ? UINT32_MAX : post_steps.front());
    const std::uint32_t last = std::max(pre_steps.empty() ? 0u : pre_steps.back(),
            post_steps.empty() ? 0u : post_steps.back());

    double pre_trace = 0.0;
    double post_trace = 0.0;
    std::size_t next_pre = 0;
    std::size_t next_post = 0;
    for (std::uint32_t step = first; step <= last; ++step)
    {
        pre_trace *= rule.pre_decay();
        post_trace *= rule.post_decay();
        unsigned pre_now = 0;
        unsigned post_now = 0;
        while (next_pre < pre_steps.size() && pre_steps[next_pre] == step)
        {
            ++pre_now;
            ++next_pre;
        }
        while (next_post < post_steps.size() && post_steps[next_post] == step)
        {
            ++post_now;
            ++next_post;
        }
        for (unsigned k = 0; k < pre_now; ++k)
        {
            weight = rule.depress(weight, post_trace);
        }
        for (unsigned k = 0; k < post_now; ++k)
        {
            weight = rule.potentiate(weight, pre_trace);
        }
        pre_trace += pre_now;
        post_trace += post_now;
    }
    return weight;
}

} // namespace dpsnn
