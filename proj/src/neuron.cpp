#include "dpsnn/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpsnn/errors.hpp"

namespace dpsnn {

NumericalDivergence::NumericalDivergence(std::uint32_t neuron)
        : std::runtime_error(neuron == unknown_neuron
                          ? std::string("numerical divergence in neuron update")
                          : "numerical divergence in neuron " +
                                  std::to_string(neuron))
        , neuron_(neuron)
{
}

IzhikevichParams izhikevich_preset(IzhikevichKind kind)
{
    switch (kind)
    {
    case IzhikevichKind::regular_spiking:
        return {0.02, 0.2, -65.0, 8.0, 30.0};
    case IzhikevichKind::fast_spiking:
        return {0.1, 0.2, -65.0, 2.0, 30.0};
    }
    throw std::invalid_argument("unknown Izhikevich neuron class");
}

void validate(const IzhikevichParams &params)
{
    if (!(params.a > 0.0))
    {
        throw std::invalid_argument("Izhikevich a must be positive");
    }
    if (!(params.v_peak > params.c))
    {
        throw std::invalid_argument("Izhikevich v_peak must exceed c");
    }
}

void validate(const AdaptiveLifParams &params)
{
    if (!(params.tau_m > 0.0) || !(params.tau_c > 0.0))
    {
        throw std::invalid_argument("LIF time constants must be positive");
    }
    if (!(params.v_thresh > params.v_reset))
    {
        throw std::invalid_argument("LIF v_thresh must exceed v_reset");
    }
    if (!(params.t_refr >= 0.0))
    {
        throw std::invalid_argument("LIF refractory period must be >= 0");
    }
}

namespace {

inline void check_finite(const NeuronState &s)
{
    if (!std::isfinite(s.v) || !std::isfinite(s.w))
    {
        throw NumericalDivergence();
    }
}

} // namespace

StepResult step_izhikevich(const NeuronState &state,
        const IzhikevichParams &params, double i_syn, double dt)
{
    StepResult out{state, false};
    NeuronState &s = out.state;
    if (s.v >= params.v_peak)
    {
        s.v = params.c;
        s.w += params.d;
        out.spiked = true;
        return out;
    }

    const double half = 0.5 * dt;
    for (int i = 0; i < 2; ++i)
    {
        s.v += half * (0.04 * s.v * s.v + 5.0 * s.v + 140.0 - s.w + i_syn);
    }
    s.w += dt * params.a * (params.b * s.v - s.w);
    check_finite(s);
    return out;
}

StepResult step_adaptive_lif(const NeuronState &state,
        const AdaptiveLifParams &params, double i_syn, double dt)
{
    StepResult out{state, false};
    NeuronState &s = out.state;
    const double c = state.w;
    s.w = c - dt * c / params.tau_c;

    if (state.refr_remaining > 0.0)
    {
        s.refr_remaining = std::max(0.0, state.refr_remaining - dt);
        // absorb round-off so that t_refr / dt steps are spent exactly
        if (s.refr_remaining < 1e-9 * dt)
        {
            s.refr_remaining = 0.0;
        }
        s.v = params.v_reset;
        check_finite(s);
        return out;
    }

    const double dv = -(state.v - params.v_rest) / params.tau_m -
            params.g_c * c * (state.v - params.e_k) + i_syn;
    s.v = state.v + dt * dv;
    check_finite(s);

    if (s.v >= params.v_thresh)
    {
        s.v = params.v_reset;
        s.w += params.delta_c;
        s.refr_remaining = params.t_refr;
        out.spiked = true;
    }
    return out;
}

} // namespace dpsnn
