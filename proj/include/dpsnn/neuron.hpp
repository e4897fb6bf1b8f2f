#pragma once

#include <cstdint>
#include <optional>

namespace dpsnn {

enum class IzhikevichKind
{
    regular_spiking,
    fast_spiking,
};

/// Two-variable quadratic model v' = 0.04v^2 + 5v + 140 - u + I,
/// u' = a(bv - u), reset v <- c, u <- u + d once v reaches v_peak.
struct IzhikevichParams
{
    double a = 0.02;
    double b = 0.2;
    double c = -65.0;
    double d = 8.0;
    double v_peak = 30.0;

    bool operator==(const IzhikevichParams &) const = default;
};

/// Leaky integrate-and-fire with a calcium-like adaptation variable c that
/// drives a hyperpolarising current g_c * c * (v - e_k).
struct AdaptiveLifParams
{
    double tau_m = 20.0;
    double v_rest = -70.0;
    double v_thresh = -50.0;
    double v_reset = -60.0;
    double t_refr = 2.0;
    double g_c = 0.05;
    double tau_c = 500.0;
    double delta_c = 0.2;
    double e_k = -90.0;

    bool operator==(const AdaptiveLifParams &) const = default;
};

struct NeuronState
{
    double v = -65.0;
    /// Recovery variable u (Izhikevich) or calcium c (adaptive LIF).
    double w = 0.0;
    double refr_remaining = 0.0;
    std::optional<std::uint32_t> last_spike_step;

    bool operator==(const NeuronState &) const = default;
};

struct StepResult
{
    NeuronState state;
    bool spiked = false;
};

IzhikevichParams izhikevich_preset(IzhikevichKind kind);

/// Throws std::invalid_argument when a <= 0 or v_peak <= c.
void validate(const IzhikevichParams &params);
void validate(const AdaptiveLifParams &params);

/// One explicit-Euler step. The cut-off is tested on entry: a state already
/// at or above v_peak is reset and reported as a spike without being
/// integrated. Otherwise v advances in two half steps and u in one full step
/// using the updated v.
StepResult step_izhikevich(const NeuronState &state,
        const IzhikevichParams &params, double i_syn, double dt);

/// One explicit-Euler step. While refractory the membrane is clamped to
/// v_reset; the adaptation variable decays in every step.
StepResult step_adaptive_lif(const NeuronState &state,
        const AdaptiveLifParams &params, double i_syn, double dt);

} // namespace dpsnn
