#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace dpsnn {

/// A value with an absolute uncertainty.
struct Measured
{
    double value = 0.0;
    double error = 0.0;

    double relative_error() const { return value != 0.0 ? error / value : 0.0; }
};

/// Mains-side electrical reading of one platform during a run.
struct PowerMeasurement
{
    double voltage = 220.0;
    double current = 0.0;
    double current_error = 0.005;
    /// Idle draw to subtract before deriving anything; 0 keeps the
    /// whole-system (pessimistic) figure.
    double baseline_w = 0.0;

    bool operator==(const PowerMeasurement &) const = default;
};

void validate(const PowerMeasurement &m);

struct PlatformRecord
{
    std::string label;
    PowerMeasurement measurement;
    double wall_seconds = 0.0;
    std::uint64_t synaptic_events = 0;
};

struct EnergyReport
{
    std::string label;
    double wall_seconds = 0.0;
    std::uint64_t synaptic_events = 0;
    Measured power_w;
    Measured energy_j;
    Measured joule_per_event;
};

/// V * I - baseline, +- V * current_error.
Measured electrical_power(const PowerMeasurement &m);
/// power * seconds; the relative error carries over unchanged.
Measured energy_to_solution(const Measured &power_w, double wall_seconds);
/// energy / events. Throws UndefinedMetric when events == 0.
Measured energy_per_event(const Measured &energy_j, std::uint64_t events);

EnergyReport energy_report(const PlatformRecord &record);

struct Ratio
{
    double a_over_b = 0.0;
    double b_over_a = 0.0;
};

struct ReferenceCost
{
    std::string_view system;
    double joule_per_event;
};

/// Published per-event costs of other neuromorphic platforms, for context.
inline constexpr std::array<ReferenceCost, 3> reference_costs{{
        {"compass-simulator-core-i7", 5.7e-6},
        {"spinnaker", 20e-9},
        {"truenorth-asic", 26e-12},
}};

struct ComparisonReport
{
    EnergyReport a;
    EnergyReport b;
    Ratio energy;
    Ratio power;
    Ratio time;
    Ratio joule_per_event;
};

ComparisonReport comparison_report(const PlatformRecord &a, const PlatformRecord &b);

/// Machine-readable `key = value` document: one `energy.<label>.*` block
/// per platform, then `comparison.*` and `reference.*` when a comparison
/// is given.
void write_energy_document(std::ostream &out, std::span<const EnergyReport> reports,
        const ComparisonReport *comparison = nullptr);

/// Aligned human-readable table: one column per platform plus a ratio
/// column when two platforms are compared.
void write_energy_table(std::ostream &out, std::span<const EnergyReport> reports,
        const ComparisonReport *comparison = nullptr);

} // namespace dpsnn
