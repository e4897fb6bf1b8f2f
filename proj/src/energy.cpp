#include "dpsnn/energy.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "dpsnn/errors.hpp"
#include "dpsnn/keyvalue.hpp"

namespace dpsnn {

void validate(const PowerMeasurement &m)
{
    if (!(m.voltage > 0.0))
    {
        throw std::invalid_argument("voltage must be positive");
    }
    if (!(m.current >= 0.0))
    {
        throw std::invalid_argument("current must be non-negative");
    }
    if (!(m.current_error >= 0.0))
    {
        throw std::invalid_argument("current_error must be non-negative");
    }
    if (!(m.baseline_w >= 0.0) || m.baseline_w > m.voltage * m.current)
    {
        throw std::invalid_argument("baseline_w must lie between 0 and the measured power");
    }
}

Measured electrical_power(const PowerMeasurement &m)
{
    validate(m);
    return {m.voltage * m.current - m.baseline_w, m.voltage * m.current_error};
}

Measured energy_to_solution(const Measured &power_w, double wall_seconds)
{
    if (!(wall_seconds >= 0.0) || !(power_w.value >= 0.0))
    {
        throw std::invalid_argument("power and time must be non-negative");
    }
    return {power_w.value * wall_seconds, power_w.error * wall_seconds};
}

Measured energy_per_event(const Measured &energy_j, std::uint64_t events)
{
    if (events == 0)
    {
        throw UndefinedMetric("energy per synaptic event is undefined for zero events");
    }
    const auto n = static_cast<double>(events);
    return {energy_j.value / n, energy_j.error / n};
}

EnergyReport energy_report(const PlatformRecord &record)
{
    if (!(record.wall_seconds > 0.0))
    {
        throw std::invalid_argument("platform `" + record.label +
                "` needs a positive wall time");
    }
    EnergyReport r;
    r.label = record.label;
    r.wall_seconds = record.wall_seconds;
    r.synaptic_events = record.synaptic_events;
    r.power_w = electrical_power(record.measurement);
    r.energy_j = energy_to_solution(r.power_w, record.wall_seconds);
    r.joule_per_event = energy_per_event(r.energy_j, record.synaptic_events);
    return r;
}

namespace {

Ratio ratio(double a, double b)
{
    return {b != 0.0 ? a / b : INFINITY, a != 0.0 ? b / a : INFINITY};
}

std::string with_unit(double value, const char *unit)
{
    static const struct
    {
        double scale;
        const char *prefix;
    } prefixes[] = {{1e3, "k"}, {1.0, ""}, {1e-3, "m"}, {1e-6, "u"}, {1e-9, "n"}, {1e-12, "p"}};
    for (const auto &p : prefixes)
    {
        if (std::abs(value) >= p.scale || p.scale == 1e-12)
        {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3g %s%s", value / p.scale, p.prefix, unit);
            return buf;
        }
    }
    return "0";
}

std::string plus_minus(const Measured &m, const char *unit)
{
    return with_unit(m.value, unit) + " +- " + with_unit(m.error, unit);
}

std::string times(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3gx", r);
    return buf;
}

} // namespace

ComparisonReport comparison_report(const PlatformRecord &a, const PlatformRecord &b)
{
    ComparisonReport c;
    c.a = energy_report(a);
    c.b = energy_report(b);
    c.energy = ratio(c.a.energy_j.value, c.b.energy_j.value);
    c.power = ratio(c.a.power_w.value, c.b.power_w.value);
    c.time = ratio(c.a.wall_seconds, c.b.wall_seconds);
    c.joule_per_event = ratio(c.a.joule_per_event.value, c.b.joule_per_event.value);
    return c;
}

void write_energy_document(std::ostream &out, std::span<const EnergyReport> reports,
        const ComparisonReport *comparison)
{
    for (const EnergyReport &r : reports)
    {
        const std::string p = "energy." + r.label + ".";
        out << p << "wall_seconds = " << format_double(r.wall_seconds) << '\n'
            << p << "synaptic_events = " << r.synaptic_events << '\n'
            << p << "power_w = " << format_double(r.power_w.value) << '\n'
            << p << "power_error_w = " << format_double(r.power_w.error) << '\n'
            << p << "energy_j = " << format_double(r.energy_j.value) << '\n'
            << p << "energy_error_j = " << format_double(r.energy_j.error) << '\n'
            << p << "joule_per_event = " << format_double(r.joule_per_event.value) << '\n'
            << p << "joule_per_event_error = " << format_double(r.joule_per_event.error)
            << '\n'
            << p << "relative_error = " << format_double(r.power_w.relative_error()) << '\n';
    }
    if (comparison != nullptr)
    {
        const auto ratio_lines = [&](const char *name, const Ratio &r) {
            out << "comparison." << name << ".a_over_b = " << format_double(r.a_over_b) << '\n'
                << "comparison." << name << ".b_over_a = " << format_double(r.b_over_a) << '\n';
        };
        out << "comparison.a = " << comparison->a.label << '\n'
            << "comparison.b = " << comparison->b.label << '\n';
        ratio_lines("energy", comparison->energy);
        ratio_lines("power", comparison->power);
        ratio_lines("time", comparison->time);
        ratio_lines("joule_per_event", comparison->joule_per_event);
        for (const ReferenceCost &ref : reference_costs)
        {
            out << "reference." << ref.system << ".joule_per_event = "
                << format_double(ref.joule_per_event) << '\n';
        }
    }
}

void write_energy_table(std::ostream &out, std::span<const EnergyReport> reports,
        const ComparisonReport *comparison)
{
    struct Row
    {
        std::string name;
        std::vector<std::string> cells;
    };
    std::vector<Row> rows{{"", {}}, {"energy per synaptic event", {}},
            {"energy to solution", {}}, {"power draw", {}}, {"time to solution", {}},
            {"synaptic events", {}}};
    for (const EnergyReport &r : reports)
    {
        rows[0].cells.push_back(r.label);
        rows[1].cells.push_back(plus_minus(r.joule_per_event, "J"));
        rows[2].cells.push_back(plus_minus(r.energy_j, "J"));
        rows[3].cells.push_back(plus_minus(r.power_w, "W"));
        rows[4].cells.push_back(with_unit(r.wall_seconds, "s"));
        rows[5].cells.push_back(std::to_string(r.synaptic_events));
    }
    if (comparison != nullptr)
    {
        const auto better = [](const Ratio &r, const std::string &a, const std::string &b) {
            return r.a_over_b >= 1.0 ? b + " " + times(r.a_over_b) + " lower"
                                     : a + " " + times(r.b_over_a) + " lower";
        };
        const std::string &a = comparison->a.label;
        const std::string &b = comparison->b.label;
        rows[0].cells.push_back("comparison");
        rows[1].cells.push_back(better(comparison->joule_per_event, a, b));
        rows[2].cells.push_back(better(comparison->energy, a, b));
        rows[3].cells.push_back(better(comparison->power, a, b));
        rows[4].cells.push_back(better(comparison->time, a, b));
        rows[5].cells.push_back("");
    }
    std::size_t name_width = 0;
    std::vector<std::size_t> widths(rows[0].cells.size(), 0);
    for (const Row &row : rows)
    {
        name_width = std::max(name_width, row.name.size());
        for (std::size_t i = 0; i < row.cells.size(); ++i)
        {
            widths[i] = std::max(widths[i], row.cells[i].size());
        }
    }
    for (const Row &row : rows)
    {
        out << row.name << std::string(name_width - row.name.size(), ' ');
        for (std::size_t i = 0; i < row.cells.size(); ++i)
        {
            out << " | " << row.cells[i] << std::string(widths[i] - row.cells[i].size(), ' ');
        }
        out << '\n';
    }
    if (comparison != nullptr)
    {
        out << "reference costs:";
        for (const ReferenceCost &ref : reference_costs)
        {
            out << ' ' << ref.system << ' ' << with_unit(ref.joule_per_event, "J") << ';';
        }
        out << '\n';
    }
}

} // namespace dpsnn
