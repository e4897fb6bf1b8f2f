#include "dpsnn/config.hpp"

#include <charconv>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dpsnn/errors.hpp"

namespace dpsnn {

namespace {

template <typename T>
bool parse_number(const std::string &text, T &out)
{
    const char *first = text.data();
    const char *last = first + text.size();
    if constexpr (std::is_unsigned_v<T>)
    {
        if (first != last && *first == '-')
        {
            return false;
        }
    }
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_bool(const std::string &text, bool &out)
{
    if (text == "true" || text == "1" || text == "on")
    {
        out = true;
        return true;
    }
    if (text == "false" || text == "0" || text == "off")
    {
        out = false;
        return true;
    }
    return false;
}

struct Field
{
    std::string key;
    std::function<std::string(const RunConfig &)> get;
    /// Returns an error message, empty on success.
    std::function<std::string(RunConfig &, const std::string &)> set;
};

template <typename T>
Field number(std::string key, T RunConfig::*section, auto member)
{
    return {key,
            [=](const RunConfig &c) {
                const auto v = (c.*section).*member;
                if constexpr (std::is_floating_point_v<std::remove_cvref_t<decltype(v)>>)
                {
                    return format_double(v);
                }
                else
                {
                    return std::to_string(v);
                }
            },
            [=](RunConfig &c, const std::string &text) -> std::string {
                auto &slot = (c.*section).*member;
                return parse_number(text, slot) ? "" : "expected a number, got `" + text + "`";
            }};
}

template <typename V>
Field top_number(std::string key, V RunConfig::*member)
{
    return {key,
            [=](const RunConfig &c) {
                if constexpr (std::is_floating_point_v<V>)
                {
                    return format_double(c.*member);
                }
                else
                {
                    return std::to_string(c.*member);
                }
            },
            [=](RunConfig &c, const std::string &text) -> std::string {
                return parse_number(text, c.*member) ? ""
                                                     : "expected a number, got `" + text + "`";
            }};
}

template <typename E>
Field enumeration(std::string key, E RunConfig::*member,
        std::vector<std::pair<E, std::string>> names)
{
    return {key,
            [=](const RunConfig &c) {
                for (const auto &[value, name] : names)
                {
                    if (value == c.*member)
                    {
                        return name;
                    }
                }
                return std::string("?");
            },
            [=](RunConfig &c, const std::string &text) -> std::string {
                std::string choices;
                for (const auto &[value, name] : names)
                {
                    if (name == text)
                    {
                        c.*member = value;
                        return "";
                    }
                    choices += (choices.empty() ? "" : ", ") + name;
                }
                return "expected one of " + choices + ", got `" + text + "`";
            }};
}

Field model_field()
{
    return {"grid.model",
            [](const RunConfig &c) {
                return std::string(c.grid.model == ModelFamily::izhikevich ? "izhikevich"
                                                                           : "adaptive_lif");
            },
            [](RunConfig &c, const std::string &text) -> std::string {
                if (text == "adaptive_lif")
                {
                    c.grid.model = ModelFamily::adaptive_lif;
                }
                else if (text == "izhikevich")
                {
                    c.grid.model = ModelFamily::izhikevich;
                }
                else
                {
                    return "expected adaptive_lif or izhikevich, got `" + text + "`";
                }
                return "";
            }};
}

const std::vector<Field> &fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        t.push_back(number("grid.x", &RunConfig::grid, &GridSpec::grid_x));
        t.push_back(number("grid.y", &RunConfig::grid, &GridSpec::grid_y));
        t.push_back(number("grid.neurons_per_column", &RunConfig::grid,
                &GridSpec::neurons_per_column));
        t.push_back(number("grid.exc_fraction", &RunConfig::grid, &GridSpec::exc_fraction));
        t.push_back(number("grid.target_fanout", &RunConfig::grid, &GridSpec::target_fanout));
        t.push_back(number("grid.decay_lambda", &RunConfig::grid, &GridSpec::decay_lambda));
        t.push_back(number("grid.delay_min_ms", &RunConfig::grid, &GridSpec::delay_min_ms));
        t.push_back(number("grid.delay_max_ms", &RunConfig::grid, &GridSpec::delay_max_ms));
        t.push_back(number("grid.w_exc", &RunConfig::grid, &GridSpec::w_exc));
        t.push_back(number("grid.w_inh", &RunConfig::grid, &GridSpec::w_inh));
        t.push_back(number("grid.seed", &RunConfig::grid, &GridSpec::seed));
        t.push_back(model_field());

        t.push_back(number("stimulus.ext_synapses_per_neuron", &RunConfig::stimulus,
                &StimulusSpec::ext_synapses_per_neuron));
        t.push_back(number("stimulus.ext_rate_hz", &RunConfig::stimulus,
                &StimulusSpec::ext_rate_hz));
        t.push_back(number("stimulus.ext_weight", &RunConfig::stimulus,
                &StimulusSpec::ext_weight));
        t.push_back(top_number("stimulus.seed", &RunConfig::stimulus_seed));

        t.push_back(number("lif.tau_m", &RunConfig::lif, &AdaptiveLifParams::tau_m));
        t.push_back(number("lif.v_rest", &RunConfig::lif, &AdaptiveLifParams::v_rest));
        t.push_back(number("lif.v_thresh", &RunConfig::lif, &AdaptiveLifParams::v_thresh));
        t.push_back(number("lif.v_reset", &RunConfig::lif, &AdaptiveLifParams::v_reset));
        t.push_back(number("lif.t_refr", &RunConfig::lif, &AdaptiveLifParams::t_refr));
        t.push_back(number("lif.g_c", &RunConfig::lif, &AdaptiveLifParams::g_c));
        t.push_back(number("lif.tau_c", &RunConfig::lif, &AdaptiveLifParams::tau_c));
        t.push_back(number("lif.delta_c", &RunConfig::lif, &AdaptiveLifParams::delta_c));
        t.push_back(number("lif.e_k", &RunConfig::lif, &AdaptiveLifParams::e_k));

        t.push_back({"stdp.enabled",
                [](const RunConfig &c) { return std::string(c.stdp.enabled ? "true" : "false"); },
                [](RunConfig &c, const std::string &text) -> std::string {
                    return parse_bool(text, c.stdp.enabled)
                            ? ""
                            : "expected true or false, got `" + text + "`";
                }});
        t.push_back(number("stdp.a_plus", &RunConfig::stdp, &StdpParams::a_plus));
        t.push_back(number("stdp.a_minus", &RunConfig::stdp, &StdpParams::a_minus));
        t.push_back(number("stdp.tau_plus", &RunConfig::stdp, &StdpParams::tau_plus));
        t.push_back(number("stdp.tau_minus", &RunConfig::stdp, &StdpParams::tau_minus));
        t.push_back(number("stdp.w_min", &RunConfig::stdp, &StdpParams::w_min));
        t.push_back(number("stdp.w_max", &RunConfig::stdp, &StdpParams::w_max));

        t.push_back(top_number("sim.dt_ms", &RunConfig::dt_ms));
        t.push_back(top_number("sim.seconds", &RunConfig::seconds));
        t.push_back(top_number("sim.exc_scale", &RunConfig::exc_scale));

        t.push_back(top_number("run.ranks", &RunConfig::ranks));
        t.push_back(enumeration<TransportKind>("run.transport", &RunConfig::transport,
                {{TransportKind::in_memory, "in_memory"}, {TransportKind::tcp, "tcp"}}));
        t.push_back(top_number("run.timeout_s", &RunConfig::timeout_s));
        t.push_back(enumeration<RasterFormat>("run.raster", &RunConfig::raster_format,
                {{RasterFormat::binary, "binary"}, {RasterFormat::csv, "csv"},
                        {RasterFormat::none, "none"}}));
        t.push_back(top_number("run.build_threads", &RunConfig::build_threads));

        t.push_back(number("calibrate.target_hz", &RunConfig::calibrate,
                &CalibrateSettings::target_hz));
        t.push_back(number("calibrate.band_hz", &RunConfig::calibrate,
                &CalibrateSettings::band_hz));
        t.push_back(number("calibrate.probe_seconds", &RunConfig::calibrate,
                &CalibrateSettings::probe_seconds));
        t.push_back(number("calibrate.scale_lo", &RunConfig::calibrate,
                &CalibrateSettings::scale_lo));
        t.push_back(number("calibrate.scale_hi", &RunConfig::calibrate,
                &CalibrateSettings::scale_hi));
        t.push_back(number("calibrate.tolerance_hz", &RunConfig::calibrate,
                &CalibrateSettings::tolerance_hz));
        t.push_back(number("calibrate.max_iterations", &RunConfig::calibrate,
                &CalibrateSettings::max_iterations));
        return t;
    }();
    return table;
}

constexpr std::string_view power_prefix = "power.";

std::string set_power(PowerSettings &p, std::string_view name, const std::string &text)
{
    const auto num = [&](double &slot) -> std::string {
        return parse_number(text, slot) ? "" : "expected a number, got `" + text + "`";
    };
    if (name == "label")
    {
        if (text.empty() || text.find_first_of(" \t.=") != std::string::npos)
        {
            return "label must be a single word without dots";
        }
        p.label = text;
        return "";
    }
    if (name == "voltage")
    {
        return num(p.measurement.voltage);
    }
    if (name == "current")
    {
        return num(p.measurement.current);
    }
    if (name == "current_error")
    {
        return num(p.measurement.current_error);
    }
    if (name == "baseline_w")
    {
        return num(p.measurement.baseline_w);
    }
    return "unknown key";
}

void collect(std::vector<std::string> &out, const std::string &section, auto &&check)
{
    try
    {
        check();
    }
    catch (const std::exception &e)
    {
        out.push_back(section + ": " + e.what());
    }
}

std::vector<std::string> invariant_problems(const RunConfig &c)
{
    std::vector<std::string> problems;
    if (!(c.dt_ms > 0.0))
    {
        problems.push_back("sim.dt_ms: must be positive");
    }
    else
    {
        collect(problems, "grid", [&] { validate(c.grid, c.dt_ms); });
    }
    if (!(c.seconds > 0.0))
    {
        problems.push_back("sim.seconds: must be positive");
    }
    if (!(c.exc_scale >= 0.0))
    {
        problems.push_back("sim.exc_scale: must be non-negative");
    }
    collect(problems, "stimulus", [&] { validate(c.stimulus); });
    collect(problems, "lif", [&] { validate(c.lif); });
    collect(problems, "stdp", [&] { validate(c.stdp); });
    if (c.ranks == 0)
    {
        problems.push_back("run.ranks: must be at least 1");
    }
    else if (c.ranks > c.grid.column_count())
    {
        problems.push_back("run.ranks: " + std::to_string(c.ranks) + " ranks exceed the " +
                std::to_string(c.grid.column_count()) + " columns");
    }
    if (!(c.timeout_s > 0.0))
    {
        problems.push_back("run.timeout_s: must be positive");
    }
    const CalibrateSettings &cal = c.calibrate;
    if (!(cal.target_hz >= 0.0) || !(cal.band_hz > 0.0))
    {
        problems.push_back("calibrate: target_hz must be >= 0 and band_hz > 0");
    }
    if (!(cal.probe_seconds > 0.0))
    {
        problems.push_back("calibrate.probe_seconds: must be positive");
    }
    if (!(cal.scale_lo >= 0.0) || !(cal.scale_hi > cal.scale_lo))
    {
        problems.push_back("calibrate: need 0 <= scale_lo < scale_hi");
    }
    if (!(cal.tolerance_hz > 0.0) || cal.max_iterations < 1)
    {
        problems.push_back("calibrate: tolerance_hz and max_iterations must be positive");
    }
    if (c.power)
    {
        collect(problems, "power", [&] { validate(c.power->measurement); });
    }
    return problems;
}

} // namespace

EngineConfig RunConfig::engine_config() const
{
    EngineConfig e;
    e.dt_ms = dt_ms;
    e.stimulus = stimulus;
    e.stimulus_seed = stimulus_seed;
    e.exc_scale = exc_scale;
    e.lif = lif;
    e.stdp = stdp;
    e.record_raster = true;
    return e;
}

RunOptions RunConfig::run_options() const
{
    RunOptions o;
    o.ranks = ranks;
    o.transport = transport;
    o.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0));
    return o;
}

void validate(const RunConfig &config)
{
    auto problems = invariant_problems(config);
    if (!problems.empty())
    {
        throw ConfigError(std::move(problems));
    }
}

RunConfig config_from_document(const KeyValueDocument &doc)
{
    RunConfig config;
    std::vector<std::string> problems;
    PowerSettings power;
    bool any_power = false;
    bool has_current = false;
    for (const auto &[key, value] : doc.entries())
    {
        if (key.starts_with(power_prefix))
        {
            any_power = true;
            const std::string_view name = std::string_view(key).substr(power_prefix.size());
            has_current = has_current || name == "current";
            if (const std::string err = set_power(power, name, value); !err.empty())
            {
                problems.push_back(key + ": " + err);
            }
            continue;
        }
        bool known = false;
        for (const Field &f : fields())
        {
            if (f.key == key)
            {
                known = true;
                if (const std::string err = f.set(config, value); !err.empty())
                {
                    problems.push_back(key + ": " + err);
                }
                break;
            }
        }
        if (!known)
        {
            problems.push_back(key + ": unknown key");
        }
    }
    if (any_power)
    {
        if (has_current)
        {
            config.power = power;
        }
        else
        {
            problems.push_back("power.current: required when any power.* key is given");
        }
    }
    if (problems.empty())
    {
        problems = invariant_problems(config);
    }
    if (!problems.empty())
    {
        throw ConfigError(std::move(problems));
    }
    return config;
}

KeyValueDocument config_to_document(const RunConfig &config)
{
    KeyValueDocument doc;
    for (const Field &f : fields())
    {
        doc.set(f.key, f.get(config));
    }
    if (config.power)
    {
        const PowerSettings &p = *config.power;
        doc.set("power.label", p.label);
        doc.set("power.voltage", format_double(p.measurement.voltage));
        doc.set("power.current", format_double(p.measurement.current));
        doc.set("power.current_error", format_double(p.measurement.current_error));
        doc.set("power.baseline_w", format_double(p.measurement.baseline_w));
    }
    return doc;
}

} // namespace dpsnn
