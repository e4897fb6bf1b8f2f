#include "dpsnn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "dpsnn/calibration.hpp"
#include "dpsnn/errors.hpp"
#include "dpsnn/tcp_transport.hpp"

namespace dpsnn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned build_threads(const RunConfig &config)
{
    if (config.build_threads != 0)
    {
        return config.build_threads;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::ofstream open_output(const std::filesystem::path &path, bool binary = false)
{
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_provenance(std::ostream &out, const RunConfig &config)
{
    const KeyValueDocument doc = config_to_document(config);
    for (const auto &[key, value] : doc.entries())
    {
        out << "config." << key << " = " << value << '\n';
    }
}

/// Writes the raster in the configured format and returns the file name,
/// empty when rasters are disabled.
std::string write_raster(const std::filesystem::path &dir, const std::string &suffix,
        const RunConfig &config, std::span<const SpikeRecord> raster)
{
    switch (config.raster_format)
    {
    case RasterFormat::none:
        return "";
    case RasterFormat::csv: {
        const std::string name = "raster" + suffix + ".csv";
        auto out = open_output(dir / name);
        const auto entries = config_to_document(config).entries();
        write_raster_csv(out, raster, entries);
        return name;
    }
    case RasterFormat::binary:
        break;
    }
    const std::string name = "raster" + suffix + ".bin";
    auto out = open_output(dir / name, true);
    write_raster_binary(out, raster);
    // The binary stream has no header; its provenance travels alongside.
    config_to_document(config).save(dir / ("raster" + suffix + ".cfg"));
    return name;
}

struct RunSummary
{
    RunMetrics metrics;
    std::vector<RunMetrics> per_rank;
    double build_seconds = 0.0;
    std::uint64_t checksum = 0;
    std::string raster_file;
};

void write_metrics(std::ostream &out, const RunConfig &config, const Network &net,
        const RunSummary &s)
{
    const RunMetrics &m = s.metrics;
    const NetworkStats stats = network_stats(net);
    const double expected = expected_event_count(m.neurons, m.simulated_seconds,
            m.mean_rate_hz, stats.mean_fanout, config.stimulus.ext_synapses_per_neuron,
            config.stimulus.ext_rate_hz);
    out << "metrics.neurons = " << m.neurons << '\n'
        << "metrics.steps = " << config.steps() << '\n'
        << "metrics.ranks = " << s.per_rank.size() << '\n'
        << "metrics.simulated_seconds = " << format_double(m.simulated_seconds) << '\n'
        << "metrics.build_seconds = " << format_double(s.build_seconds) << '\n'
        << "metrics.wall_seconds = " << format_double(m.wall_seconds) << '\n'
        << "metrics.total_spikes = " << m.total_spikes << '\n'
        << "metrics.mean_rate_hz = " << format_double(m.mean_rate_hz) << '\n'
        << "metrics.internal_synaptic_events = " << m.internal_synaptic_events << '\n'
        << "metrics.external_synaptic_events = " << m.external_synaptic_events << '\n'
        << "metrics.total_synaptic_events = " << m.total_synaptic_events() << '\n'
        << "metrics.expected_synaptic_events = " << format_double(expected) << '\n'
        << "metrics.throughput_events_per_s = " << format_double(m.throughput()) << '\n'
        << "metrics.raster_checksum = " << s.checksum << '\n'
        << "metrics.raster_file = " << s.raster_file << '\n'
        << "network.synapses = " << net.synapse_count() << '\n'
        << "network.mean_fanout = " << format_double(stats.mean_fanout) << '\n'
        << "network.p0 = " << format_double(stats.p0) << '\n'
        << "network.equivalent_synapses = "
        << count_equivalent_synapses(net, config.stimulus.ext_synapses_per_neuron) << '\n';
    for (std::size_t r = 0; r < s.per_rank.size(); ++r)
    {
        const RunMetrics &pr = s.per_rank[r];
        const std::string p = "rank." + std::to_string(r) + ".";
        out << p << "neurons = " << pr.neurons << '\n'
            << p << "total_spikes = " << pr.total_spikes << '\n'
            << p << "internal_synaptic_events = " << pr.internal_synaptic_events << '\n'
            << p << "external_synaptic_events = " << pr.external_synaptic_events << '\n'
            << p << "wall_seconds = " << format_double(pr.wall_seconds) << '\n';
    }
    write_provenance(out, config);
}

void write_energy(const std::filesystem::path &path, const RunConfig &config,
        const RunMetrics &m)
{
    PlatformRecord record{config.power->label, config.power->measurement, m.wall_seconds,
            m.total_synaptic_events()};
    const EnergyReport report = energy_report(record);
    auto out = open_output(path);
    write_energy_document(out, std::span(&report, 1));
    write_provenance(out, config);
}

template <typename F>
int guarded(std::ostream &err, F &&body)
{
    try
    {
        return body();
    }
    catch (const ConfigError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const UndefinedMetric &e)
    {
        err << "error: " << e.what()
            << "\n  every platform needs a positive synaptic event count "
               "(platform.<label>.events, or a metrics document from a finished run)\n";
        return exit_validation;
    }
    catch (const InfeasibleSpec &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const InfeasiblePartition &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const std::invalid_argument &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const ExchangeFailure &e)
    {
        err << "error: rank " << e.rank() << " at step " << e.step() << ": " << e.what()
            << '\n';
        return exit_runtime;
    }
    catch (const NumericalDivergence &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    catch (const CalibrationFailure &e)
    {
        err << "error: " << e.what() << " (closest rate " << e.achieved_rate_hz() << " Hz)\n";
        return exit_runtime;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}

int run_single_rank(const CliOptions &options, const RunConfig &config, const Network &net,
        double build_seconds, std::ostream &out)
{
    const std::vector<Endpoint> endpoints = read_cluster_file(*options.cluster);
    const std::uint32_t rank = *options.rank;
    if (rank >= endpoints.size())
    {
        throw ConfigError({"--rank " + std::to_string(rank) + " is not listed in " +
                options.cluster->string()});
    }
    const auto ranks = static_cast<std::uint32_t>(endpoints.size());
    RunConfig resolved = config;
    resolved.ranks = ranks;
    validate(resolved);
    const RankPartition part = partition_rank(net, ranks, rank);
    const RunOptions run = resolved.run_options();
    TcpTransport transport(static_cast<std::uint16_t>(rank), endpoints, run.timeout);
    const RankOutcome outcome = run_rank(part, resolved.engine_config(), &transport,
            resolved.steps(), run.timeout);

    const std::string suffix = ".rank" + std::to_string(rank);
    RunSummary s;
    s.metrics = outcome.metrics;
    s.per_rank = {outcome.metrics};
    s.build_seconds = build_seconds;
    s.checksum = raster_checksum(outcome.raster);
    s.raster_file = write_raster(options.out, suffix, resolved, outcome.raster);
    {
        auto metrics = open_output(options.out / ("metrics" + suffix + ".txt"));
        write_metrics(metrics, resolved, net, s);
        metrics << "metrics.frames_sent = " << outcome.frames_sent << '\n'
                << "metrics.bytes_sent = " << outcome.bytes_sent << '\n';
    }
    out << "rank " << rank << "/" << ranks << ": " << outcome.metrics.total_spikes
        << " spikes, " << outcome.metrics.total_synaptic_events() << " synaptic events in "
        << outcome.metrics.wall_seconds << " s\n";
    return exit_ok;
}

struct PlatformInput
{
    PlatformRecord record;
    bool has_current = false;
    bool has_wall = false;
    bool has_events = false;
};

template <typename T>
T parse_field(const std::string &key, const std::string &text)
{
    T value{};
    std::istringstream in(text);
    in >> value;
    if (!in || !in.eof())
    {
        throw ConfigError({key + ": expected a number, got `" + text + "`"});
    }
    return value;
}

std::vector<PlatformRecord> platforms_from(const KeyValueDocument &doc)
{
    std::map<std::string, PlatformInput> by_label;
    std::vector<std::string> order;
    std::vector<std::string> problems;
    for (const auto &[key, value] : doc.entries())
    {
        if (!key.starts_with("platform."))
        {
            continue;
        }
        const std::string rest = key.substr(9);
        const auto dot = rest.find('.');
        if (dot == std::string::npos)
        {
            problems.push_back(key + ": expected platform.<label>.<field>");
            continue;
        }
        const std::string label = rest.substr(0, dot);
        const std::string field = rest.substr(dot + 1);
        if (!by_label.contains(label))
        {
            order.push_back(label);
            by_label[label].record.label = label;
        }
        PlatformInput &p = by_label[label];
        try
        {
            if (field == "voltage")
            {
                p.record.measurement.voltage = parse_field<double>(key, value);
            }
            else if (field == "current")
            {
                p.record.measurement.current = parse_field<double>(key, value);
                p.has_current = true;
            }
            else if (field == "current_error")
            {
                p.record.measurement.current_error = parse_field<double>(key, value);
            }
            else if (field == "baseline_w")
            {
                p.record.measurement.baseline_w = parse_field<double>(key, value);
            }
            else if (field == "wall_seconds")
            {
                p.record.wall_seconds = parse_field<double>(key, value);
                p.has_wall = true;
            }
            else if (field == "events")
            {
                if (!value.empty() && value.front() == '-')
                {
                    throw ConfigError({key + ": must be non-negative"});
                }
                p.record.synaptic_events = parse_field<std::uint64_t>(key, value);
                p.has_events = true;
            }
            else
            {
                problems.push_back(key + ": unknown field");
            }
        }
        catch (const ConfigError &e)
        {
            problems.insert(problems.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    }
    std::vector<PlatformRecord> records;
    for (const std::string &label : order)
    {
        const PlatformInput &p = by_label[label];
        if (!p.has_current)
        {
            problems.push_back("platform." + label + ".current: missing");
        }
        if (!p.has_wall)
        {
            problems.push_back("platform." + label + ".wall_seconds: missing");
        }
        if (!p.has_events)
        {
            problems.push_back("platform." + label +
                    ".events: missing; energy per synaptic event needs an event count");
        }
        records.push_back(p.record);
    }
    if (!problems.empty())
    {
        throw ConfigError(std::move(problems));
    }
    return records;
}

PlatformRecord platform_from_metrics(const std::filesystem::path &path)
{
    const KeyValueDocument doc = KeyValueDocument::load(path);
    KeyValueDocument config_doc;
    for (const auto &[key, value] : doc.entries())
    {
        if (key.starts_with("config."))
        {
            config_doc.set(key.substr(7), value);
        }
    }
    const RunConfig config = config_from_document(config_doc);
    if (!config.power)
    {
        throw ConfigError({path.string() + ": the run carried no power.* inputs"});
    }
    const auto wall = doc.get("metrics.wall_seconds");
    const auto events = doc.get("metrics.total_synaptic_events");
    if (!wall || !events)
    {
        throw ConfigError({path.string() + ": not a metrics document"});
    }
    PlatformRecord record;
    record.label = config.power->label;
    record.measurement = config.power->measurement;
    record.wall_seconds = parse_field<double>("metrics.wall_seconds", *wall);
    record.synaptic_events =
            parse_field<std::uint64_t>("metrics.total_synaptic_events", *events);
    return record;
}

} // namespace

RunConfig resolve_config(const CliOptions &options)
{
    KeyValueDocument doc;
    if (options.config)
    {
        doc = KeyValueDocument::load(*options.config);
    }
    for (const std::string &assignment : options.sets)
    {
        doc.set_assignment(assignment);
    }
    if (options.ranks)
    {
        doc.set("run.ranks", std::to_string(*options.ranks));
    }
    if (options.seed)
    {
        doc.set("grid.seed", std::to_string(*options.seed));
        doc.set("stimulus.seed", std::to_string(*options.seed));
    }
    return config_from_document(doc);
}

double probe_rate(const Network &net, const RunConfig &config, double scale)
{
    EngineConfig engine = config.engine_config();
    engine.exc_scale = scale;
    engine.record_raster = false;
    const RunResult result = run_local(net, engine,
            steps_for(config.calibrate.probe_seconds, config.dt_ms), config.run_options());
    return result.metrics.mean_rate_hz;
}

int cmd_run(const CliOptions &options, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&]() -> int {
        const RunConfig config = resolve_config(options);
        if (options.rank.has_value() != options.cluster.has_value())
        {
            throw ConfigError({"--rank and --cluster must be given together"});
        }
        std::filesystem::create_directories(options.out);

        const auto build_start = Clock::now();
        const Network net = build_network(config.grid, config.dt_ms, build_threads(config));
        const double build_seconds = seconds_since(build_start);
        if (options.cluster)
        {
            return run_single_rank(options, config, net, build_seconds, out);
        }

        const RunResult result =
                run_local(net, config.engine_config(), config.steps(), config.run_options());
        RunSummary s;
        s.metrics = result.metrics;
        s.per_rank = result.per_rank;
        s.build_seconds = build_seconds;
        s.checksum = raster_checksum(result.raster);
        s.raster_file = write_raster(options.out, "", config, result.raster);
        {
            auto metrics = open_output(options.out / "metrics.txt");
            write_metrics(metrics, config, net, s);
        }
        if (config.power)
        {
            write_energy(options.out / "energy.txt", config, result.metrics);
        }
        const RunMetrics &m = result.metrics;
        out << m.neurons << " neurons, " << net.synapse_count() << " synapses, "
            << config.ranks << " rank(s)\n"
            << m.total_spikes << " spikes, mean rate " << m.mean_rate_hz << " Hz\n"
            << m.total_synaptic_events() << " synaptic events (" << m.internal_synaptic_events
            << " internal, " << m.external_synaptic_events << " external)\n"
            << "wall " << m.wall_seconds << " s, " << m.throughput() << " events/s\n"
            << "raster checksum " << s.checksum << '\n';
        return exit_ok;
    });
}

int cmd_report(const CliOptions &options, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&]() -> int {
        KeyValueDocument doc;
        if (options.config)
        {
            doc = KeyValueDocument::load(*options.config);
        }
        for (const std::string &assignment : options.sets)
        {
            doc.set_assignment(assignment);
        }
        std::vector<PlatformRecord> records = platforms_from(doc);
        if (options.metrics)
        {
            records.push_back(platform_from_metrics(*options.metrics));
        }
        if (records.empty())
        {
            throw ConfigError({"no platform records: give platform.<label>.* keys or --metrics"});
        }
        std::vector<EnergyReport> reports;
        for (const PlatformRecord &r : records)
        {
            reports.push_back(energy_report(r));
        }
        std::optional<ComparisonReport> comparison;
        if (records.size() == 2)
        {
            comparison = comparison_report(records[0], records[1]);
        }
        const ComparisonReport *cmp = comparison ? &*comparison : nullptr;
        write_energy_table(out, reports, cmp);
        std::filesystem::create_directories(options.out);
        auto doc_out = open_output(options.out / "energy.txt");
        write_energy_document(doc_out, reports, cmp);
        return exit_ok;
    });
}

int cmd_calibrate(const CliOptions &options, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&]() -> int {
        RunConfig config = resolve_config(options);
        std::filesystem::create_directories(options.out);
        const Network net = build_network(config.grid, config.dt_ms, build_threads(config));

        CalibrationOptions opts;
        opts.initial_scale = config.exc_scale;
        opts.lower = config.calibrate.scale_lo;
        opts.upper = config.calibrate.scale_hi;
        opts.tolerance_hz = config.calibrate.tolerance_hz;
        opts.max_iterations = config.calibrate.max_iterations;
        const CalibrationResult result = calibrate_rate(
                [&](double scale) {
                    const double rate = probe_rate(net, config, scale);
                    out << "  scale " << scale << " -> " << rate << " Hz\n";
                    return rate;
                },
                config.calibrate.target_hz, config.calibrate.band_hz, opts);

        config.exc_scale = result.scale;
        const std::filesystem::path path = options.out / "calibrated.cfg";
        config_to_document(config).save(path);
        out << "calibrated sim.exc_scale = " << format_double(result.scale) << " ("
            << result.rate_hz << " Hz after " << result.probes << " probes), wrote "
            << path.string() << '\n';
        return exit_ok;
    });
}

} // namespace dpsnn
