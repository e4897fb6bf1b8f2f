#include "dpsnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "byte_io.hpp"
#include "dpsnn/errors.hpp"
#include "dpsnn/random.hpp"

namespace dpsnn {

bool is_excitatory(NeuronKind kind)
{
    return kind == NeuronKind::regular_spiking ||
            kind == NeuronKind::adaptive_lif_exc;
}

std::uint32_t GridSpec::excitatory_per_column() const
{
    return static_cast<std::uint32_t>(
            std::lround(exc_fraction * neurons_per_column));
}

void validate(const GridSpec &spec, double dt_ms)
{
    if (spec.grid_x == 0 || spec.grid_y == 0 || spec.neurons_per_column == 0)
    {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    if (!(spec.exc_fraction > 0.0 && spec.exc_fraction < 1.0))
    {
        throw std::invalid_argument("exc_fraction must lie in (0, 1)");
    }
    if (!(dt_ms > 0.0))
    {
        throw std::invalid_argument("dt must be positive");
    }
    if (!(spec.decay_lambda > 0.0))
    {
        throw std::invalid_argument("decay_lambda must be positive");
    }
    if (!(spec.delay_min_ms >= dt_ms * (1.0 - 1e-9)))
    {
        throw std::invalid_argument("delay_min must be at least one time step");
    }
    if (!(spec.delay_max_ms >= spec.delay_min_ms))
    {
        throw std::invalid_argument("delay_max must be >= delay_min");
    }
    if (spec.delay_max_ms / dt_ms > std::numeric_limits<std::uint16_t>::max())
    {
        throw std::invalid_argument("delay_max exceeds 65535 time steps");
    }
    if (!(spec.w_exc >= 0.0))
    {
        throw std::invalid_argument("w_exc must be non-negative");
    }
    if (!(spec.target_fanout >= 0.0))
    {
        throw std::invalid_argument("target_fanout must be non-negative");
    }
    if (spec.target_fanout >= static_cast<double>(spec.total_neurons()))
    {
        throw InfeasibleSpec("target_fanout " +
                std::to_string(spec.target_fanout) +
                " is not below the neuron count " +
                std::to_string(spec.total_neurons()));
    }
}

Network::Network(GridSpec spec, double dt_ms, std::vector<NeuronKind> kinds,
        std::vector<std::uint64_t> offsets, std::vector<Synapse> synapses)
        : spec_(spec)
        , dt_ms_(dt_ms)
        , kinds_(std::move(kinds))
        , offsets_(std::move(offsets))
        , synapses_(std::move(synapses))
{
    if (offsets_.size() != kinds_.size() + 1 || offsets_.back() != synapses_.size())
    {
        throw std::invalid_argument("inconsistent network layout");
    }
}

std::span<const Synapse> Network::outgoing(std::uint32_t neuron) const
{
    return std::span<const Synapse>(synapses_).subspan(offsets_[neuron],
            offsets_[neuron + 1] - offsets_[neuron]);
}

std::uint32_t Network::fanout(std::uint32_t neuron) const
{
    return static_cast<std::uint32_t>(offsets_[neuron + 1] - offsets_[neuron]);
}

std::uint16_t Network::max_delay_steps() const
{
    std::uint16_t max_delay = 1;
    for (const Synapse &syn : synapses_)
    {
        max_delay = std::max(max_delay, syn.delay_steps);
    }
    return max_delay;
}

double column_distance(const GridSpec &spec, std::uint32_t a, std::uint32_t b)
{
    const double dx = static_cast<double>(a % spec.grid_x) -
            static_cast<double>(b % spec.grid_x);
    const double dy = static_cast<double>(a / spec.grid_x) -
            static_cast<double>(b / spec.grid_x);
    return std::sqrt(dx * dx + dy * dy);
}

double normalize_fanout(const GridSpec &spec)
{
    const std::uint32_t columns = spec.column_count();
    const double npc = spec.neurons_per_column;
    double weighted_candidates = 0.0;
    for (std::uint32_t src = 0; src < columns; ++src)
    {
        for (std::uint32_t dst = 0; dst < columns; ++dst)
        {
            const double candidates = src == dst ? npc - 1.0 : npc;
            weighted_candidates += candidates *
                    std::exp(-column_distance(spec, src, dst) / spec.decay_lambda);
        }
    }
    weighted_candidates /= columns;
    if (spec.target_fanout == 0.0)
    {
        return 0.0;
    }
    if (weighted_candidates <= 0.0)
    {
        throw InfeasibleSpec("grid has no candidate targets");
    }
    const double p0 = spec.target_fanout / weighted_candidates;
    if (p0 > 1.0)
    {
        throw InfeasibleSpec("grid too small for target fanout: required p0 = " +
                std::to_string(p0));
    }
    return p0;
}

double connection_probability(double distance, const GridSpec &spec, double p0)
{
    return std::clamp(p0 * std::exp(-distance / spec.decay_lambda), 0.0, 1.0);
}

double connection_probability(double distance, const GridSpec &spec)
{
    return connection_probability(distance, spec, normalize_fanout(spec));
}

namespace {

/// Number of successes in `trials` Bernoulli(p) trials, by skipping over
/// geometrically distributed failure runs.
std::uint32_t binomial_by_skipping(CounterStream &rng, std::uint32_t trials, double p)
{
    if (p <= 0.0 || trials == 0)
    {
        return 0;
    }
    if (p >= 1.0)
    {
        return trials;
    }
    const double log_q = std::log1p(-p);
    std::uint32_t successes = 0;
    double position = -1.0;
    while (true)
    {
        position += std::floor(std::log(rng.uniform_open_closed()) / log_q) + 1.0;
        if (position >= trials)
        {
            return successes;
        }
        ++successes;
    }
}

struct SourceChunk
{
    std::vector<std::uint32_t> fanout;
    std::vector<Synapse> synapses;
};

} // namespace

Network build_network(const GridSpec &spec, double dt_ms, unsigned threads)
{
    validate(spec, dt_ms);
    const double p0 = normalize_fanout(spec);
    const std::uint32_t columns = spec.column_count();
    const std::uint32_t npc = spec.neurons_per_column;
    const std::uint32_t n_exc = spec.excitatory_per_column();
    const std::uint32_t total = spec.total_neurons();

    std::vector<double> probability(std::size_t{columns} * columns);
    for (std::uint32_t src = 0; src < columns; ++src)
    {
        for (std::uint32_t dst = 0; dst < columns; ++dst)
        {
            probability[std::size_t{src} * columns + dst] = connection_probability(
                    column_distance(spec, src, dst), spec, p0);
        }
    }

    std::vector<NeuronKind> kinds(total);
    for (std::uint32_t n = 0; n < total; ++n)
    {
        const bool exc = (n % npc) < n_exc;
        if (spec.model == ModelFamily::izhikevich)
        {
            kinds[n] = exc ? NeuronKind::regular_spiking : NeuronKind::fast_spiking;
        }
        else
        {
            kinds[n] = exc ? NeuronKind::adaptive_lif_exc : NeuronKind::adaptive_lif_inh;
        }
    }

    const auto delay_lo = static_cast<std::uint32_t>(
            std::max(1L, std::lround(spec.delay_min_ms / dt_ms)));
    const auto delay_hi = static_cast<std::uint32_t>(
            std::max<long>(delay_lo, std::lround(spec.delay_max_ms / dt_ms)));
    const float w_exc = static_cast<float>(spec.w_exc);
    const float w_inh = -static_cast<float>(std::abs(spec.w_inh));

    auto wire_range = [&](std::uint32_t first, std::uint32_t last, SourceChunk &chunk) {
        chunk.fanout.reserve(last - first);
        for (std::uint32_t src = first; src < last; ++src)
        {
            CounterStream rng(spec.seed, src, 0, StreamTag::connectivity);
            const std::uint32_t src_col = src / npc;
            const std::uint32_t src_local = src % npc;
            const float weight = is_excitatory(kinds[src]) ? w_exc : w_inh;
            const std::size_t before = chunk.synapses.size();
            for (std::uint32_t dst_col = 0; dst_col < columns; ++dst_col)
            {
                const bool own = dst_col == src_col;
                const std::uint32_t candidates = own ? npc - 1 : npc;
                const std::uint32_t count = binomial_by_skipping(rng, candidates,
                        probability[std::size_t{src_col} * columns + dst_col]);
                for (std::uint32_t k = 0; k < count; ++k)
                {
                    std::uint32_t local = rng.uniform_below(candidates);
                    if (own && local >= src_local)
                    {
                        ++local;
                    }
                    const std::uint32_t delay =
                            delay_lo + rng.uniform_below(delay_hi - delay_lo + 1);
                    chunk.synapses.push_back({dst_col * npc + local, weight,
                            static_cast<std::uint16_t>(delay)});
                }
            }
            chunk.fanout.push_back(
                    static_cast<std::uint32_t>(chunk.synapses.size() - before));
        }
    };

    threads = std::clamp(threads, 1u, std::max(1u, total));
    std::vector<SourceChunk> chunks(threads);
    if (threads == 1)
    {
        wire_range(0, total, chunks[0]);
    }
    else
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t)
        {
            const auto first = static_cast<std::uint32_t>(std::uint64_t{total} * t / threads);
            const auto last = static_cast<std::uint32_t>(std::uint64_t{total} * (t + 1) / threads);
            workers.emplace_back([&, first, last, t] { wire_range(first, last, chunks[t]); });
        }
    }

    std::vector<std::uint64_t> offsets;
    offsets.reserve(total + 1);
    offsets.push_back(0);
    std::size_t synapse_total = 0;
    for (const SourceChunk &chunk : chunks)
    {
        synapse_total += chunk.synapses.size();
    }
    std::vector<Synapse> synapses;
    synapses.reserve(synapse_total);
    for (SourceChunk &chunk : chunks)
    {
        for (std::uint32_t f : chunk.fanout)
        {
            offsets.push_back(offsets.back() + f);
        }
        synapses.insert(synapses.end(), chunk.synapses.begin(), chunk.synapses.end());
        chunk = SourceChunk{};
    }
    return Network(spec, dt_ms, std::move(kinds), std::move(offsets), std::move(synapses));
}

std::uint64_t count_equivalent_synapses(const Network &net, std::uint64_t ext_per_neuron)
{
    return net.synapse_count() + std::uint64_t{net.neuron_count()} * ext_per_neuron;
}

NetworkStats network_stats(const Network &net, std::uint32_t fanout_bin)
{
    NetworkStats stats;
    stats.neurons = net.neuron_count();
    stats.synapses = net.synapse_count();
    stats.fanout_bin = std::max(1u, fanout_bin);
    if (stats.neurons == 0)
    {
        return stats;
    }
    stats.p0 = normalize_fanout(net.spec());
    stats.min_fanout = std::numeric_limits<std::uint32_t>::max();
    for (std::uint32_t n = 0; n < stats.neurons; ++n)
    {
        if (is_excitatory(net.kind(n)))
        {
            ++stats.excitatory;
        }
        const std::uint32_t f = net.fanout(n);
        stats.min_fanout = std::min(stats.min_fanout, f);
        stats.max_fanout = std::max(stats.max_fanout, f);
        const std::size_t bin = f / stats.fanout_bin;
        if (stats.fanout_histogram.size() <= bin)
        {
            stats.fanout_histogram.resize(bin + 1);
        }
        ++stats.fanout_histogram[bin];
        for (const Synapse &syn : net.outgoing(n))
        {
            if (stats.delay_histogram.size() <= syn.delay_steps)
            {
                stats.delay_histogram.resize(syn.delay_steps + 1u);
            }
            ++stats.delay_histogram[syn.delay_steps];
        }
    }
    stats.mean_fanout = static_cast<double>(stats.synapses) / stats.neurons;
    return stats;
}

void write_stats(std::ostream &out, const NetworkStats &stats)
{
    out << "network.neurons = " << stats.neurons << '\n'
        << "network.excitatory = " << stats.excitatory << '\n'
        << "network.synapses = " << stats.synapses << '\n'
        << "network.mean_fanout = " << stats.mean_fanout << '\n'
        << "network.min_fanout = " << stats.min_fanout << '\n'
        << "network.max_fanout = " << stats.max_fanout << '\n'
        << "network.p0 = " << stats.p0 << '\n'
        << "network.fanout_bin = " << stats.fanout_bin << '\n';
    for (std::size_t k = 0; k < stats.fanout_histogram.size(); ++k)
    {
        if (stats.fanout_histogram[k] != 0)
        {
            out << "fanout_histogram." << k * stats.fanout_bin << " = "
                << stats.fanout_histogram[k] << '\n';
        }
    }
    for (std::size_t d = 0; d < stats.delay_histogram.size(); ++d)
    {
        if (stats.delay_histogram[d] != 0)
        {
            out << "delay_histogram." << d << " = " << stats.delay_histogram[d] << '\n';
        }
    }
}

namespace {

constexpr char snapshot_magic[8] = {'D', 'P', 'S', 'N', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t snapshot_version = 1;

} // namespace

void save_snapshot(const Network &net, const std::filesystem::path &path)
{
    using detail::put_le;
    std::vector<std::uint8_t> buf(std::begin(snapshot_magic), std::end(snapshot_magic));
    const GridSpec &s = net.spec();
    put_le(buf, snapshot_version);
    put_le(buf, s.grid_x);
    put_le(buf, s.grid_y);
    put_le(buf, s.neurons_per_column);
    put_le(buf, s.exc_fraction);
    put_le(buf, s.target_fanout);
    put_le(buf, s.decay_lambda);
    put_le(buf, s.delay_min_ms);
    put_le(buf, s.delay_max_ms);
    put_le(buf, s.w_exc);
    put_le(buf, s.w_inh);
    put_le(buf, s.seed);
    put_le(buf, static_cast<std::uint8_t>(s.model));
    put_le(buf, net.dt_ms());
    put_le(buf, net.neuron_count());
    put_le(buf, net.synapse_count());
    for (NeuronKind k : net.kinds())
    {
        put_le(buf, static_cast<std::uint8_t>(k));
    }
    std::uint64_t offset = 0;
    put_le(buf, offset);
    for (std::uint32_t n = 0; n < net.neuron_count(); ++n)
    {
        offset += net.fanout(n);
        put_le(buf, offset);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    buf.clear();
    for (std::uint32_t n = 0; n < net.neuron_count(); ++n)
    {
        for (const Synapse &syn : net.outgoing(n))
        {
            put_le(buf, syn.target);
            put_le(buf, syn.weight);
            put_le(buf, syn.delay_steps);
        }
        if (buf.size() > (1u << 20))
        {
            out.write(reinterpret_cast<const char *>(buf.data()),
                    static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (!out)
    {
        throw std::runtime_error("failed writing " + path.string());
    }
}

Network load_snapshot(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes(
            (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof(snapshot_magic) ||
            !std::equal(std::begin(snapshot_magic), std::end(snapshot_magic), bytes.begin()))
    {
        throw std::runtime_error(path.string() + " is not a network snapshot");
    }
    try
    {
        detail::ByteReader r{std::span(bytes).subspan(sizeof(snapshot_magic))};
        if (r.read<std::uint32_t>() != snapshot_version)
        {
            throw std::runtime_error("unsupported snapshot version");
        }
        GridSpec s;
        s.grid_x = r.read<std::uint32_t>();
        s.grid_y = r.read<std::uint32_t>();
        s.neurons_per_column = r.read<std::uint32_t>();
        s.exc_fraction = r.read<double>();
        s.target_fanout = r.read<double>();
        s.decay_lambda = r.read<double>();
        s.delay_min_ms = r.read<double>();
        s.delay_max_ms = r.read<double>();
        s.w_exc = r.read<double>();
        s.w_inh = r.read<double>();
        s.seed = r.read<std::uint64_t>();
        s.model = static_cast<ModelFamily>(r.read<std::uint8_t>());
        const double dt = r.read<double>();
        const auto neurons = r.read<std::uint32_t>();
        const auto synapse_total = r.read<std::uint64_t>();
        std::vector<NeuronKind> kinds(neurons);
        for (auto &k : kinds)
        {
            k = static_cast<NeuronKind>(r.read<std::uint8_t>());
        }
        std::vector<std::uint64_t> offsets(std::size_t{neurons} + 1);
        for (auto &o : offsets)
        {
            o = r.read<std::uint64_t>();
        }
        if (r.remaining() != synapse_total * 10)
        {
            throw std::runtime_error("synapse section has the wrong length");
        }
        std::vector<Synapse> synapses(synapse_total);
        for (auto &syn : synapses)
        {
            syn.target = r.read<std::uint32_t>();
            syn.weight = r.read<float>();
            syn.delay_steps = r.read<std::uint16_t>();
        }
        return Network(s, dt, std::move(kinds), std::move(offsets), std::move(synapses));
    }
    catch (const std::out_of_range &)
    {
        throw std::runtime_error(path.string() + " is truncated");
    }
}

} // namespace dpsnn
