#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dpsnn {

enum class ModelFamily
{
    adaptive_lif,
    izhikevich,
};

/// Per-neuron dynamics class. Under the Izhikevich family excitatory
/// neurons are RS and inhibitory ones FS; under adaptive LIF both
/// populations share one parameter set and differ only in synapse sign.
enum class NeuronKind : std::uint8_t
{
    regular_spiking,
    fast_spiking,
    adaptive_lif_exc,
    adaptive_lif_inh,
};

bool is_excitatory(NeuronKind kind);

/// Geometry and wiring statistics of the columnar 2D grid.
struct GridSpec
{
    std::uint32_t grid_x = 10;
    std::uint32_t grid_y = 10;
    std::uint32_t neurons_per_column = 100;
    double exc_fraction = 0.8;
    double target_fanout = 1195.0;
    double decay_lambda = 2.0;
    double delay_min_ms = 1.0;
    double delay_max_ms = 20.0;
    double w_exc = 0.05;
    double w_inh = 0.2;
    std::uint64_t seed = 1;
    ModelFamily model = ModelFamily::adaptive_lif;

    std::uint32_t column_count() const { return grid_x * grid_y; }
    std::uint32_t total_neurons() const { return column_count() * neurons_per_column; }
    std::uint32_t excitatory_per_column() const;

    bool operator==(const GridSpec &) const = default;
};

/// Throws InfeasibleSpec / std::invalid_argument on a broken invariant.
void validate(const GridSpec &spec, double dt_ms);

struct Synapse
{
    std::uint32_t target = 0;
    float weight = 0.0f;
    std::uint16_t delay_steps = 1;

    bool operator==(const Synapse &) const = default;
};

/// Immutable synapse graph in CSR layout, indexed by global neuron id.
/// Neuron id = column * neurons_per_column + index within column, columns
/// numbered row-major (column = y * grid_x + x).
class Network
{
public:
    Network() = default;
    Network(GridSpec spec, double dt_ms, std::vector<NeuronKind> kinds,
            std::vector<std::uint64_t> offsets, std::vector<Synapse> synapses);

    const GridSpec &spec() const { return spec_; }
    double dt_ms() const { return dt_ms_; }
    std::uint32_t neuron_count() const { return static_cast<std::uint32_t>(kinds_.size()); }
    std::uint64_t synapse_count() const { return synapses_.size(); }

    NeuronKind kind(std::uint32_t neuron) const { return kinds_[neuron]; }
    std::span<const NeuronKind> kinds() const { return kinds_; }
    std::span<const Synapse> outgoing(std::uint32_t neuron) const;
    std::uint32_t fanout(std::uint32_t neuron) const;
    std::uint16_t max_delay_steps() const;

    bool operator==(const Network &) const = default;

private:
    GridSpec spec_;
    double dt_ms_ = 1.0;
    std::vector<NeuronKind> kinds_;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<Synapse> synapses_;
};

/// Euclidean distance between column centres with unit spacing.
double column_distance(const GridSpec &spec, std::uint32_t a, std::uint32_t b);

/// Peak connection probability p0 making the source-averaged expected fanout
/// equal target_fanout. Throws InfeasibleSpec when p0 would exceed 1.
double normalize_fanout(const GridSpec &spec);

/// p0 * exp(-d / decay_lambda), clamped to [0, 1].
double connection_probability(double distance, const GridSpec &spec);
double connection_probability(double distance, const GridSpec &spec, double p0);

/// Wires the network. Synapses of each source are drawn from a counter
/// stream keyed only by (seed, source id): for every target column a
/// binomial count of draws (geometric skipping over the candidates) picks
/// targets uniformly with replacement, self excluded, each with a uniform
/// integer delay. Output is identical for any thread count.
Network build_network(const GridSpec &spec, double dt_ms, unsigned threads = 1);

/// Internal synapses plus total_neurons * ext_per_neuron.
std::uint64_t count_equivalent_synapses(const Network &net, std::uint64_t ext_per_neuron);

struct NetworkStats
{
    std::uint32_t neurons = 0;
    std::uint32_t excitatory = 0;
    std::uint64_t synapses = 0;
    double mean_fanout = 0.0;
    std::uint32_t min_fanout = 0;
    std::uint32_t max_fanout = 0;
    double p0 = 0.0;
    /// fanout_histogram[k] counts neurons with fanout in [k*bin, (k+1)*bin)
    std::uint32_t fanout_bin = 1;
    std::vector<std::uint64_t> fanout_histogram;
    /// delay_histogram[d] counts synapses with delay d steps
    std::vector<std::uint64_t> delay_histogram;
};

NetworkStats network_stats(const Network &net, std::uint32_t fanout_bin = 50);
void write_stats(std::ostream &out, const NetworkStats &stats);

/// Versioned little-endian snapshot. Layout: "DPSNNET\0", u32 version,
/// spec fields, f64 dt, u32 neuron count, u64 synapse count, u8 kinds[n],
/// u64 offsets[n + 1], then {u32 target, f32 weight, u16 delay} records.
void save_snapshot(const Network &net, const std::filesystem::path &path);
Network load_snapshot(const std::filesystem::path &path);

} // namespace dpsnn
