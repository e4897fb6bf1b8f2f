#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpsnn/config.hpp"

namespace dpsnn {

/// Process exit codes shared by every subcommand.
enum ExitCode : int
{
    exit_ok = 0,
    exit_runtime = 1,
    exit_validation = 2,
};

struct CliOptions
{
    std::optional<std::filesystem::path> config;
    std::vector<std::string> sets;
    std::optional<std::uint32_t> ranks;
    std::optional<std::uint32_t> rank;
    std::optional<std::filesystem::path> cluster;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    /// report only: metrics document of a finished run
    std::optional<std::filesystem::path> metrics;
};

/// Loads --config, applies --set, --ranks and --seed (which sets both the
/// network and the stimulus seed) and validates.
RunConfig resolve_config(const CliOptions &options);

/// Each command reports progress on `out`, diagnostics on `err`, and
/// returns an ExitCode instead of throwing.
int cmd_run(const CliOptions &options, std::ostream &out, std::ostream &err);
int cmd_report(const CliOptions &options, std::ostream &out, std::ostream &err);
int cmd_calibrate(const CliOptions &options, std::ostream &out, std::ostream &err);

/// The rate probe used by calibration: mean rate of a fresh run of
/// calibrate.probe_seconds at the given excitatory scale.
double probe_rate(const Network &net, const RunConfig &config, double scale);

} // namespace dpsnn
