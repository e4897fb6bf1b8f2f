#pragma once

#include <functional>

namespace dpsnn {

struct CalibrationOptions
{
    /// Scale tried first; returned unchanged if already inside the band.
    double initial_scale = 1.0;
    double lower = 0.0;
    double upper = 4.0;
    /// Bisection keeps going until the probe rate is this close to the
    /// target (tighter than the acceptance band so that a longer validation
    /// run, with its own fluctuations, still lands inside the band).
    double tolerance_hz = 0.4;
    int max_iterations = 32;
};

struct CalibrationResult
{
    double scale = 0.0;
    double rate_hz = 0.0;
    int probes = 0;
};

/// Maps an excitatory weight scale to the mean firing rate of a short run.
using RateProbe = std::function<double(double scale)>;

/// Bisection on the excitatory weight scale, assuming the rate grows
/// monotonically with it. When the target lies above the rate at `upper`
/// the bracket is doubled. Every probe counts against max_iterations; on
/// exhaustion the best in-band probe is returned, otherwise
/// CalibrationFailure carries the closest rate achieved.
CalibrationResult calibrate_rate(const RateProbe &probe, double target_hz, double band_hz,
        const CalibrationOptions &options = {});

} // namespace dpsnn
