#include "dpsnn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "dpsnn/errors.hpp"

namespace dpsnn {

CalibrationResult calibrate_rate(const RateProbe &probe, double target_hz, double band_hz,
        const CalibrationOptions &options)
{
    const double tolerance = std::min(options.tolerance_hz, band_hz);
    int probes = 0;
    std::optional<CalibrationResult> closest;
    std::optional<CalibrationResult> best_in_band;

    auto evaluate = [&](double scale) {
        const double rate = probe(scale);
        ++probes;
        const CalibrationResult r{scale, rate, probes};
        const double miss = std::abs(rate - target_hz);
        if (!closest || miss < std::abs(closest->rate_hz - target_hz))
        {
            closest = r;
        }
        if (miss <= band_hz &&
                (!best_in_band || miss < std::abs(best_in_band->rate_hz - target_hz)))
        {
            best_in_band = r;
        }
        return rate;
    };
    auto finish = [&](double scale, double rate) {
        return CalibrationResult{scale, rate, probes};
    };
    auto fail = [&]() -> CalibrationResult {
        if (best_in_band)
        {
            best_in_band->probes = probes;
            return *best_in_band;
        }
        std::ostringstream msg;
        msg << "calibration to " << target_hz << " Hz failed after " << probes
            << " probes; closest rate " << closest->rate_hz << " Hz at scale "
            << closest->scale;
        throw CalibrationFailure(msg.str(), closest->rate_hz);
    };

    const double initial_rate = evaluate(options.initial_scale);
    if (std::abs(initial_rate - target_hz) <= band_hz)
    {
        return finish(options.initial_scale, initial_rate);
    }

    double lo = options.lower;
    double hi = std::max(options.upper, lo);
    if (options.initial_scale > lo && options.initial_scale < hi)
    {
        (initial_rate < target_hz ? lo : hi) = options.initial_scale;
    }

    const double lo_rate = lo == options.initial_scale ? initial_rate : evaluate(lo);
    if (std::abs(lo_rate - target_hz) <= tolerance)
    {
        return finish(lo, lo_rate);
    }
    if (lo_rate > target_hz)
    {
        return fail();
    }

    double hi_rate = hi == options.initial_scale ? initial_rate : evaluate(hi);
    while (hi_rate < target_hz - tolerance && probes < options.max_iterations)
    {
        lo = hi;
        hi = hi > 0.0 ? 2.0 * hi : 1.0;
        hi_rate = evaluate(hi);
    }
    if (std::abs(hi_rate - target_hz) <= tolerance)
    {
        return finish(hi, hi_rate);
    }
    if (hi_rate < target_hz)
    {
        return fail();
    }

    while (probes < options.max_iterations)
    {
        const double mid = 0.5 * (lo + hi);
        const double rate = evaluate(mid);
        if (std::abs(rate - target_hz) <= tolerance)
        {
            return finish(mid, rate);
        }
        (rate < target_hz ? lo : hi) = mid;
    }
    return fail();
}

} // namespace dpsnn
