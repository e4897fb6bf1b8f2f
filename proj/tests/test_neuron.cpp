#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dpsnn/errors.hpp"
#include "dpsnn/neuron.hpp"
#include "oracles.hpp"

using namespace dpsnn;

namespace {

oracle::LifParams oracle_params(const AdaptiveLifParams &p)
{
    return {p.tau_m, p.v_rest, p.v_thresh, p.v_reset, p.t_refr, p.g_c, p.tau_c, p.delta_c,
            p.e_k};
}

} // namespace

TEST_SUITE("neuron")
{
    TEST_CASE("Izhikevich presets")
    {
        const IzhikevichParams rs = izhikevich_preset(IzhikevichKind::regular_spiking);
        const IzhikevichParams fs = izhikevich_preset(IzhikevichKind::fast_spiking);
        CHECK(rs == IzhikevichParams{0.02, 0.2, -65.0, 8.0, 30.0});
        CHECK(fs == IzhikevichParams{0.1, 0.2, -65.0, 2.0, 30.0});
        CHECK(rs.b == fs.b);
        CHECK(rs.c == fs.c);
        CHECK(rs.v_peak == fs.v_peak);
        CHECK(rs.a != fs.a);
        CHECK(rs.d != fs.d);
    }

    TEST_CASE("parameter validation")
    {
        CHECK_THROWS_AS(validate(IzhikevichParams{0.0, 0.2, -65, 8, 30}), std::invalid_argument);
        CHECK_THROWS_AS(validate(IzhikevichParams{0.02, 0.2, 30, 8, 30}), std::invalid_argument);
        AdaptiveLifParams lif;
        CHECK_NOTHROW(validate(lif));
        lif.v_thresh = lif.v_reset;
        CHECK_THROWS_AS(validate(lif), std::invalid_argument);
        lif = {};
        lif.tau_c = 0;
        CHECK_THROWS_AS(validate(lif), std::invalid_argument);
        lif = {};
        lif.t_refr = -1;
        CHECK_THROWS_AS(validate(lif), std::invalid_argument);
    }

    TEST_CASE("Izhikevich step matches the scalar oracle bit for bit")
    {
        std::mt19937_64 gen(2024);
        std::uniform_real_distribution<double> v_dist(-85.0, 35.0);
        std::uniform_real_distribution<double> u_dist(-20.0, 20.0);
        std::uniform_real_distribution<double> i_dist(-10.0, 30.0);
        const double dts[] = {1.0, 0.5, 0.1};
        for (int k = 0; k < 10000; ++k)
        {
            const IzhikevichParams p = izhikevich_preset(
                    k % 2 ? IzhikevichKind::fast_spiking : IzhikevichKind::regular_spiking);
            const double dt = dts[k % 3];
            const double input = i_dist(gen);
            NeuronState s;
            s.v = v_dist(gen);
            s.w = u_dist(gen);
            oracle::Izh o{s.v, s.w};
            const bool o_spiked = oracle::izhikevich(o, p.a, p.b, p.c, p.d, p.v_peak, input, dt);
            const StepResult r = step_izhikevich(s, p, input, dt);
            REQUIRE(r.spiked == o_spiked);
            REQUIRE(r.state.v == o.v);
            REQUIRE(r.state.w == o.u);
        }
    }

    TEST_CASE("adaptive LIF step matches the scalar oracle bit for bit")
    {
        std::mt19937_64 gen(77);
        std::uniform_real_distribution<double> v_dist(-95.0, -45.0);
        std::uniform_real_distribution<double> c_dist(0.0, 5.0);
        std::uniform_real_distribution<double> i_dist(-5.0, 10.0);
        const double refr[] = {0.0, 0.0, 0.3, 1.0, 2.0};
        const double dts[] = {1.0, 0.1};
        const AdaptiveLifParams p;
        const oracle::LifParams op = oracle_params(p);
        for (int k = 0; k < 10000; ++k)
        {
            const double dt = dts[k % 2];
            const double input = i_dist(gen);
            NeuronState s;
            s.v = v_dist(gen);
            s.w = c_dist(gen);
            s.refr_remaining = refr[k % 5];
            oracle::Lif o{s.v, s.w, s.refr_remaining};
            const bool o_spiked = oracle::adaptive_lif(o, op, input, dt);
            const StepResult r = step_adaptive_lif(s, p, input, dt);
            REQUIRE(r.spiked == o_spiked);
            REQUIRE(r.state.v == o.v);
            REQUIRE(r.state.w == o.c);
            REQUIRE(r.state.refr_remaining == o.refr);
        }
    }

    TEST_CASE("RS tonic spiking under DC input matches the oracle exactly")
    {
        const IzhikevichParams p = izhikevich_preset(IzhikevichKind::regular_spiking);
        NeuronState s;
        s.v = -65.0;
        s.w = -13.0;
        oracle::Izh o{-65.0, -13.0};
        int spikes = 0;
        int oracle_spikes = 0;
        for (int t = 0; t < 1000; ++t)
        {
            const StepResult r = step_izhikevich(s, p, 10.0, 1.0);
            s = r.state;
            spikes += r.spiked;
            oracle_spikes += oracle::izhikevich(o, p.a, p.b, p.c, p.d, p.v_peak, 10.0, 1.0);
        }
        CHECK(spikes == oracle_spikes);
        CHECK(spikes > 5);
    }

    TEST_CASE("RS at rest with zero input never spikes")
    {
        const IzhikevichParams p = izhikevich_preset(IzhikevichKind::regular_spiking);
        NeuronState s;
        s.v = -65.0;
        s.w = p.b * s.v;
        for (int t = 0; t < 100000; ++t)
        {
            const StepResult r = step_izhikevich(s, p, 0.0, 1.0);
            REQUIRE_FALSE(r.spiked);
            s = r.state;
        }
        // (-65, -13) is not the fixed point of this parameter set: the
        // membrane relaxes to the stable root of 0.04v^2 + 4.8v + 140 = 0.
        const double rest = (-4.8 - std::sqrt(4.8 * 4.8 - 4 * 0.04 * 140)) / (2 * 0.04);
        CHECK(s.v == doctest::Approx(rest).epsilon(1e-9));
        CHECK(std::abs(s.v - -65.0) > 1.0);
    }

    TEST_CASE("cut-off on entry resets without integrating")
    {
        const IzhikevichParams p = izhikevich_preset(IzhikevichKind::regular_spiking);
        NeuronState s;
        s.v = 31.0;
        s.w = -5.0;
        const StepResult r = step_izhikevich(s, p, 100.0, 1.0);
        CHECK(r.spiked);
        CHECK(r.state.v == p.c);
        CHECK(r.state.w == -5.0 + p.d);
    }

    TEST_CASE("adaptive LIF rests at v_rest with no input")
    {
        const AdaptiveLifParams p;
        NeuronState s;
        s.v = p.v_rest;
        s.w = 0.0;
        for (int t = 0; t < 10000; ++t)
        {
            const StepResult r = step_adaptive_lif(s, p, 0.0, 1.0);
            REQUIRE_FALSE(r.spiked);
            s = r.state;
        }
        CHECK(s.v == p.v_rest);
        CHECK(s.w == 0.0);
    }

    TEST_CASE("adaptive LIF inter-spike intervals never shrink under constant drive")
    {
        const AdaptiveLifParams p;
        const oracle::LifParams op = oracle_params(p);
        NeuronState s;
        s.v = p.v_rest;
        oracle::Lif o{p.v_rest, 0.0, 0.0};
        std::vector<int> spikes;
        for (int t = 0; t < 2000; ++t)
        {
            const StepResult r = step_adaptive_lif(s, p, 2.0, 1.0);
            s = r.state;
            REQUIRE(r.spiked == oracle::adaptive_lif(o, op, 2.0, 1.0));
            if (r.spiked)
            {
                spikes.push_back(t);
            }
        }
        REQUIRE(spikes.size() > 5);
        for (std::size_t k = 2; k < spikes.size(); ++k)
        {
            CHECK(spikes[k] - spikes[k - 1] >= spikes[k - 1] - spikes[k - 2]);
        }
        CHECK(spikes.back() - spikes[spikes.size() - 2] > spikes[1] - spikes[0]);
    }

    TEST_CASE("calcium suppresses firing")
    {
        const AdaptiveLifParams p;
        const auto count = [&](double c0) {
            NeuronState s;
            s.v = p.v_rest;
            s.w = c0;
            int n = 0;
            for (int t = 0; t < 300; ++t)
            {
                const StepResult r = step_adaptive_lif(s, p, 1.5, 1.0);
                s = r.state;
                n += r.spiked;
            }
            return n;
        };
        CHECK(count(5.0) < count(0.0));
    }

    TEST_CASE("refractory period lasts t_refr / dt steps at the reset value")
    {
        AdaptiveLifParams p;
        p.t_refr = 2.0;
        for (double dt : {1.0, 0.1})
        {
            NeuronState s;
            s.v = p.v_thresh + 1.0;
            s.refr_remaining = 0.0;
            StepResult r = step_adaptive_lif(s, p, 1000.0, dt);
            REQUIRE(r.spiked);
            int clamped = 0;
            s = r.state;
            while (s.refr_remaining > 0.0)
            {
                r = step_adaptive_lif(s, p, 1000.0, dt);
                REQUIRE_FALSE(r.spiked);
                CHECK(r.state.v == p.v_reset);
                s = r.state;
                ++clamped;
            }
            CHECK(clamped == static_cast<int>(std::lround(p.t_refr / dt)));
        }
    }

    TEST_CASE("calcium stays non-negative")
    {
        const AdaptiveLifParams p;
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> i_dist(-3.0, 6.0);
        NeuronState s;
        s.v = p.v_rest;
        for (int t = 0; t < 20000; ++t)
        {
            s = step_adaptive_lif(s, p, i_dist(gen), 1.0).state;
            REQUIRE(s.w >= 0.0);
        }
    }

    TEST_CASE("steps are deterministic")
    {
        const IzhikevichParams p = izhikevich_preset(IzhikevichKind::fast_spiking);
        NeuronState s;
        s.v = -50.3;
        s.w = 2.1;
        CHECK(step_izhikevich(s, p, 7.7, 1.0).state == step_izhikevich(s, p, 7.7, 1.0).state);
        const AdaptiveLifParams q;
        CHECK(step_adaptive_lif(s, q, 7.7, 1.0).state == step_adaptive_lif(s, q, 7.7, 1.0).state);
    }

    TEST_CASE("non-finite results raise numerical divergence")
    {
        const IzhikevichParams p = izhikevich_preset(IzhikevichKind::regular_spiking);
        NeuronState s;
        s.v = -60.0;
        s.w = 0.0;
        CHECK_THROWS_AS(step_izhikevich(s, p, std::numeric_limits<double>::infinity(), 1.0),
                NumericalDivergence);
        const AdaptiveLifParams q;
        CHECK_THROWS_AS(step_adaptive_lif(s, q, std::nan(""), 1.0), NumericalDivergence);
    }
}
