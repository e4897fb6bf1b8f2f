#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpsnn/delay_ring.hpp"
#include "dpsnn/engine.hpp"
#include "dpsnn/errors.hpp"
#include "dpsnn/stimulus.hpp"

using namespace dpsnn;

TEST_SUITE("stimulus")
{
    TEST_CASE("zero rate gives no arrivals")
    {
        StimulusSpec stim;
        stim.ext_rate_hz = 0.0;
        for (std::uint32_t t = 0; t < 1000; ++t)
        {
            REQUIRE(poisson_external(t % 17, t, stim, 1.0, 3) == 0);
        }
        stim = {};
        stim.ext_synapses_per_neuron = 0;
        CHECK(poisson_external(1, 1, stim, 1.0, 3) == 0);
    }

    TEST_CASE("594 synapses at 3 Hz average 1.782 arrivals per ms")
    {
        const StimulusSpec stim;
        const int draws = 1000000;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int k = 0; k < draws; ++k)
        {
            const double x = poisson_external(static_cast<std::uint32_t>(k % 1000),
                    static_cast<std::uint32_t>(k / 1000), stim, 1.0, 42);
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / draws;
        const double var = sum_sq / draws - mean * mean;
        CHECK(mean == doctest::Approx(1.782).epsilon(0.01));
        CHECK(var == doctest::Approx(1.782).epsilon(0.02));
    }

    TEST_CASE("large means take the chunked path and stay Poisson")
    {
        StimulusSpec stim;
        stim.ext_synapses_per_neuron = 100000;
        stim.ext_rate_hz = 10.0;
        // mean 1000 per ms
        const int draws = 20000;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int k = 0; k < draws; ++k)
        {
            const double x = poisson_external(static_cast<std::uint32_t>(k), 0, stim, 1.0, 5);
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / draws;
        const double var = sum_sq / draws - mean * mean;
        CHECK(mean == doctest::Approx(1000.0).epsilon(0.005));
        CHECK(var == doctest::Approx(1000.0).epsilon(0.05));
    }

    TEST_CASE("draws are keyed by seed, neuron and step only")
    {
        const StimulusSpec stim;
        for (std::uint32_t n = 0; n < 100; ++n)
        {
            REQUIRE(poisson_external(n, 7, stim, 1.0, 9) == poisson_external(n, 7, stim, 1.0, 9));
        }
        int differ = 0;
        for (std::uint32_t n = 0; n < 200; ++n)
        {
            differ += poisson_external(n, 7, stim, 1.0, 9) != poisson_external(n, 7, stim, 1.0, 10);
        }
        CHECK(differ > 50);
    }

    TEST_CASE("stimulus validation")
    {
        StimulusSpec stim;
        stim.ext_rate_hz = -1.0;
        CHECK_THROWS_AS(validate(stim), std::invalid_argument);
    }

    TEST_CASE("expected event count")
    {
        CHECK(expected_event_count(10000, 3, 5.1, 1195, 594, 3) == doctest::Approx(236295000.0));
        CHECK(expected_event_count(1000, 1, 5.0, 200, 0, 0) == doctest::Approx(1000000.0));
        CHECK(expected_event_count(0, 3, 5.1, 1195, 594, 3) == 0.0);
        CHECK(expected_event_count(10, 3, 0, 1195, 0, 3) == 0.0);
    }
}

TEST_SUITE("stimulus")
{
    TEST_CASE("delay ring: single delivery lands exactly delay slots ahead")
    {
        DelayRing ring(4, 5);
        CHECK(ring.length() == 6);
        ring.add(2, 3, 0.25);
        CHECK(ring.pending(2, 3) == 0.25);
        std::vector<double> out(4);
        for (int t = 0; t < 3; ++t)
        {
            ring.drain(out);
            CHECK(out[2] == 0.0);
            ring.advance();
        }
        ring.drain(out);
        CHECK(out[2] == 0.25);
        ring.advance();
        // drained exactly once
        for (int t = 0; t < 6; ++t)
        {
            ring.drain(out);
            CHECK(out[2] == 0.0);
            ring.advance();
        }
    }

    TEST_CASE("delay ring: accumulators sum and wrap")
    {
        DelayRing ring(2, 3);
        std::vector<double> out(2);
        for (int t = 0; t < 10; ++t)
        {
            ring.add(1, 3, 0.5);
            ring.add(1, 3, 0.25);
            ring.drain(out);
            CHECK(out[1] == (t >= 3 ? 0.75 : 0.0));
            ring.advance();
        }
    }

    TEST_CASE("delay ring: out-of-range delays are contract violations")
    {
        DelayRing ring(2, 3);
        CHECK_THROWS_AS(ring.add(0, 0, 1.0), ContractViolation);
        CHECK_THROWS_AS(ring.add(0, 4, 1.0), ContractViolation);
        CHECK_NOTHROW(ring.add(0, 3, 1.0));
    }

    TEST_CASE("deliver_spike counts one event per synapse")
    {
        DelayRing ring(3, 5);
        CHECK(deliver_spike(ring, {}) == 0);
        CHECK(ring.pending(0, 1) == 0.0);

        const std::vector<IncomingSynapse> one{{1, 0.125f, 3}};
        CHECK(deliver_spike(ring, one) == 1);
        CHECK(ring.pending(1, 3) == 0.125);

        const std::vector<IncomingSynapse> two{{2, 0.5f, 2}, {2, 0.25f, 2}};
        CHECK(deliver_spike(ring, two) == 2);
        CHECK(ring.pending(2, 2) == 0.75);

        const std::vector<IncomingSynapse> zero_delay{{0, 1.0f, 0}};
        CHECK_THROWS_AS(deliver_spike(ring, zero_delay), ContractViolation);
    }

    TEST_CASE("deliver_spike scales excitatory efficacies only")
    {
        DelayRing ring(2, 2);
        const std::vector<IncomingSynapse> syn{{0, 0.5f, 1}, {1, -0.5f, 1}};
        deliver_spike(ring, syn, 3.0);
        CHECK(ring.pending(0, 1) == 1.5);
        CHECK(ring.pending(1, 1) == -0.5);
    }
}
