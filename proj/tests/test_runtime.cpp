#include <doctest.h>

#include <algorithm>
#include <future>
#include <vector>

#include "dpsnn/errors.hpp"
#include "dpsnn/network.hpp"
#include "dpsnn/partition.hpp"
#include "dpsnn/raster.hpp"
#include "dpsnn/runtime.hpp"
#include "dpsnn/tcp_transport.hpp"
#include "dpsnn/transport.hpp"

using namespace dpsnn;
using namespace std::chrono_literals;

namespace {

GridSpec pair_grid()
{
    GridSpec s;
    s.grid_x = 2;
    s.grid_y = 1;
    s.neurons_per_column = 10;
    s.target_fanout = 15;
    s.decay_lambda = 5.0;
    s.delay_max_ms = 5;
    s.seed = 11;
    return s;
}

GridSpec small_grid()
{
    GridSpec s;
    s.grid_x = 4;
    s.grid_y = 4;
    s.neurons_per_column = 40;
    s.target_fanout = 80;
    s.decay_lambda = 2.0;
    s.seed = 21;
    return s;
}

EngineConfig driven()
{
    EngineConfig c;
    c.stimulus.ext_weight = 0.8;
    return c;
}

Incoming frame_from(std::uint16_t from, std::uint16_t claimed, std::uint32_t step)
{
    return {from, false, encode_frame({claimed, step, {}})};
}

} // namespace

TEST_SUITE("runtime")
{
    TEST_CASE("two ranks exchange a spike after empty barrier steps")
    {
        const Network net = build_network(pair_grid(), 1.0);
        const auto parts = partition(net, 2);
        // neuron 7 lives in column 0 and feeds column 1
        REQUIRE(parts[0].local_neurons[7] == 7);
        const auto dest = parts[0].destinations_of(7);
        REQUIRE(std::vector<std::uint16_t>(dest.begin(), dest.end()) ==
                std::vector<std::uint16_t>{1});
        REQUIRE(parts[1].send_to == std::vector<std::uint16_t>{0});

        LoopbackHub hub(2);
        auto e0 = hub.endpoint(0);
        auto e1 = hub.endpoint(1);
        SpikeExchanger x0(*e0, parts[0], 2000ms);
        SpikeExchanger x1(*e1, parts[1], 2000ms);

        auto side1 = std::async(std::launch::async, [&] {
            std::vector<std::vector<std::uint32_t>> got;
            for (std::uint32_t s = 0; s <= 5; ++s)
            {
                got.push_back(x1.exchange(s, {}));
            }
            return got;
        });
        for (std::uint32_t s = 0; s < 5; ++s)
        {
            CHECK(x0.exchange(s, {}).empty());
        }
        const std::vector<std::uint32_t> spike{7};
        CHECK(x0.exchange(5, spike).empty());
        const auto got = side1.get();
        for (std::uint32_t s = 0; s < 5; ++s)
        {
            CHECK(got[s].empty());
        }
        CHECK(got[5] == std::vector<std::uint32_t>{7});
        CHECK(x0.frames_sent() == 6);
        CHECK(x0.bytes_sent() == 6 * 15 + 4);
    }

    TEST_CASE("out-of-order step is a protocol violation")
    {
        const Network net = build_network(pair_grid(), 1.0);
        const auto parts = partition(net, 2);
        LoopbackHub hub(2);
        auto e1 = hub.endpoint(1);
        SpikeExchanger x1(*e1, parts[1], 500ms);
        hub.mailbox(1).push(frame_from(0, 0, 3));
        CHECK_THROWS_AS(x1.exchange(0, {}), ProtocolViolation);
    }

    TEST_CASE("frames from outside the communication graph are rejected")
    {
        const Network net = build_network(pair_grid(), 1.0);
        auto parts = partition(net, 2);

        SUBCASE("unknown rank")
        {
            LoopbackHub hub(2);
            auto e1 = hub.endpoint(1);
            SpikeExchanger x1(*e1, parts[1], 500ms);
            hub.mailbox(1).push(frame_from(5, 5, 0));
            CHECK_THROWS_AS(x1.exchange(0, {}), ProtocolViolation);
        }
        SUBCASE("sender field disagrees with the link")
        {
            LoopbackHub hub(2);
            auto e1 = hub.endpoint(1);
            SpikeExchanger x1(*e1, parts[1], 500ms);
            hub.mailbox(1).push(frame_from(0, 1, 0));
            CHECK_THROWS_AS(x1.exchange(0, {}), ProtocolViolation);
        }
        SUBCASE("rank that does not feed this one")
        {
            GridSpec s = pair_grid();
            s.grid_x = 3;
            const Network three = build_network(s, 1.0);
            RankPartition deaf = partition(three, 3)[2];
            deaf.recv_from = {1};
            LoopbackHub hub(3);
            auto e2 = hub.endpoint(2);
            SpikeExchanger x2(*e2, deaf, 500ms);
            hub.mailbox(2).push(frame_from(0, 0, 0));
            CHECK_THROWS_AS(x2.exchange(0, {}), ProtocolViolation);
        }
    }

    TEST_CASE("a silent peer times out and an aborted peer fails fast")
    {
        const Network net = build_network(pair_grid(), 1.0);
        const auto parts = partition(net, 2);
        {
            LoopbackHub hub(2);
            auto e1 = hub.endpoint(1);
            SpikeExchanger x1(*e1, parts[1], 100ms);
            try
            {
                x1.exchange(0, {});
                FAIL("expected timeout");
            }
            catch (const ExchangeFailure &e)
            {
                CHECK(e.rank() == 0);
                CHECK(e.step() == 0);
            }
        }
        {
            LoopbackHub hub(2);
            auto e1 = hub.endpoint(1);
            SpikeExchanger x1(*e1, parts[1], 60000ms);
            hub.abort(0);
            const auto start = std::chrono::steady_clock::now();
            CHECK_THROWS_AS(x1.exchange(0, {}), ExchangeFailure);
            CHECK(std::chrono::steady_clock::now() - start < 5s);
        }
    }

    TEST_CASE("deliver_remote expands one remote spike through its row")
    {
        const Network net = build_network(small_grid(), 1.0);
        const auto parts = partition(net, 4);
        const RankPartition &p = parts[0];
        // a remote source with at least 3 synapses here
        std::size_t row = p.sources.size();
        for (std::size_t r = 0; r < p.sources.size(); ++r)
        {
            const bool remote = !std::binary_search(p.local_neurons.begin(),
                    p.local_neurons.end(), p.sources[r]);
            if (remote && p.row(r).size() >= 3)
            {
                row = r;
                break;
            }
        }
        REQUIRE(row < p.sources.size());

        EngineConfig cfg = driven();
        cfg.stimulus.ext_rate_hz = 0.0;
        Engine engine(p, cfg);
        engine.integrate();
        const std::vector<std::uint32_t> one{p.sources[row]};
        deliver_remote(engine, one);
        CHECK(engine.metrics().internal_synaptic_events == p.row(row).size());
        for (const IncomingSynapse &s : p.row(row))
        {
            CHECK(engine.ring().pending(s.local_target, s.delay_steps) != 0.0);
        }

        // a remote neuron with no synapses on this rank
        std::uint32_t stranger = net.neuron_count();
        for (std::uint32_t n = 0; n < net.neuron_count(); ++n)
        {
            if (p.source_row[n] < 0 &&
                    !std::binary_search(p.local_neurons.begin(), p.local_neurons.end(), n))
            {
                stranger = n;
                break;
            }
        }
        const std::vector<std::uint32_t> unknown{net.neuron_count() + 3};
        CHECK_THROWS_AS(deliver_remote(engine, unknown), ProtocolViolation);
        if (stranger < net.neuron_count())
        {
            const std::vector<std::uint32_t> bad{stranger};
            CHECK_THROWS_AS(deliver_remote(engine, bad), ProtocolViolation);
        }
    }

    TEST_CASE("results do not depend on the number of ranks")
    {
        const Network net = build_network(small_grid(), 1.0);
        const EngineConfig cfg = driven();
        const std::uint32_t steps = 800;
        const RunResult one = run_local(net, cfg, steps);
        REQUIRE(one.metrics.total_spikes > 0);
        for (std::uint32_t p : {2u, 3u, 5u, 16u})
        {
            RunOptions opts;
            opts.ranks = p;
            const RunResult many = run_local(net, cfg, steps, opts);
            CHECK(many.raster == one.raster);
            CHECK(many.metrics.total_spikes == one.metrics.total_spikes);
            CHECK(many.metrics.internal_synaptic_events == one.metrics.internal_synaptic_events);
            CHECK(many.metrics.external_synaptic_events == one.metrics.external_synaptic_events);
            std::uint64_t spikes = 0;
            std::uint64_t internal = 0;
            for (const RunMetrics &m : many.per_rank)
            {
                spikes += m.total_spikes;
                internal += m.internal_synaptic_events;
            }
            CHECK(spikes == many.metrics.total_spikes);
            CHECK(internal == many.metrics.internal_synaptic_events);
            CHECK(internal == internal_events_from_raster(many.raster, net));
        }
    }

    TEST_CASE("TCP and in-memory transports give identical rasters")
    {
        const Network net = build_network(small_grid(), 1.0);
        const EngineConfig cfg = driven();
        RunOptions opts;
        opts.ranks = 4;
        const RunResult mem = run_local(net, cfg, 400, opts);
        opts.transport = TransportKind::tcp;
        const RunResult tcp = run_local(net, cfg, 400, opts);
        CHECK(tcp.raster == mem.raster);
        CHECK(tcp.metrics.total_synaptic_events() == mem.metrics.total_synaptic_events());
    }

    TEST_CASE("steps_for rounds to the nearest step")
    {
        CHECK(steps_for(3.0, 1.0) == 3000);
        CHECK(steps_for(0.5, 0.1) == 5000);
        CHECK(steps_for(0.0004, 1.0) == 0);
    }

    TEST_CASE("cluster file parsing")
    {
        const auto eps = parse_cluster("# two hosts\n1 b.example:7001\n\n0 10.0.0.1:7000\n");
        REQUIRE(eps.size() == 2);
        CHECK(eps[0] == Endpoint{"10.0.0.1", 7000});
        CHECK(eps[1] == Endpoint{"b.example", 7001});
        CHECK_THROWS_AS(parse_cluster("0 a:1\n0 b:2\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_cluster("0 a:1\n2 b:2\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_cluster("0 a\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_cluster("0 a:99999\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_cluster(""), std::invalid_argument);
    }
}
