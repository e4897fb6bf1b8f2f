#include <doctest.h>

#include <algorithm>
#include <tuple>
#include <vector>

#include "dpsnn/errors.hpp"
#include "dpsnn/network.hpp"
#include "dpsnn/partition.hpp"

using namespace dpsnn;

namespace {

using Edge = std::tuple<std::uint32_t, std::uint32_t, float, std::uint16_t>;

std::vector<Edge> edges_of(const Network &net)
{
    std::vector<Edge> out;
    for (std::uint32_t n = 0; n < net.neuron_count(); ++n)
    {
        for (const Synapse &s : net.outgoing(n))
        {
            out.emplace_back(n, s.target, s.weight, s.delay_steps);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Edge> edges_of(const std::vector<RankPartition> &parts)
{
    std::vector<Edge> out;
    for (const RankPartition &p : parts)
    {
        for (std::size_t r = 0; r < p.sources.size(); ++r)
        {
            for (const IncomingSynapse &s : p.row(r))
            {
                out.emplace_back(p.sources[r], p.local_neurons[s.local_target], s.weight,
                        s.delay_steps);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

GridSpec grid(std::uint32_t side, std::uint32_t npc, double fanout)
{
    GridSpec s;
    s.grid_x = side;
    s.grid_y = side;
    s.neurons_per_column = npc;
    s.target_fanout = fanout;
    s.decay_lambda = 3.0;
    return s;
}

} // namespace

TEST_SUITE("partition")
{
    TEST_CASE("round-robin column assignment")
    {
        const GridSpec s = grid(10, 10, 50);
        const PartitionMap map(s, 4);
        for (std::uint32_t r = 0; r < 4; ++r)
        {
            CHECK(map.columns_of(r).size() == 25);
        }
        CHECK(map.rank_of_column(0) == 0);
        CHECK(map.rank_of_column(5) == 1);
        CHECK(map.rank_of_neuron(10 * 7 + 3) == 3);
    }

    TEST_CASE("column counts differ by at most one for every rank count")
    {
        const GridSpec s = grid(7, 10, 20);
        for (std::uint32_t p = 1; p <= s.column_count(); ++p)
        {
            const PartitionMap map(s, p);
            std::size_t lo = SIZE_MAX;
            std::size_t hi = 0;
            std::size_t total = 0;
            for (std::uint32_t r = 0; r < p; ++r)
            {
                const std::size_t n = map.columns_of(r).size();
                lo = std::min(lo, n);
                hi = std::max(hi, n);
                total += n;
            }
            REQUIRE(total == s.column_count());
            REQUIRE(hi - lo <= 1);
        }
    }

    TEST_CASE("too many ranks is infeasible")
    {
        const Network net = build_network(grid(3, 10, 20), 1.0);
        CHECK_THROWS_AS(partition(net, 10), InfeasiblePartition);
        CHECK_THROWS_AS(partition(net, 0), InfeasiblePartition);
        CHECK_NOTHROW(partition(net, 9));
    }

    TEST_CASE("one rank holds everything and talks to nobody")
    {
        const Network net = build_network(grid(4, 10, 30), 1.0);
        const auto parts = partition(net, 1);
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].local_neurons.size() == net.neuron_count());
        CHECK(parts[0].synapses.size() == net.synapse_count());
        CHECK(parts[0].send_to.empty());
        CHECK(parts[0].recv_from.empty());
        CHECK(parts[0].destinations.empty());
    }

    TEST_CASE("desk-scale P = 8 partitions reproduce the synapse multiset")
    {
        const Network net = build_network(GridSpec{}, 1.0, 4);
        const std::vector<Edge> whole = edges_of(net);
        const auto parts = partition(net, 8);
        CHECK(edges_of(parts) == whole);
        std::size_t neurons = 0;
        for (const auto &p : parts)
        {
            neurons += p.local_neurons.size();
        }
        CHECK(neurons == net.neuron_count());
    }

    TEST_CASE("communication graph is consistent with the synapses")
    {
        const Network net = build_network(grid(4, 10, 30), 1.0);
        const std::uint32_t ranks = 5;
        const auto parts = partition(net, ranks);
        const PartitionMap map(net.spec(), ranks);
        for (std::uint32_t r = 0; r < ranks; ++r)
        {
            const RankPartition &p = parts[r];
            std::vector<std::uint16_t> send;
            std::vector<std::uint16_t> recv;
            for (std::size_t i = 0; i < p.local_neurons.size(); ++i)
            {
                const std::uint32_t n = p.local_neurons[i];
                std::vector<std::uint16_t> dest;
                for (const Synapse &s : net.outgoing(n))
                {
                    const auto t = static_cast<std::uint16_t>(map.rank_of_neuron(s.target));
                    if (t != r)
                    {
                        dest.push_back(t);
                    }
                }
                std::sort(dest.begin(), dest.end());
                dest.erase(std::unique(dest.begin(), dest.end()), dest.end());
                const auto got = p.destinations_of(static_cast<std::uint32_t>(i));
                REQUIRE(std::vector<std::uint16_t>(got.begin(), got.end()) == dest);
                send.insert(send.end(), dest.begin(), dest.end());
            }
            for (std::uint32_t src : p.sources)
            {
                if (map.rank_of_neuron(src) != r)
                {
                    recv.push_back(static_cast<std::uint16_t>(map.rank_of_neuron(src)));
                }
            }
            for (auto *v : {&send, &recv})
            {
                std::sort(v->begin(), v->end());
                v->erase(std::unique(v->begin(), v->end()), v->end());
            }
            CHECK(p.send_to == send);
            CHECK(p.recv_from == recv);
            for (std::uint16_t peer : p.send_to)
            {
                const auto &back = parts[peer].recv_from;
                CHECK(std::find(back.begin(), back.end(), r) != back.end());
            }
        }
    }

    TEST_CASE("partition_rank equals the matching element of partition")
    {
        const Network net = build_network(grid(4, 10, 30), 1.0);
        const auto parts = partition(net, 3);
        for (std::uint32_t r = 0; r < 3; ++r)
        {
            const RankPartition one = partition_rank(net, 3, r);
            CHECK(one.local_neurons == parts[r].local_neurons);
            CHECK(one.sources == parts[r].sources);
            CHECK(one.source_offsets == parts[r].source_offsets);
            CHECK(one.send_to == parts[r].send_to);
            CHECK(one.recv_from == parts[r].recv_from);
        }
    }
}
