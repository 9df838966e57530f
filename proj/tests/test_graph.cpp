#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "fuseforge/errors.hpp"
#include "fuseforge/partition.hpp"

using namespace fuseforge;

namespace {

Graph path_graph(std::int64_t n) {
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return graph_from_edges(static_cast<std::size_t>(n), edges);
}

Graph complete_graph(std::int64_t n) { return erm(n, 1.0, 0); }

// Counts edges with one end in each of the two blocks by brute force.
std::size_t edges_between(const Graph& g, AgentId lo1, AgentId hi1, AgentId lo2, AgentId hi2) {
    std::size_t count = 0;
    for (AgentId u = lo1; u < hi1; ++u) {
        for (AgentId v : g.neighbors(u)) count += (v >= lo2 && v < hi2) ? 1 : 0;
    }
    return count;
}

} // namespace

TEST_CASE("torus2d degrees and sizes") {
    auto small = torus2d(3, 3);
    for (std::size_t v = 0; v < small.vertex_count(); ++v) CHECK(small.adjacency[v].size() == 8);

    auto g = torus2d(50, 100);
    CHECK(g.vertex_count() == 5000);
    CHECK(g.edge_count() == 20000);

    auto t4 = torus2d(4, 4);
    auto id = [](int r, int c) { return static_cast<AgentId>(r * 4 + c); };
    std::vector<AgentId> expected = {id(3, 3), id(3, 0), id(3, 1), id(0, 3), id(0, 1), id(1, 3), id(1, 0), id(1, 1)};
    std::sort(expected.begin(), expected.end());
    CHECK(t4.neighbors(0) == expected);

    CHECK_THROWS_AS(torus2d(2, 5), ParameterError);
}

TEST_CASE("erm edge cases and binomial statistics") {
    CHECK(erm(50, 0.0, 3).edge_count() == 0);
    CHECK(erm(50, 1.0, 3).edge_count() == 50 * 49 / 2);
    CHECK_THROWS_AS(erm(10, 1.5, 0), ParameterError);

    const double mean = 1000.0 * 999.0 / 2.0 * 0.01;
    const double sigma = std::sqrt(mean * 0.99);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto m = static_cast<double>(erm(1000, 0.01, s).edge_count());
        CHECK(std::abs(m - mean) <= 3 * sigma);
    }
    CHECK(erm(300, 0.05, 9) == erm(300, 0.05, 9));
    CHECK_FALSE(erm(300, 0.05, 9) == erm(300, 0.05, 10));
}

TEST_CASE("sbm blocks") {
    CHECK(sbm(100, 5, 0.0, 0.0, 1).edge_count() == 0);
    CHECK_THROWS_AS(sbm(101, 5, 0.01, 0.0, 1), ParameterError);

    const double mean = 200.0 * 199.0 / 2.0 * 0.01;
    const double sigma = std::sqrt(mean * 0.99);
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto g = sbm(1000, 5, 0.01, 0.0, s);
        std::size_t inBlock = 0;
        for (AgentId b = 0; b < 5; ++b) {
            const std::size_t e = edges_between(g, b * 200, b * 200 + 200, b * 200, b * 200 + 200) / 2;
            CHECK(std::abs(static_cast<double>(e) - mean) <= 3 * sigma);
            inBlock += e;
        }
        CHECK(inBlock == g.edge_count());
    }
    auto full = sbm(20, 2, 0.0, 1.0, 0);
    CHECK(full.edge_count() == 100);
    CHECK(edges_between(full, 0, 10, 10, 20) == 100);
}

TEST_CASE("star") {
    auto s2 = star(2);
    CHECK(s2.edge_count() == 1);
    CHECK(s2.neighbors(0) == std::vector<AgentId>{1});
    auto s = star(10001);
    CHECK(s.edge_count() == 10000);
    CHECK(s.neighbors(0).size() == 10000);
    for (AgentId v = 1; v < 10001; v += 997) CHECK(s.neighbors(v) == std::vector<AgentId>{0});
    CHECK_THROWS_AS(star(1), ParameterError);
}

TEST_CASE("edge list round trip") {
    auto g = erm(200, 0.05, 4);
    const auto path = (std::filesystem::temp_directory_path() / "fuseforge_graph_roundtrip.txt").string();
    save_edge_list(g, path);
    CHECK(load_edge_list(path) == g);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_edge_list("/nonexistent/graph.txt"), IoError);
}

TEST_CASE("hash partitioning") {
    auto g = path_graph(10);
    auto div = assignment_of(partition_hash(g, 4, HashMode::Div), 10);
    CHECK(div[7] == 1);
    auto mod = assignment_of(partition_hash(g, 5, HashMode::Mod), 10);
    CHECK(mod[7] == 1);

    auto torus = torus2d(10, 10);
    auto stripes = partition_hash(torus, 10, HashMode::Div);
    REQUIRE(stripes.size() == 10);
    for (const auto& p : stripes) {
        for (AgentId v : p.members) CHECK(v / 10 == p.id);
    }
    check_partitions(torus, stripes);
}

TEST_CASE("random partitioning") {
    auto g = erm(103, 0.05, 2);
    auto parts = partition_random(g, 10, 7);
    CHECK(parts.size() == 11);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) CHECK(parts[i].members.size() == 10);
    CHECK(parts.back().members.size() == 3);
    check_partitions(g, parts);
    CHECK(parts == partition_random(g, 10, 7));
    CHECK_THROWS_AS(partition_random(g, 0, 7), ParameterError);
}

TEST_CASE("greedy partitioning") {
    auto path = path_graph(4);
    auto a = greedy_assignment(path, 2, [](std::size_t) { return std::size_t{0}; });
    CHECK(a == Assignment{0, 0, 1, 1});

    auto k = complete_graph(12);
    CHECK(partition_greedy(k, 12, 5).size() == 1);

    // Two components of 3 with target 4: the first partition must reseed.
    auto split = graph_from_edges(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}});
    auto b = greedy_assignment(split, 4, [](std::size_t) { return std::size_t{0}; });
    CHECK(b == Assignment{0, 0, 0, 0, 1, 1});

    auto torus = torus2d(100, 100);
    double greedyCross = 0, randomCross = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto gp = partition_greedy(torus, 1000, s);
        check_partitions(torus, gp);
        greedyCross += static_cast<double>(cross_edge_count(gp));
        randomCross += static_cast<double>(cross_edge_count(partition_random(torus, 1000, s)));
    }
    CHECK(greedyCross < randomCross);
}

TEST_CASE("cross edges are symmetric and correctly labelled") {
    auto g = erm(150, 0.04, 11);
    auto parts = partition_greedy(g, 20, 3);
    auto a = assignment_of(parts, g.vertex_count());
    std::set<std::pair<AgentId, AgentId>> cross;
    for (const auto& p : parts) {
        for (const auto& e : p.crossEdges) {
            CHECK(a[static_cast<std::size_t>(e.source)] == p.id);
            CHECK(a[static_cast<std::size_t>(e.target)] == e.targetPartition);
            CHECK(e.targetPartition != p.id);
            cross.emplace(e.source, e.target);
        }
    }
    for (auto [u, v] : cross) CHECK(cross.count({v, u}) == 1);

    auto broken = parts;
    broken[0].members.push_back(broken[1].members.front());
    CHECK_THROWS_AS(check_partitions(g, broken), CoverageError);
}
