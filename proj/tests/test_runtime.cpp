#include <doctest.h>

#include "fuseforge/errors.hpp"
#include "fuseforge/pi/semantics.hpp"
#include "support/pi_fixtures.hpp"
#include "support/sim_fixtures.hpp"

using namespace fuseforge;
using namespace simfix;

namespace {

std::vector<bool> cells(std::int64_t width, std::int64_t height, const std::vector<std::pair<int, int>>& alive) {
    std::vector<bool> v(static_cast<std::size_t>(width * height), false);
    for (auto [r, c] : alive) v[static_cast<std::size_t>(r * width + c)] = true;
    return v;
}

std::vector<Value> as_values(const std::vector<bool>& b) { return {b.begin(), b.end()}; }

} // namespace

TEST_CASE("zero rounds return the initial state") {
    auto g = torus2d(5, 5);
    auto sim = workloads::gol_simulation(g, workloads::random_cells(25, 0.4, 2));
    for (const auto& mode : mode_names()) {
        auto r = run_mode(sim, partition_hash(g, 5, HashMode::Div), mode, 0);
        CHECK(r.state.superstep == 0);
        CHECK(r.state.values == sim.initial);
        CHECK(r.metrics.roundMs.empty());
    }
}

TEST_CASE("blinker oscillates with period two") {
    auto g = torus2d(5, 5);
    auto horizontal = cells(5, 5, {{2, 1}, {2, 2}, {2, 3}});
    auto vertical = cells(5, 5, {{1, 2}, {2, 2}, {3, 2}});
    auto sim = workloads::gol_simulation(g, horizontal);
    for (const auto& mode : {"unopt", "full"}) {
        auto parts = partition_hash(g, 10, HashMode::Div);
        CHECK(run_mode(sim, parts, mode, 1).state.values == as_values(vertical));
        CHECK(run_mode(sim, parts, mode, 2).state.values == as_values(horizontal));
    }
}

TEST_CASE("two cores match the reduction oracle") {
    pi::PiContext ctx;
    auto state = pi::initial_state(fixtures::two_core_system(ctx), ctx);
    auto all = pi::reduce_all(state, ctx, 10000);
    REQUIRE(all.irreducible.size() == 1);
    auto s5 = pi::observe(all.irreducible[0], ctx.names.intern("s5"), ctx);
    auto s6 = pi::observe(all.irreducible[0], ctx.names.intern("s6"), ctx);
    REQUIRE(s5.has_value());
    REQUIRE(s6.has_value());

    auto sim = two_core_simulation();
    auto split = build_partitions(graph_from_edges(2, {{0, 1}}), {0, 1});
    for (const auto& mode : mode_names()) {
        auto r = run_mode(sim, split, mode, 2);
        CHECK(r.state.values[0] == *s5);
        CHECK(r.state.values[1] == *s6);
    }
    CHECK(*s5 == Value{std::int64_t{12}});
    CHECK(*s6 == Value{std::int64_t{-10}});
}

TEST_CASE("every mode agrees on game of life") {
    auto g = torus2d(20, 20);
    auto sim = workloads::gol_simulation(g, workloads::random_cells(400, 0.3, 7));
    auto parts = partition_greedy(g, 40, 7);
    const auto reference = run_mode(sim, parts, "unopt", 10).state.values;
    for (const auto& mode : mode_names()) {
        CAPTURE(mode);
        CHECK(run_mode(sim, parts, mode, 10).state.values == reference);
    }
}

TEST_CASE("results do not depend on the thread count") {
    auto g = erm(300, 0.03, 4);
    auto parts = partition_greedy(g, 30, 4);
    auto epi = workloads::epidemics_simulation(g, 0.2, 4, 4);
    auto pr = workloads::pagerank_simulation(g, 1000, false);
    for (const auto& mode : {"unopt", "+local", "full"}) {
        auto e1 = run_mode(epi, parts, mode, 20, 1).state.values;
        auto p1 = run_mode(pr, parts, mode, 15, 1).state.values;
        for (int threads : {2, 8}) {
            CHECK(run_mode(epi, parts, mode, 20, threads).state.values == e1);
            CHECK(run_mode(pr, parts, mode, 15, threads).state.values == p1);
        }
        CHECK(run_mode(pr, parts, "unopt", 15, 1).state.values == p1);
    }
}

TEST_CASE("mailbox messages are consumed one superstep after sending") {
    auto g = erm(200, 0.05, 9);
    auto parts = partition_random(g, 25, 9);
    auto sim = workloads::pagerank_simulation(g, 1000, false);
    auto r = run_mode(sim, parts, "unopt", 6);
    CHECK(r.metrics.mailboxConsumed[0] == r.metrics.primingSent);
    for (std::size_t t = 1; t < 6; ++t) CHECK(r.metrics.mailboxConsumed[t] == r.metrics.mailboxSent[t - 1]);
    CHECK(r.metrics.mailboxSent[0] == 2 * g.edge_count());
}

TEST_CASE("wire units count cross-partition transfers") {
    auto sim = split_square_simulation();
    auto full = run_mode(sim, split_square_partitions(), "full", 3);
    for (auto w : full.metrics.wire) CHECK(w == 1);
    auto unopt = run_mode(sim, split_square_partitions(), "unopt", 3);
    for (auto w : unopt.metrics.wire) CHECK(w == 4);
    CHECK(full.state.values == unopt.state.values);

    auto one = run_mode(sim, single_partition(4), "unopt", 3);
    for (auto w : one.metrics.wire) CHECK(w == 0);

    auto g = torus2d(100, 100);
    auto gol = workloads::gol_simulation(g, workloads::random_cells(10000, 0.3, 1));
    auto stripes = partition_greedy(g, 1000, 1);
    auto u = run_mode(gol, stripes, "unopt", 2);
    CHECK(u.metrics.wire[0] == cross_edge_count(stripes));
    std::uint64_t previous = u.metrics.wire[0];
    for (const auto& mode : {"merge", "merge+cache", "full"}) {
        auto r = run_mode(gol, stripes, mode, 2);
        CHECK(r.metrics.wire[0] <= previous);
        previous = r.metrics.wire[0];
        CHECK(r.metrics.logical[0] == u.metrics.logical[0]);
    }
    CHECK(previous <= 20 * 10);
}

TEST_CASE("merge-only mode frames cross-partition messages with a partition id") {
    auto sim = split_square_simulation();
    auto unopt = run_mode(sim, split_square_partitions(), "unopt", 1);
    auto merged = run_mode(sim, split_square_partitions(), "merge", 1);
    CHECK(merged.metrics.wire[0] == unopt.metrics.wire[0]);
    CHECK(merged.metrics.wireBytes[0] == unopt.metrics.wireBytes[0] + 4 * unopt.metrics.wire[0]);
}

TEST_CASE("deliver deserializes and orders by sender") {
    auto c = workloads::gol_contract();
    CHECK(deliver(c, 0, {}).empty());
    auto out = deliver(c, 5, {{9, Value{std::int64_t{1}}}, {2, Value{std::int64_t{0}}}, {4, Value{std::int64_t{1}}}});
    REQUIRE(out.size() == 3);
    CHECK(out[0].sender == 2);
    CHECK(out[1].sender == 4);
    CHECK(out[2].sender == 9);
    CHECK(out[2].payload == Value{std::int64_t{1}});

    auto shifted = c;
    shifted.deserialize = [](const Value& v) { return Value{std::get<std::int64_t>(v) * 10}; };
    CHECK(deliver(shifted, 0, {{1, Value{std::int64_t{3}}}})[0].payload == Value{std::int64_t{30}});

    CHECK_THROWS_WITH_AS(deliver(c, 5, {{3, Value{2.5}}}), doctest::Contains("x3 to x5"), ContractError);
}

TEST_CASE("plans must cover every agent exactly once") {
    auto sim = split_square_simulation();
    auto p = optimize(sim, split_square_partitions(), {});
    auto missing = p;
    missing.plans[1].perAgent.erase(x(4));
    missing.plans[1].mergedOrder.pop_back();
    CHECK_THROWS_AS(Executor(missing, sim, 1), CoverageError);
    auto twice = p;
    twice.plans[1].perAgent.emplace(x(1), p.plans[0].perAgent.at(x(1)));
    twice.plans[1].mergedOrder.push_back(x(1));
    CHECK_THROWS_AS(Executor(twice, sim, 1), CoverageError);
}

TEST_CASE("merged order does not change double-buffered results") {
    auto g = torus2d(12, 12);
    auto sim = workloads::gol_simulation(g, workloads::random_cells(144, 0.35, 3));
    auto parts = partition_greedy(g, 36, 3);
    auto program = optimize(sim, parts, mode_passes("full"));
    auto baseline = execute(program, sim, 10, 1, 3).state.values;
    for (std::uint64_t s = 0; s < 2; ++s) {
        auto shuffled = program;
        SplitMix64 rng(s);
        for (auto& plan : shuffled.plans) {
            auto& o = plan.mergedOrder;
            for (std::size_t k = o.size(); k > 1; --k) std::swap(o[k - 1], o[rng.below(k)]);
        }
        CHECK(execute(shuffled, sim, 10, 2, 3).state.values == baseline);
    }
}

TEST_CASE("runs repeat bit-exactly and keep previous values when double buffered") {
    auto g = torus2d(10, 10);
    auto sim = workloads::gol_simulation(g, workloads::random_cells(100, 0.3, 5));
    auto program = optimize(sim, partition_greedy(g, 25, 5), mode_passes("full"));
    Executor ex(program, sim, 2);
    auto a = ex.run(5, 1);
    auto b = ex.run(5, 1);
    CHECK(a.state.values == b.state.values);
    CHECK(checksum(a.state.values) == checksum(b.state.values));
    auto four = ex.run(4, 1);
    CHECK(a.state.previousValues == four.state.values);
}
