#include <doctest.h>

#include "fuseforge/errors.hpp"
#include "support/sim_fixtures.hpp"

using namespace fuseforge;
using namespace simfix;

namespace {

OptimizedProgram split_square(PassSet passes) { return optimize(split_square_simulation(), split_square_partitions(), passes); }

const AgentPlan& agent(const OptimizedProgram& p, AgentId a) {
    for (const auto& plan : p.plans) {
        if (auto it = plan.perAgent.find(a); it != plan.perAgent.end()) return it->second;
    }
    throw std::out_of_range("agent");
}

} // namespace

TEST_CASE("pass dependencies and mode names") {
    CHECK_NOTHROW(check_pass_dependencies({}));
    CHECK_THROWS_WITH_AS(check_pass_dependencies({Pass::Synthesize}), doctest::Contains("refine"), ConfigurationError);
    CHECK_THROWS_WITH_AS(check_pass_dependencies({Pass::Refine, Pass::RewriteRemote}),
                         doctest::Contains("synthesize"), ConfigurationError);
    CHECK_THROWS_AS(check_pass_dependencies({Pass::RewriteLocal}), ConfigurationError);
    CHECK_THROWS_AS(check_pass_dependencies({Pass::Pushdown, Pass::Merge}), ConfigurationError);
    for (const auto& m : mode_names()) CHECK_NOTHROW(check_pass_dependencies(mode_passes(m)));
    CHECK(mode_passes("unopt").empty());
    CHECK(mode_passes("merge") == PassSet{Pass::Merge});
    CHECK_THROWS_WITH_AS(mode_passes("fast"), doctest::Contains("full+pushdown"), UsageError);
}

TEST_CASE("refine splits references into local, remote and dynamic") {
    auto p = split_square({Pass::Refine});
    const auto& n1 = agent(p, x(1)).neighbors;
    CHECK(n1.localStatic == std::vector<StateRef>{ref(x(2))});
    CHECK(n1.remoteStatic == std::vector<std::pair<StateRef, PartitionId>>{{ref(x(3)), 1}, {ref(x(4)), 1}});
    CHECK(n1.dynamic.empty());

    auto sim = split_square_simulation();
    auto one = optimize(sim, single_partition(4), {Pass::Refine});
    for (const auto& [a, ap] : one.plans[0].perAgent) CHECK(ap.neighbors.remoteStatic.empty());

    // Without static marks everything stays a mailbox message.
    Assignment a{0, 0, 1, 1};
    std::map<AgentId, BehavioralEquation> eqs;
    for (AgentId i = 0; i < 2; ++i) eqs.emplace(i, sim.equations[static_cast<std::size_t>(i)]);
    auto refined = refine_communication(split_square_partitions()[0], a, eqs, {});
    CHECK(refined.at(0).dynamic.size() == 3);
    CHECK(refined.at(0).localStatic.empty());

    eqs.at(0).referenceSet.push_back(ref(9));
    CHECK_THROWS_AS(refine_communication(split_square_partitions()[0], a, eqs, {}), DanglingReferenceError);
}

TEST_CASE("cache synthesis orders boundary agents by id") {
    auto p = split_square({Pass::Refine, Pass::Synthesize});
    REQUIRE(p.caches.size() == 1);
    const auto& c = p.caches[0];
    CHECK(c.sourcePartition == 1);
    CHECK(c.destPartition == 0);
    CHECK(c.schema == std::vector<StateRef>{ref(x(3)), ref(x(4))});
    CHECK(c.offset_of(ref(x(3))) == 0);
    CHECK(c.offset_of(ref(x(4))) == 1);
    CHECK_FALSE(c.offset_of(ref(x(1))).has_value());
    CHECK(p.plans[0].inboundCaches == std::vector<MessageCache>{c});
    CHECK(p.plans[1].outboundCaches == std::vector<MessageCache>{c});
    CHECK(to_string(agent(p, x(1)).program[1]) == "lookup(c0,x2)");

    auto single = optimize(split_square_simulation(), single_partition(4), mode_passes("full"));
    CHECK(single.caches.empty());
}

TEST_CASE("caches on a random graph resolve every remote reference once") {
    auto g = erm(1000, 0.01, 3);
    auto parts = partition_greedy(g, 100, 3);
    auto sim = workloads::epidemics_simulation(g, 0.05, 5, 3);
    auto p = optimize(sim, parts, mode_passes("+remote"));
    CHECK(p.caches.size() <= 90);
    std::set<std::pair<PartitionId, PartitionId>> pairs;
    for (const auto& c : p.caches) CHECK(pairs.emplace(c.sourcePartition, c.destPartition).second);
    std::size_t resolved = 0;
    for (const auto& plan : p.plans) {
        for (const auto& [a, ap] : plan.perAgent) {
            for (const auto& [r, src] : ap.neighbors.remoteStatic) {
                int hits = 0;
                for (const auto& c : plan.inboundCaches) hits += c.sourcePartition == src && c.offset_of(r) ? 1 : 0;
                CHECK(hits == 1);
                ++resolved;
            }
            for (const auto& leaf : ap.tree.children) CHECK(leaf.accessor == Accessor::Local);
            for (const auto& e : ap.program) CHECK(e.kind != StagedExpr::Kind::CacheLookup);
        }
    }
    CHECK(resolved == cross_edge_count(parts));
}

TEST_CASE("rewrite remote turns remote leaves into cache reads") {
    auto p = split_square({Pass::Refine, Pass::Synthesize, Pass::RewriteRemote});
    const auto& x1 = agent(p, x(1));
    REQUIRE(x1.program.size() == 3);
    CHECK(x1.program[0].kind == StagedExpr::Kind::Message);
    CHECK(to_string(x1.program[1]) == "(0,0)@c");
    CHECK(to_string(x1.program[2]) == "(0,1)@c");
    CHECK(x1.tree.children[2] == Leaf{CacheOffset{0, 0}, Accessor::Local, 0});
    CHECK(x1.tree.children[3] == Leaf{CacheOffset{0, 1}, Accessor::Local, 0});

    auto again = p.plans[0];
    rewrite_remote(again);
    CHECK(again == p.plans[0]);

    // Skipping synthesis leaves remote references without a slot.
    auto bare = split_square({Pass::Refine});
    CHECK_THROWS_AS(rewrite_remote(bare.plans[0]), PipelineOrderError);
    CHECK_NOTHROW(rewrite_remote(bare.plans[1]));
}

TEST_CASE("rewrite local reads the previous buffer") {
    auto p = split_square({Pass::Refine, Pass::RewriteLocal});
    const auto& x1 = agent(p, x(1));
    CHECK(x1.program[0] == StagedExpr::local_read(ref(x(2)), Buffer::Previous));
    CHECK(x1.program[1].kind == StagedExpr::Kind::Message);
    CHECK(p.plans[0].doubleBuffered);
    auto again = p.plans[0];
    rewrite_local(again);
    CHECK(again == p.plans[0]);
}

TEST_CASE("merge shares leaves across member trees") {
    auto before = split_square(mode_passes("+remote").with(Pass::RewriteLocal));
    auto plan = before.plans[0];
    plan.merged = false;
    plan.sharedLeaves.clear();
    CHECK(node_count(plan) == 10);
    merge(plan);
    // x1, x2 and both cache slots appear in both trees.
    CHECK(node_count(plan) == 6);
    CHECK(plan.mergedOrder == std::vector<AgentId>{0, 1});

    auto singleton = build_partitions(graph_from_edges(1, {}), {0});
    Simulation lone = simulation_of({{}}, {1}, min_contract());
    auto s = optimize(lone, singleton, {});
    auto merged = s.plans[0];
    merge(merged);
    CHECK(merged.perAgent == s.plans[0].perAgent);
    CHECK(node_count(merged) == node_count(s.plans[0]));
}

TEST_CASE("pushdown folds remote senders near them") {
    auto sim = split_square_simulation();
    sim.pushdownTargets = {x(1)};
    auto p = optimize(sim, split_square_partitions(), mode_passes("full+pushdown"));
    REQUIRE(p.plans[1].aggregators.size() == 1);
    const auto& d = p.plans[1].aggregators[0];
    CHECK(d.syntheticId < 0);
    CHECK(d.foldOp == "min");
    CHECK(d.target == x(1));
    CHECK(d.senders == std::vector<StateRef>{ref(x(3)), ref(x(4))});
    CHECK(to_string(p.plans[1].aggregatorPrograms[0]) == "min{local(x2,cur),local(x3,cur)}");
    CHECK(p.plans[0].aggregators.empty());
    const auto& x1 = agent(p, x(1));
    REQUIRE(x1.program.size() == 2);
    CHECK(x1.program[0] == StagedExpr::message(ref(d.syntheticId)));
    CHECK(x1.program[1] == StagedExpr::local_read(ref(x(2)), Buffer::Previous));
    CHECK(x1.neighbors.aggregated == std::vector<StateRef>{ref(x(3)), ref(x(4))});
    // x2 still reads x3 and x4 through the cache.
    CHECK(p.caches.size() == 1);
    CHECK(p.caches[0].schema.size() == 2);

    // All senders local: nothing to push down.
    auto local = split_square_simulation();
    local.pushdownTargets = {x(3)};
    auto q = optimize(local, split_square_partitions(), mode_passes("full+pushdown"));
    for (const auto& plan : q.plans) CHECK(plan.aggregators.empty());

    auto pr = workloads::pagerank_simulation(erm(30, 0.3, 1), 10, false);
    pr.pushdownTargets = {0};
    CHECK_THROWS_AS(optimize(pr, partition_hash(erm(30, 0.3, 1), 10, HashMode::Div), mode_passes("full+pushdown")),
                    AlgebraicPreconditionError);
}

TEST_CASE("economics pushdown leaves one input per trading partition") {
    auto g = star(1001);
    auto parts = partition_greedy(g, 101, 5);
    auto sim = workloads::economics_simulation(g, {}, 5);
    auto p = optimize(sim, parts, mode_passes("full+pushdown"));
    std::size_t aggregators = 0;
    for (const auto& plan : p.plans) aggregators += plan.aggregators.size();
    CHECK(aggregators == parts.size());
    CHECK(agent(p, 0).program.size() == parts.size());
}

TEST_CASE("optimizer records pass timings only for enabled passes") {
    auto p = split_square(mode_passes("merge+cache"));
    CHECK(p.passMs[static_cast<std::size_t>(Pass::RewriteLocal)] == 0.0);
    CHECK(p.total_ms() >= 0.0);
    CHECK(p.plans[0].passes == mode_passes("merge+cache"));
}
