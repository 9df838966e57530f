// Runs each acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "fuseforge/bench.hpp"
#include "fuseforge/pi/semantics.hpp"
#include "support/pi_fixtures.hpp"
#include "support/sim_fixtures.hpp"

#ifndef FUSEFORGE_PROPERTY_SUITES
#error "FUSEFORGE_PROPERTY_SUITES must name the property suite binary"
#endif

using namespace fuseforge;
namespace wl = fuseforge::workloads;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Collects failed expectations; the first one becomes the detail.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failure_.empty()) failure_ = what;
    }
    bool ok() const { return failure_.empty(); }
    const std::string& failure() const { return failure_; }

private:
    std::string failure_;
};

std::string hex(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

bench::RunConfig config(const std::string& workload, std::int64_t agents, const std::string& mode) {
    bench::RunConfig cfg;
    cfg.workload.workload = workload;
    cfg.workload.agents = agents;
    cfg.workload.seed = 7;
    cfg.partitions = 10;
    cfg.mode = mode;
    cfg.repetitions = 1;
    return cfg;
}

Outcome cross_mode_equivalence() {
    const auto t0 = Clock::now();
    Checks c;
    struct Case {
        std::string workload;
        std::int64_t agents;
        double beta;
    };
    const std::vector<Case> cases = {{"gol", 400, 0}, {"epidemics-erm", 500, 0.3}, {"economics", 1001, 0},
                                     {"pagerank", 200, 0}};
    for (const auto& k : cases) {
        std::set<std::uint64_t> sums;
        std::uint64_t initial = 0;
        for (const auto& mode : mode_names()) {
            auto cfg = config(k.workload, k.agents, mode);
            if (k.beta > 0) cfg.workload.beta = k.beta;
            sums.insert(bench::run(cfg).checksum);
            if (mode == "unopt") {
                cfg.rounds = 0;
                initial = bench::run(cfg).checksum;
            }
        }
        c.expect(sums.size() == 1, k.workload + ": modes disagree on the checksum");
        c.expect(sums.count(initial) == 0, k.workload + ": final state equals the initial state");
    }

    // PageRank with fold-safe float sums: pushdown regroups additions.
    auto cfg = config("pagerank", 200, "unopt");
    cfg.workload.pagerankTolerance = true;
    const Graph g = wl::build_graph(cfg.workload);
    const Simulation sim = wl::build_simulation(cfg.workload, g);
    const auto parts = bench::make_partitions(g, cfg);
    const auto rounds = cfg.resolved_rounds();
    const auto ref = execute(optimize(sim, parts, mode_passes("unopt")), sim, rounds, 1, 7).state.values;
    double worst = 0;
    for (const auto& mode : mode_names()) {
        const auto got = execute(optimize(sim, parts, mode_passes(mode)), sim, rounds, 1, 7).state.values;
        for (std::size_t v = 0; v < ref.size(); ++v) {
            const double a = wl::pagerank_value(ref[v]), b = wl::pagerank_value(got[v]);
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
        }
    }
    c.expect(worst <= 1e-9, "pagerank tolerance mode: relative error " + std::to_string(worst));
    const double secs = seconds_since(t0);
    c.expect(secs < 30, "took " + std::to_string(secs) + " s");
    std::ostringstream d;
    d << "4 workloads x 7 modes identical; pagerank+pushdown max rel err " << worst << "; " << secs << " s";
    return {c.ok(), c.ok() ? d.str() : c.failure()};
}

Outcome oracle_agreement() {
    Checks c;
    pi::PiContext ctx;
    const auto t0 = Clock::now();
    const auto result = pi::reduce_all(pi::initial_state(fixtures::two_core_system(ctx), ctx), ctx, 1'000'000);
    const double secs = seconds_since(t0);
    c.expect(!result.nonTerminating && !result.irreducible.empty(), "two-core system did not settle");
    const pi::Name p5 = pi::state_name(fixtures::st(5), ctx.names), p6 = pi::state_name(fixtures::st(6), ctx.names);
    for (const auto& fin : result.irreducible) {
        c.expect(pi::observe(fin, p5, ctx) == std::optional<Value>(std::int64_t{12}), "p5 != 12 on some sequence");
        c.expect(pi::observe(fin, p6, ctx) == std::optional<Value>(std::int64_t{-10}), "p6 != -10 on some sequence");
    }
    c.expect(secs < 1.0, "exhaustive reduction took " + std::to_string(secs) + " s");

    const Simulation sim = simfix::two_core_simulation();
    for (const auto& mode : mode_names()) {
        const auto values = simfix::run_mode(sim, simfix::single_partition(2), mode, 2).state.values;
        c.expect(values == std::vector<Value>{Value{std::int64_t{12}}, Value{std::int64_t{-10}}},
                 "runtime disagrees with the oracle in mode " + mode);
    }

    pi::PiContext loopCtx;
    const auto loop =
        pi::reduce_all(pi::initial_state(fixtures::unsynchronized_system(loopCtx), loopCtx), loopCtx, 10'000);
    c.expect(loop.nonTerminating, "recursive composition without a scheduler was not flagged");
    std::ostringstream d;
    d << result.irreducible.size() << " final state(s), p5=12 p6=-10 in " << result.explored << " states (" << secs
      << " s); runtime agrees in 7 modes; unscheduled loop flagged at 10^4";
    return {c.ok(), c.ok() ? d.str() : c.failure()};
}

Outcome cell_trace() {
    Checks c;
    pi::PiContext ctx;
    auto s = pi::initial_state(fixtures::cell_system(ctx), ctx);
    const char* sent[] = {"5", "6", "6"};
    std::string trace;
    for (int step = 1; step <= 3; ++step) {
        auto next = pi::reduce_step(s, ctx);
        c.expect(next.size() == 1, "step " + std::to_string(step) + " is not deterministic");
        if (next.empty()) break;
        s = next.front();
        c.expect(s.trace.back().names == std::vector<std::string>{sent[step - 1]},
                 "step " + std::to_string(step) + " sent the wrong value");
        c.expect(pi::canonical_key(s.process, ctx.names) ==
                     pi::canonical_key(fixtures::cell_after(ctx, step), ctx.names),
                 "step " + std::to_string(step) + " does not match the expected process");
        trace += (trace.empty() ? "" : " -> ") + s.trace.back().to_string();
    }
    c.expect(pi::reduce_step(s, ctx).empty(), "residue is reducible");
    return {c.ok(), c.ok() ? "3 steps " + trace + ", residue == B" : c.failure()};
}

Outcome message_counts() {
    Checks c;
    const std::int64_t rounds = 5;
    auto cfg = config("epidemics-erm", 1000, "unopt");
    cfg.workload.edgeP = 0.01;
    const Graph g = wl::build_graph(cfg.workload);
    const auto parts = bench::make_partitions(g, cfg);
    std::vector<PartitionId> owner(g.vertex_count());
    for (const auto& p : parts) {
        for (AgentId v : p.members) owner[static_cast<std::size_t>(v)] = p.id;
    }
    std::uint64_t crossEdges = 0;
    std::set<std::pair<PartitionId, PartitionId>> pairs;
    for (std::size_t u = 0; u < g.vertex_count(); ++u) {
        for (AgentId v : g.neighbors(static_cast<AgentId>(u))) {
            if (owner[u] != owner[static_cast<std::size_t>(v)]) {
                ++crossEdges;
                pairs.emplace(owner[u], owner[static_cast<std::size_t>(v)]);
            }
        }
    }
    const Simulation sim = wl::build_simulation(cfg.workload, g);
    std::ostringstream d;
    for (const auto& mode : mode_names()) {
        const auto m = execute(optimize(sim, parts, mode_passes(mode)), sim, rounds, 1, 7).metrics;
        const bool cached = mode_passes(mode).has(Pass::Synthesize);
        const std::uint64_t expected = cached ? pairs.size() : crossEdges;
        for (auto w : m.wire) c.expect(w == expected, mode + ": wire messages per round " + std::to_string(w));
        if (mode == "unopt" || mode == "full") d << mode << " " << m.wire.front() << "/round, ";
    }
    c.expect(pairs.size() <= 90, "more than 90 partition pairs");

    auto econ = config("economics", 10001, "unopt");
    const Graph star = wl::build_graph(econ.workload);
    const auto econParts = bench::make_partitions(star, econ);
    const Simulation market = wl::build_simulation(econ.workload, star);
    std::set<PartitionId> trading;
    for (const auto& p : econParts) {
        for (AgentId v : p.members) {
            if (v != 0) trading.insert(p.id);
        }
    }
    const auto before = execute(optimize(market, econParts, mode_passes("full")), market, rounds, 1, 7).metrics;
    const auto after = execute(optimize(market, econParts, mode_passes("full+pushdown")), market, rounds, 1, 7).metrics;
    for (auto n : before.targetInbound) c.expect(n == 10000, "market inbound without pushdown " + std::to_string(n));
    for (auto n : after.targetInbound) {
        c.expect(n == trading.size() && n <= 10, "market inbound with pushdown " + std::to_string(n));
    }
    d << "cross edges " << crossEdges << ", partition pairs " << pairs.size() << "; market inbound "
      << before.targetInbound.front() << " -> " << after.targetInbound.front() << "/round";
    return {c.ok(), c.ok() ? d.str() : c.failure()};
}

Outcome performance() {
    auto cfg = config("gol", 10000, "unopt");
    cfg.rounds = 200;
    cfg.threads = 8;
    cfg.repetitions = 3;
    const auto slow = bench::run(cfg);
    cfg.mode = "full";
    const auto fast = bench::run(cfg);
    Checks c;
    c.expect(slow.checksum == fast.checksum, "full and unopt disagree");
    const double ratio = *slow.meanTimePerRoundMs / *fast.meanTimePerRoundMs;
    c.expect(ratio > 1.3, "speedup only " + std::to_string(ratio) + "x");
    std::ostringstream d;
    d << "unopt " << *slow.meanTimePerRoundMs << " ms/round, full " << *fast.meanTimePerRoundMs
      << " ms/round, speedup " << ratio << "x" << (ratio >= 2.0 ? "" : " (below the 2x expectation)");
    return {c.ok(), c.ok() ? d.str() : c.failure()};
}

Outcome property_suites() {
    const auto t0 = Clock::now();
    const std::string cmd = std::string("\"") + FUSEFORGE_PROPERTY_SUITES + "\" --minimal > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ostringstream d;
    d << "property_suites exit " << rc << " (" << seconds_since(t0) << " s)";
    return {rc == 0, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"cross-mode equivalence", cross_mode_equivalence},
        {"pi-calculus oracle agreement", oracle_agreement},
        {"memory cell trace", cell_trace},
        {"message-count reductions", message_counts},
        {"performance sanity", performance},
        {"property suites", property_suites},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
