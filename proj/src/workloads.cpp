#include "fuseforge/workloads.hpp"

#include <algorithm>
#include <cmath>

#include "fuseforge/errors.hpp"
#include "fuseforge/rng.hpp"

namespace fuseforge::workloads {

namespace {

constexpr std::uint64_t kGolInitStream = 0x676f6c;
constexpr std::uint64_t kEpidemicSeedStream = 0x657069;
constexpr std::uint64_t kEpidemicStepStream = 0x657073;
constexpr std::uint64_t kTraderInitStream = 0x747269;
constexpr std::uint64_t kTraderStepStream = 0x747273;

Value int_value(std::int64_t x) { return Value{x}; }

std::optional<Value> int_sum(std::span<const Value> ms, bool emptyIsZero) {
    if (ms.empty()) return emptyIsZero ? std::optional<Value>(int_value(0)) : std::nullopt;
    std::int64_t s = 0;
    for (const auto& m : ms) s += std::get<std::int64_t>(m);
    return int_value(s);
}

Value sample_small_int(SplitMix64& rng) { return int_value(static_cast<std::int64_t>(rng.below(7)) - 3); }

Simulation graph_simulation(const Graph& g, const std::vector<ComputeMethodId>& compute, std::vector<Value> initial) {
    Simulation sim;
    const std::size_t n = g.vertex_count();
    sim.equations.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        const StateRef self{static_cast<AgentId>(a), std::nullopt};
        auto& eq = sim.equations[a];
        eq.lhs = self;
        eq.rhs = self;
        eq.compute = compute[compute.size() == 1 ? 0 : a];
        eq.referenceSet.reserve(g.adjacency[a].size());
        for (AgentId v : g.adjacency[a]) eq.referenceSet.push_back(StateRef{v, std::nullopt});
    }
    sim.initial = std::move(initial);
    return sim;
}

} // namespace

ComputeMethodContract gol_contract() {
    ComputeMethodContract c;
    c.id = "gol";
    c.valueType = TypeTag::Bool;
    c.inMessageType = TypeTag::Int;
    c.outMessageType = TypeTag::Int;
    c.stateToMessage = [](const Value& s) -> std::optional<Value> { return int_value(std::get<bool>(s) ? 1 : 0); };
    c.partialCompute = [](std::span<const Value> ms) { return int_sum(ms, false); };
    c.updateState = [](const AgentContext&, const Value& s, const std::optional<Value>& folded) -> Value {
        if (!folded) return s;
        const std::int64_t n = std::get<std::int64_t>(*folded);
        if (n == 3) return true;
        if (n < 2 || n > 3) return false;
        return s;
    };
    c.flags = {true, true};
    c.sampleMessage = [](SplitMix64& rng) { return int_value(static_cast<std::int64_t>(rng.below(2))); };
    return c;
}

std::vector<bool> random_cells(std::size_t n, double density, std::uint64_t seed) {
    std::vector<bool> alive(n);
    for (std::size_t a = 0; a < n; ++a) {
        SplitMix64 rng(derive_seed(seed, {kGolInitStream, a}));
        alive[a] = rng.bernoulli(density);
    }
    return alive;
}

Simulation gol_simulation(const Graph& g, const std::vector<bool>& alive) {
    if (alive.size() != g.vertex_count()) throw ParameterError("one cell value per vertex required");
    std::vector<Value> initial(alive.begin(), alive.end());
    Simulation sim = graph_simulation(g, {"gol"}, std::move(initial));
    sim.contracts.add(gol_contract());
    return sim;
}

Value sir_state(Status s, std::int64_t infectedSince) {
    return Record{{static_cast<std::int64_t>(s), s == kInfected ? infectedSince : std::int64_t{-1}}};
}

Status sir_status(const Value& state) { return static_cast<Status>(field_int(as_record(state), 0)); }

ComputeMethodContract epidemics_contract(double beta, std::int64_t recoveryRounds) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
    if (recoveryRounds < 1) throw ParameterError("recovery rounds must be at least 1");
    ComputeMethodContract c;
    c.id = "sir";
    c.valueType = TypeTag::Record;
    c.inMessageType = TypeTag::Int;
    c.outMessageType = TypeTag::Int;
    c.stateToMessage = [](const Value& s) -> std::optional<Value> {
        return int_value(sir_status(s) == kInfected ? 1 : 0);
    };
    c.partialCompute = [](std::span<const Value> ms) { return int_sum(ms, true); };
    c.updateState = [beta, recoveryRounds](const AgentContext& ctx, const Value& s,
                                           const std::optional<Value>& folded) -> Value {
        const auto& r = as_record(s);
        switch (static_cast<Status>(field_int(r, 0))) {
            case kSusceptible: {
                const std::int64_t k = folded ? std::get<std::int64_t>(*folded) : 0;
                if (k <= 0) return s;
                const double p = 1.0 - std::pow(1.0 - beta, static_cast<double>(k));
                SplitMix64 rng(derive_seed(ctx.seed, {kEpidemicStepStream, static_cast<std::uint64_t>(ctx.agent),
                                                      static_cast<std::uint64_t>(ctx.superstep)}));
                return rng.uniform01() < p ? sir_state(kInfected, ctx.superstep) : s;
            }
            case kInfected:
                return ctx.superstep - field_int(r, 1) >= recoveryRounds ? sir_state(kRecovered) : s;
            case kRecovered:
                return s;
        }
        throw ContractError("unknown epidemic status " + std::to_string(field_int(r, 0)));
    };
    c.flags = {true, true};
    c.sampleMessage = [](SplitMix64& rng) { return int_value(static_cast<std::int64_t>(rng.below(5))); };
    return c;
}

Simulation epidemics_simulation(const Graph& g, double beta, std::int64_t recoveryRounds, std::uint64_t seed) {
    const std::size_t n = g.vertex_count();
    if (n == 0) throw ParameterError("epidemics needs at least one agent");
    std::vector<Value> initial(n, sir_state(kSusceptible));
    SplitMix64 rng(derive_seed(seed, {kEpidemicSeedStream}));
    initial[rng.below(n)] = sir_state(kInfected, 0);
    Simulation sim = graph_simulation(g, {"sir"}, std::move(initial));
    sim.contracts.add(epidemics_contract(beta, recoveryRounds));
    return sim;
}

ComputeMethodContract trader_contract(const EconomicsParams& p) {
    if (p.window < 1) throw ParameterError("moving-average window must be at least 1");
    if (!(p.jitter >= 0.0 && p.jitter <= 1.0)) throw ParameterError("jitter must lie in [0, 1]");
    ComputeMethodContract c;
    c.id = "trader";
    c.valueType = TypeTag::Record;
    c.inMessageType = TypeTag::Int;
    c.outMessageType = TypeTag::Int;
    c.stateToMessage = [](const Value& s) -> std::optional<Value> {
        return int_value(field_int(as_record(s), 0));
    };
    // Traders only hear the market's price.
    c.partialCompute = [](std::span<const Value> ms) -> std::optional<Value> {
        if (ms.empty()) return std::nullopt;
        return ms.front();
    };
    const std::int64_t window = p.window;
    const double jitter = p.jitter;
    c.updateState = [window, jitter](const AgentContext& ctx, const Value& s,
                                     const std::optional<Value>& folded) -> Value {
        Record r = as_record(s);
        if (!folded) {
            r.fields[0] = std::int64_t{0};
            return r;
        }
        const std::int64_t price = std::get<std::int64_t>(*folded);
        const std::int64_t seen = field_int(r, 3);
        r.fields[kTraderWindowStart + static_cast<std::size_t>(seen % window)] = price;
        r.fields[3] = seen + 1;
        const std::int64_t count = std::min(seen + 1, window);
        std::int64_t sum = 0;
        for (std::int64_t k = 0; k < count; ++k) sum += field_int(r, kTraderWindowStart + static_cast<std::size_t>(k));
        std::int64_t action = price * count < sum ? 1 : (price * count > sum ? -1 : 0);
        SplitMix64 rng(derive_seed(ctx.seed, {kTraderStepStream, static_cast<std::uint64_t>(ctx.agent),
                                              static_cast<std::uint64_t>(ctx.superstep)}));
        if (rng.bernoulli(jitter)) action = action == 0 ? (rng.below(2) ? 1 : -1) : -action;
        r.fields[0] = action;
        r.fields[1] = field_int(r, 1) - action * price;
        r.fields[2] = field_int(r, 2) + action;
        return r;
    };
    return c;
}

ComputeMethodContract market_contract() {
    ComputeMethodContract c;
    c.id = "market";
    c.valueType = TypeTag::Record;
    c.inMessageType = TypeTag::Int;
    c.outMessageType = TypeTag::Int;
    c.stateToMessage = [](const Value& s) -> std::optional<Value> { return int_value(field_int(as_record(s), 0)); };
    c.partialCompute = [](std::span<const Value> ms) { return int_sum(ms, false); };
    c.updateState = [](const AgentContext&, const Value& s, const std::optional<Value>& folded) -> Value {
        const std::int64_t sum = folded ? std::get<std::int64_t>(*folded) : 0;
        const std::int64_t price = std::max<std::int64_t>(1, field_int(as_record(s), 0) + sum);
        return Record{{price, sum}};
    };
    c.flags = {true, true};
    c.sampleMessage = sample_small_int;
    return c;
}

std::int64_t market_price(const Value& state) { return field_int(as_record(state), 0); }

Simulation economics_simulation(const Graph& g, const EconomicsParams& p, std::uint64_t seed) {
    const std::size_t n = g.vertex_count();
    if (n < 2) throw ParameterError("economics needs a market and at least one trader");
    if (p.initialPrice < 1) throw ParameterError("initial price must be positive");
    std::vector<Value> initial(n);
    initial[0] = Record{{p.initialPrice, std::int64_t{0}}};
    for (std::size_t a = 1; a < n; ++a) {
        SplitMix64 rng(derive_seed(seed, {kTraderInitStream, a}));
        Record r;
        r.fields.assign(kTraderWindowStart + static_cast<std::size_t>(p.window), std::int64_t{0});
        r.fields[0] = static_cast<std::int64_t>(rng.below(3)) - 1;
        initial[a] = std::move(r);
    }
    std::vector<ComputeMethodId> compute(n, "trader");
    compute[0] = "market";
    Simulation sim = graph_simulation(g, compute, std::move(initial));
    sim.contracts.add(trader_contract(p));
    sim.contracts.add(market_contract());
    sim.pushdownTargets = {0};
    sim.watch = 0;
    return sim;
}

ComputeMethodContract pagerank_contract(std::int64_t maxIteration, bool tolerance) {
    ComputeMethodContract c;
    c.id = tolerance ? "pagerank-tolerant" : "pagerank";
    c.valueType = TypeTag::Record;
    c.inMessageType = TypeTag::Float;
    c.outMessageType = TypeTag::Float;
    c.stateToMessage = [](const Value& s) -> std::optional<Value> {
        const auto& r = as_record(s);
        const double delta = field_float(r, 1);
        if (!(delta > 0)) return std::nullopt;
        return Value{0.85 * delta / static_cast<double>(field_int(r, 2))};
    };
    c.partialCompute = [](std::span<const Value> ms) -> std::optional<Value> {
        if (ms.empty()) return std::nullopt;
        double s = 0;
        for (const auto& m : ms) s += std::get<double>(m);
        return Value{s};
    };
    c.updateState = [maxIteration](const AgentContext& ctx, const Value& s,
                                   const std::optional<Value>& folded) -> Value {
        const auto& r = as_record(s);
        const std::int64_t outDegree = field_int(r, 2);
        if (ctx.superstep >= maxIteration) return Record{{field_float(r, 0), 0.0, outDegree}};
        double delta = ctx.superstep == 0 ? 0.15 : 0.0;
        if (folded) delta += std::get<double>(*folded);
        const double pr = (ctx.superstep == 0 ? 0.0 : field_float(r, 0)) + delta;
        return Record{{pr, delta, outDegree}};
    };
    if (tolerance) {
        c.flags = {true, true};
        c.sampleMessage = [](SplitMix64& rng) { return Value{rng.uniform01()}; };
    }
    return c;
}

Simulation pagerank_simulation(const Graph& g, std::int64_t maxIteration, bool tolerance) {
    const std::size_t n = g.vertex_count();
    std::vector<Value> initial(n);
    for (std::size_t a = 0; a < n; ++a) {
        const auto degree = static_cast<std::int64_t>(g.adjacency[a].size());
        if (degree == 0) throw ParameterError("pagerank: vertex " + std::to_string(a) + " has no out-edges");
        initial[a] = Record{{0.0, 0.0, degree}};
    }
    const auto c = pagerank_contract(maxIteration, tolerance);
    Simulation sim = graph_simulation(g, {c.id}, std::move(initial));
    sim.contracts.add(c, tolerance ? 1e-9 : 0.0);
    if (tolerance) {
        for (std::size_t a = 0; a < n; ++a) sim.pushdownTargets.push_back(static_cast<AgentId>(a));
    }
    return sim;
}

double pagerank_value(const Value& state) { return field_float(as_record(state), 0); }
double pagerank_delta(const Value& state) { return field_float(as_record(state), 1); }

const std::vector<std::string>& workload_names() {
    static const std::vector<std::string> names = {"gol", "epidemics-erm", "epidemics-sbm", "economics", "pagerank"};
    return names;
}

void check_workload(const std::string& name) {
    const auto& names = workload_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) return;
    std::string valid;
    for (const auto& w : names) valid += (valid.empty() ? "" : ", ") + w;
    throw UsageError("unknown workload '" + name + "'; valid workloads: " + valid);
}

std::pair<std::int64_t, std::int64_t> torus_shape(std::int64_t n) {
    std::int64_t width = 1;
    for (std::int64_t w = 1; w * w <= n; ++w) {
        if (n % w == 0) width = w;
    }
    if (width < 3) throw ParameterError(std::to_string(n) + " agents do not form a torus of at least 3x3");
    return {width, n / width};
}

Graph build_graph(const WorkloadConfig& cfg) {
    check_workload(cfg.workload);
    if (cfg.workload == "gol") {
        auto [w, h] = torus_shape(cfg.agents);
        return torus2d(w, h);
    }
    if (cfg.workload == "epidemics-erm") return erm(cfg.agents, cfg.edgeP, cfg.seed);
    if (cfg.workload == "epidemics-sbm") return sbm(cfg.agents, cfg.blocks, cfg.pIn, cfg.pOut, cfg.seed);
    if (cfg.workload == "economics") return star(cfg.agents);
    return erm(cfg.agents, cfg.pagerankP, cfg.seed);
}

Simulation build_simulation(const WorkloadConfig& cfg, const Graph& g) {
    check_workload(cfg.workload);
    if (cfg.workload == "gol") return gol_simulation(g, random_cells(g.vertex_count(), cfg.density, cfg.seed));
    if (cfg.workload == "economics") return economics_simulation(g, cfg.economics, cfg.seed);
    if (cfg.workload == "pagerank") return pagerank_simulation(g, cfg.maxIteration, cfg.pagerankTolerance);
    return epidemics_simulation(g, cfg.beta, cfg.recoveryRounds, cfg.seed);
}

std::int64_t default_rounds(const std::string& workload) {
    check_workload(workload);
    if (workload == "gol" || workload == "economics") return 200;
    if (workload == "pagerank") return 30;
    return 50;
}

} // namespace fuseforge::workloads
