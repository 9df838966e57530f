#include "fuseforge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "fuseforge/errors.hpp"
#include "fuseforge/runtime.hpp"

namespace fuseforge::bench {

namespace {

std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError(key + ": expected an integer, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError(key + ": expected a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw UsageError(key + ": expected true or false, got '" + v + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") + 1 - b);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"workload", [](RunConfig& c, auto&, auto& v) { c.workload.workload = v; }},
        {"agents", [](RunConfig& c, auto& k, auto& v) { c.workload.agents = parse_int(k, v); }},
        {"seed", [](RunConfig& c, auto& k, auto& v) { c.workload.seed = static_cast<std::uint64_t>(parse_int(k, v)); }},
        {"partitions", [](RunConfig& c, auto& k, auto& v) { c.partitions = parse_int(k, v); }},
        {"partitioner", [](RunConfig& c, auto&, auto& v) { c.partitioner = v; }},
        {"mode", [](RunConfig& c, auto&, auto& v) { c.mode = v; }},
        {"rounds", [](RunConfig& c, auto& k, auto& v) { c.rounds = parse_int(k, v); }},
        {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_int(k, v)); }},
        {"repetitions", [](RunConfig& c, auto& k, auto& v) { c.repetitions = static_cast<int>(parse_int(k, v)); }},
        {"density", [](RunConfig& c, auto& k, auto& v) { c.workload.density = parse_double(k, v); }},
        {"beta", [](RunConfig& c, auto& k, auto& v) { c.workload.beta = parse_double(k, v); }},
        {"recovery", [](RunConfig& c, auto& k, auto& v) { c.workload.recoveryRounds = parse_int(k, v); }},
        {"edge-p", [](RunConfig& c, auto& k, auto& v) { c.workload.edgeP = parse_double(k, v); }},
        {"blocks", [](RunConfig& c, auto& k, auto& v) { c.workload.blocks = parse_int(k, v); }},
        {"p-in", [](RunConfig& c, auto& k, auto& v) { c.workload.pIn = parse_double(k, v); }},
        {"p-out", [](RunConfig& c, auto& k, auto& v) { c.workload.pOut = parse_double(k, v); }},
        {"initial-price", [](RunConfig& c, auto& k, auto& v) { c.workload.economics.initialPrice = parse_int(k, v); }},
        {"window", [](RunConfig& c, auto& k, auto& v) { c.workload.economics.window = parse_int(k, v); }},
        {"jitter", [](RunConfig& c, auto& k, auto& v) { c.workload.economics.jitter = parse_double(k, v); }},
        {"pagerank-p", [](RunConfig& c, auto& k, auto& v) { c.workload.pagerankP = parse_double(k, v); }},
        {"max-iteration", [](RunConfig& c, auto& k, auto& v) { c.workload.maxIteration = parse_int(k, v); }},
        {"pagerank-tolerance",
         [](RunConfig& c, auto& k, auto& v) { c.workload.pagerankTolerance = parse_bool(k, v); }},
        {"save-graph", [](RunConfig& c, auto&, auto& v) { c.saveGraph = v; }},
        {"load-graph", [](RunConfig& c, auto&, auto& v) { c.loadGraph = v; }},
    };
    return table;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

std::int64_t RunConfig::resolved_rounds() const {
    return rounds ? *rounds : workloads::default_rounds(workload.workload);
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = setters().find(key);
    if (it == setters().end()) {
        std::string known;
        for (const auto& k : setting_keys()) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("unknown setting '" + key + "'; known settings: " + known);
    }
    it->second(cfg, key, value);
}

const std::vector<std::string>& setting_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, fn] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    for (int lineNo = 1; std::getline(in, line); ++lineNo) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineNo) + ": expected key = value");
        }
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void validate(const RunConfig& cfg) {
    workloads::check_workload(cfg.workload.workload);
    check_pass_dependencies(mode_passes(cfg.mode));
    static const std::vector<std::string> partitioners = {"random", "hash-div", "hash-mod", "greedy"};
    if (std::find(partitioners.begin(), partitioners.end(), cfg.partitioner) == partitioners.end()) {
        throw UsageError("unknown partitioner '" + cfg.partitioner + "'; valid partitioners: random, hash-div, "
                         "hash-mod, greedy");
    }
    if (cfg.partitions < 1) throw UsageError("partitions must be at least 1");
    if (cfg.threads < 1) throw UsageError("threads must be at least 1");
    if (cfg.repetitions < 1) throw UsageError("repetitions must be at least 1");
    if (cfg.rounds && *cfg.rounds < 0) throw UsageError("rounds must be non-negative");
    if (cfg.loadGraph.empty() && cfg.workload.agents < 1) throw UsageError("agents must be at least 1");
}

std::vector<Partition> make_partitions(const Graph& g, const RunConfig& cfg) {
    const auto n = static_cast<std::int64_t>(g.vertex_count());
    const std::int64_t target = std::max<std::int64_t>(1, (n + cfg.partitions - 1) / cfg.partitions);
    if (cfg.partitioner == "random") return partition_random(g, target, cfg.workload.seed);
    if (cfg.partitioner == "hash-div") return partition_hash(g, target, HashMode::Div);
    if (cfg.partitioner == "hash-mod") return partition_hash(g, target, HashMode::Mod);
    return partition_greedy(g, target, cfg.workload.seed);
}

MetricsRow run(const RunConfig& cfg) {
    validate(cfg);
    MetricsRow row;
    row.config = cfg;

    const auto t0 = Clock::now();
    Graph g = cfg.loadGraph.empty() ? workloads::build_graph(cfg.workload) : load_edge_list(cfg.loadGraph);
    row.graphBuildTimeMs = ms_since(t0);
    if (!cfg.saveGraph.empty()) save_edge_list(g, cfg.saveGraph);

    const Simulation sim = workloads::build_simulation(cfg.workload, g);
    const auto parts = make_partitions(g, cfg);
    const OptimizedProgram program = optimize(sim, parts, mode_passes(cfg.mode));

    row.agents = static_cast<std::int64_t>(g.vertex_count());
    row.partitions = static_cast<std::int64_t>(parts.size());
    row.rounds = cfg.resolved_rounds();
    row.totalRounds = row.rounds * cfg.repetitions;
    row.passMs = program.passMs;
    row.optimizerTimeMs = program.total_ms();

    Executor ex(program, sim, cfg.threads);
    double timeSum = 0;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const ExecutionResult r = ex.run(row.rounds, cfg.workload.seed);
        const std::uint64_t sum = checksum(r.state.values);
        if (rep > 0 && sum != row.checksum) throw Error("repetitions of the same run disagree on the final state");
        row.checksum = sum;
        timeSum += r.metrics.mean_round_ms();
        row.logicalMessages = Metrics::total(r.metrics.logical);
        row.wireMessages = Metrics::total(r.metrics.wire);
        row.wireBytes = Metrics::total(r.metrics.wireBytes);
        row.targetInbound = Metrics::total(r.metrics.targetInbound);
    }
    if (row.rounds > 0) row.meanTimePerRoundMs = timeSum / cfg.repetitions;
    return row;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "workload",         "agents",          "partitions",       "partitioner",       "mode",
        "rounds",           "threads",         "seed",             "meanTimePerRoundMs", "totalRounds",
        "logicalMessages",  "wireMessages",    "wireBytes",        "targetInbound",     "optRefineMs",
        "optPushdownMs",    "optSynthesizeMs", "optRewriteRemoteMs", "optRewriteLocalMs", "optMergeMs",
        "optimizerTimeMs",  "graphBuildTimeMs", "checksum"};
    return cols;
}

std::string csv_header() {
    std::string s;
    for (const auto& c : csv_columns()) s += (s.empty() ? "" : ",") + c;
    return s;
}

std::string csv_row(const MetricsRow& r) {
    auto pass = [&](Pass p) { return fmt_double(r.passMs[static_cast<std::size_t>(p)]); };
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016" PRIx64, r.checksum);
    const std::vector<std::string> fields = {
        r.config.workload.workload,
        std::to_string(r.agents),
        std::to_string(r.partitions),
        r.config.partitioner,
        r.config.mode,
        std::to_string(r.rounds),
        std::to_string(r.config.threads),
        std::to_string(r.config.workload.seed),
        r.meanTimePerRoundMs ? fmt_double(*r.meanTimePerRoundMs) : "",
        std::to_string(r.totalRounds),
        std::to_string(r.logicalMessages),
        std::to_string(r.wireMessages),
        std::to_string(r.wireBytes),
        std::to_string(r.targetInbound),
        pass(Pass::Refine),
        pass(Pass::Pushdown),
        pass(Pass::Synthesize),
        pass(Pass::RewriteRemote),
        pass(Pass::RewriteLocal),
        pass(Pass::Merge),
        fmt_double(r.optimizerTimeMs),
        fmt_double(r.graphBuildTimeMs),
        sum,
    };
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) s += (i ? "," : "") + fields[i];
    return s;
}

void append_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::string text;
    if (fresh) text += csv_header() + "\n";
    for (const auto& r : rows) text += csv_row(r) + "\n";
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (f == nullptr) throw IoError("cannot open " + path + " for appending");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw IoError("write to " + path + " failed");
}

std::vector<MetricsRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<std::string>& values) {
    static const std::vector<std::string> axes = {"agents", "threads", "partitions", "mode"};
    if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
        throw UsageError("unknown sweep axis '" + axis + "'; valid axes: agents, threads, partitions, mode");
    }
    if (values.empty()) throw UsageError("sweep needs at least one value");
    std::vector<RunConfig> configs;
    for (const auto& v : values) {
        RunConfig cfg = base;
        apply_setting(cfg, axis, v);
        validate(cfg);
        configs.push_back(std::move(cfg));
    }
    std::vector<MetricsRow> rows;
    for (const auto& cfg : configs) rows.push_back(run(cfg));
    return rows;
}

} // namespace fuseforge::bench
