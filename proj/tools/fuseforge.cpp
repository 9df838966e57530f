#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fuseforge/bench.hpp"
#include "fuseforge/errors.hpp"
#include "fuseforge/pi/semantics.hpp"
#include "fuseforge/pi/sexpr.hpp"

namespace ff = fuseforge;
namespace bench = fuseforge::bench;

namespace {

constexpr const char* kOutDirEnv = "FUSEFORGE_OUT_DIR";

const std::map<std::string, std::string>& setting_help() {
    static const std::map<std::string, std::string> help = {
        {"workload", "gol, epidemics-erm, epidemics-sbm, economics or pagerank"},
        {"agents", "number of agents (gol needs a w x h torus with w, h >= 3)"},
        {"seed", "seed for graphs, partitioning and stochastic rules"},
        {"partitions", "requested number of partitions"},
        {"partitioner", "random, hash-div, hash-mod or greedy (default)"},
        {"mode", "unopt, merge, merge+cache, +local, +remote, full, full+pushdown"},
        {"rounds", "supersteps per execution (default depends on the workload)"},
        {"threads", "worker threads inside the executor"},
        {"repetitions", "timed executions averaged per row (default 3)"},
        {"density", "gol: initial fraction of live cells"},
        {"beta", "epidemics: per-contact infection probability"},
        {"recovery", "epidemics: supersteps until an infected agent recovers"},
        {"edge-p", "epidemics-erm: edge probability"},
        {"blocks", "epidemics-sbm: number of blocks"},
        {"p-in", "epidemics-sbm: edge probability inside a block"},
        {"p-out", "epidemics-sbm: edge probability across blocks"},
        {"initial-price", "economics: starting market price"},
        {"window", "economics: moving-average window of each trader"},
        {"jitter", "economics: probability a trader flips its action"},
        {"pagerank-p", "pagerank: edge probability of the random graph"},
        {"max-iteration", "pagerank: superstep after which vertices stop sending"},
        {"pagerank-tolerance", "pagerank: allow regrouped float sums (enables pushdown)"},
        {"save-graph", "write the generated graph as an edge list"},
        {"load-graph", "read the graph from an edge list instead of generating it"},
    };
    return help;
}

// Flags shared by `run` and `sweep`. Values are applied after the config
// file so that flags override it.
struct SettingFlags {
    std::string configFile;
    std::map<std::string, std::string> values;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", configFile, "key=value settings file")->check(CLI::ExistingFile);
        for (const auto& key : bench::setting_keys()) {
            cmd->add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { values[key] = v; }, setting_help().at(key));
        }
    }

    bench::RunConfig resolve() const {
        bench::RunConfig cfg;
        if (!configFile.empty()) bench::load_config_file(cfg, configFile);
        for (const auto& [k, v] : values) bench::apply_setting(cfg, k, v);
        return cfg;
    }
};

std::string output_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    const char* dir = std::getenv(kOutDirEnv);
    std::filesystem::path base = (dir != nullptr && *dir != '\0') ? dir : ".";
    return (base / "results.csv").string();
}

void emit(const std::vector<bench::MetricsRow>& rows, const std::string& out, bool quiet) {
    const std::string path = output_path(out);
    if (auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    bench::append_csv(path, rows);
    if (quiet) return;
    std::cout << bench::csv_header() << '\n';
    for (const auto& r : rows) std::cout << bench::csv_row(r) << '\n';
}

void warn_if_not_monotone(const std::vector<bench::MetricsRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1].meanTimePerRoundMs;
        const auto& b = rows[i].meanTimePerRoundMs;
        if (a && b && *b > *a) {
            std::cerr << "warning: mean time per round rose from " << *a << " ms at " << rows[i - 1].config.threads
                      << " threads to " << *b << " ms at " << rows[i].config.threads << " threads\n";
        }
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int oracle_reduce(const std::string& file, std::size_t maxSteps, std::size_t nodeLimit) {
    std::string text;
    if (file.empty() || file == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream in(file);
        if (!in) throw ff::IoError("cannot open " + file);
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    ff::pi::PiContext ctx;
    ff::pi::register_builtins(ctx);
    const ff::pi::Process p = ff::pi::parse_program(text, ctx);
    const ff::pi::ReductionState start = ff::pi::initial_state(p, ctx);

    ff::pi::ReductionResult result;
    bool exhausted = false;
    try {
        result = ff::pi::reduce_all(start, ctx, maxSteps, nodeLimit);
    } catch (const ff::pi::ResourceLimitError& e) {
        result = e.partial;
        exhausted = true;
        std::cerr << "warning: " << e.what() << '\n';
    }
    for (const auto& s : result.irreducible) {
        std::cout << ff::pi::to_sexpr(s.process, ctx.names) << " | " << ff::pi::env_to_string(s, ctx.names)
                  << " | steps=" << s.stepCount << '\n';
    }
    if (result.nonTerminating) {
        std::cout << "non-terminating: a reduction sequence exceeded " << maxSteps << " steps\n";
    }
    std::cerr << result.irreducible.size() << " irreducible state(s), " << result.explored << " explored\n";
    return exhausted ? 3 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuseforge: optimize and run partitioned agent simulations"};
    app.require_subcommand(1);

    SettingFlags runFlags;
    std::string runOut;
    bool runQuiet = false;
    auto* runCmd = app.add_subcommand("run", "build, partition, optimize and execute one configuration");
    runFlags.attach(runCmd);
    runCmd->add_option("-o,--out", runOut, std::string("CSV file to append to (default $") + kOutDirEnv + "/results.csv)");
    runCmd->add_flag("-q,--quiet", runQuiet, "do not echo the row");

    SettingFlags sweepFlags;
    std::string sweepOut;
    std::string axis;
    std::string values;
    bool sweepQuiet = false;
    auto* sweepCmd = app.add_subcommand("sweep", "run one configuration per value of an axis");
    sweepFlags.attach(sweepCmd);
    sweepCmd->add_option("--axis", axis, "agents, threads, partitions or mode")->required();
    sweepCmd->add_option("--values", values, "comma-separated axis values")->required();
    sweepCmd->add_option("-o,--out", sweepOut, "CSV file to append to");
    sweepCmd->add_flag("-q,--quiet", sweepQuiet, "do not echo the rows");

    auto* oracleCmd = app.add_subcommand("oracle", "pi-calculus reference semantics");
    oracleCmd->require_subcommand(1);
    std::string oracleFile;
    std::size_t maxSteps = 10000;
    std::size_t nodeLimit = ff::pi::kDefaultNodeLimit;
    auto* reduceCmd = oracleCmd->add_subcommand("reduce", "print every irreducible state of a process");
    reduceCmd->add_option("file", oracleFile, "program file (stdin when absent or '-')");
    reduceCmd->add_option("--max-steps", maxSteps, "step bound per reduction sequence");
    reduceCmd->add_option("--node-limit", nodeLimit, "bound on explored states");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*runCmd) {
            emit({bench::run(runFlags.resolve())}, runOut, runQuiet);
        } else if (*sweepCmd) {
            const auto rows = bench::sweep(sweepFlags.resolve(), axis, split_list(values));
            if (axis == "threads") warn_if_not_monotone(rows);
            emit(rows, sweepOut, sweepQuiet);
        } else if (*reduceCmd) {
            return oracle_reduce(oracleFile, maxSteps, nodeLimit);
        }
    } catch (const ff::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
