#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fuseforge/bench.hpp"
#include "fuseforge/errors.hpp"
#include "fuseforge/graph.hpp"
#include "fuseforge/optimizer.hpp"
#include "fuseforge/partition.hpp"
#include "fuseforge/pi/semantics.hpp"
#include "fuseforge/pi/sexpr.hpp"
#include "fuseforge/runtime.hpp"
#include "fuseforge/workloads.hpp"

namespace py = pybind11;
using namespace fuseforge;

namespace {

py::object scalar_to_py(const Scalar& s) {
    return std::visit([](auto x) -> py::object { return py::cast(x); }, s);
}

py::object value_to_py(const Value& v) {
    if (const auto* r = std::get_if<Record>(&v)) {
        py::tuple t(r->fields.size());
        for (std::size_t i = 0; i < r->fields.size(); ++i) t[i] = scalar_to_py(r->fields[i]);
        return t;
    }
    return std::visit(
        [](const auto& x) -> py::object {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Record>) {
                return py::none();
            } else {
                return py::cast(x);
            }
        },
        v);
}

bench::RunConfig config_from(const py::dict& settings) {
    bench::RunConfig cfg;
    for (const auto& [k, v] : settings) {
        std::string key = py::str(k);
        for (auto& c : key) {
            if (c == '_') c = '-';
        }
        std::string value;
        if (py::isinstance<py::bool_>(v)) {
            value = v.cast<bool>() ? "true" : "false";
        } else {
            value = py::str(v);
        }
        bench::apply_setting(cfg, key, value);
    }
    return cfg;
}

py::dict row_to_dict(const bench::MetricsRow& row) {
    py::dict d;
    d["workload"] = row.config.workload.workload;
    d["agents"] = row.agents;
    d["partitions"] = row.partitions;
    d["partitioner"] = row.config.partitioner;
    d["mode"] = row.config.mode;
    d["rounds"] = row.rounds;
    d["threads"] = row.config.threads;
    d["seed"] = row.config.workload.seed;
    d["mean_time_per_round_ms"] = row.meanTimePerRoundMs ? py::cast(*row.meanTimePerRoundMs) : py::none();
    d["total_rounds"] = row.totalRounds;
    d["logical_messages"] = row.logicalMessages;
    d["wire_messages"] = row.wireMessages;
    d["wire_bytes"] = row.wireBytes;
    d["target_inbound"] = row.targetInbound;
    py::dict passes;
    for (std::size_t i = 0; i < kPassCount; ++i) passes[pass_name(static_cast<Pass>(i))] = row.passMs[i];
    d["pass_ms"] = passes;
    d["optimizer_time_ms"] = row.optimizerTimeMs;
    d["graph_build_time_ms"] = row.graphBuildTimeMs;
    d["checksum"] = row.checksum;
    d["csv"] = bench::csv_row(row);
    return d;
}

std::vector<py::object> simulate(const py::dict& settings) {
    bench::RunConfig cfg = config_from(settings);
    bench::validate(cfg);
    const Graph g = cfg.loadGraph.empty() ? workloads::build_graph(cfg.workload) : load_edge_list(cfg.loadGraph);
    const Simulation sim = workloads::build_simulation(cfg.workload, g);
    const auto parts = bench::make_partitions(g, cfg);
    const auto program = optimize(sim, parts, mode_passes(cfg.mode));
    const auto result = execute(program, sim, cfg.resolved_rounds(), cfg.threads, cfg.workload.seed);
    std::vector<py::object> out;
    out.reserve(result.state.values.size());
    for (const auto& v : result.state.values) out.push_back(value_to_py(v));
    return out;
}

py::dict oracle_reduce(const std::string& program, std::size_t maxSteps, std::size_t nodeLimit) {
    pi::PiContext ctx;
    pi::register_builtins(ctx);
    const auto p = pi::parse_program(program, ctx);
    const auto result = pi::reduce_all(pi::initial_state(p, ctx), ctx, maxSteps, nodeLimit);
    py::list states;
    for (const auto& s : result.irreducible) {
        py::dict env;
        for (const auto& [name, value] : s.valueEnv) env[py::str(ctx.names.text(name))] = value_to_py(value);
        py::dict st;
        st["process"] = pi::to_sexpr(s.process, ctx.names);
        st["env"] = env;
        st["steps"] = s.stepCount;
        states.append(st);
    }
    py::dict d;
    d["irreducible"] = states;
    d["non_terminating"] = result.nonTerminating;
    d["explored"] = result.explored;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Partitioned agent simulation with compile-time message optimizations";

    // pybind11 tries translators newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("vertex_count", &Graph::vertex_count)
        .def_property_readonly("edge_count", &Graph::edge_count)
        .def("neighbors", [](const Graph& g, AgentId v) {
            if (v < 0 || static_cast<std::size_t>(v) >= g.vertex_count()) throw py::index_error("no such vertex");
            const auto n = g.neighbors(v);
            return std::vector<AgentId>(n.begin(), n.end());
        })
        .def("save", [](const Graph& g, const std::string& path) { save_edge_list(g, path); })
        .def("__len__", &Graph::vertex_count)
        .def("__repr__", [](const Graph& g) {
            return "<Graph vertices=" + std::to_string(g.vertex_count()) + " edges=" + std::to_string(g.edge_count()) +
                   ">";
        });

    m.def("torus2d", &torus2d, py::arg("width"), py::arg("height"));
    m.def("erm", &erm, py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("sbm", &sbm, py::arg("n"), py::arg("blocks"), py::arg("p_in"), py::arg("p_out"), py::arg("seed"));
    m.def("star", &star, py::arg("n"));
    m.def("load_graph", &load_edge_list, py::arg("path"));

    m.def(
        "partition",
        [](const Graph& g, std::int64_t parts, const std::string& partitioner, std::uint64_t seed) {
            bench::RunConfig cfg;
            cfg.partitions = parts;
            cfg.partitioner = partitioner;
            cfg.workload.seed = seed;
            cfg.workload.agents = static_cast<std::int64_t>(g.vertex_count());
            bench::validate(cfg);
            std::vector<std::vector<AgentId>> out;
            for (const auto& p : bench::make_partitions(g, cfg)) out.push_back(p.members);
            return out;
        },
        py::arg("graph"), py::arg("partitions"), py::arg("partitioner") = "greedy", py::arg("seed") = 1,
        "Member lists, one per partition.");

    m.def("mode_names", &mode_names);
    m.def("workload_names", &workloads::workload_names);
    m.def("setting_keys", &bench::setting_keys);

    m.def(
        "run", [](const py::kwargs& kw) { return row_to_dict(bench::run(config_from(kw))); },
        "Run one configuration; keyword names match the CLI settings with '_' for '-'.");
    m.def(
        "simulate", [](const py::kwargs& kw) { return simulate(kw); },
        "Execute one configuration once and return the final agent values.");
    m.def(
        "oracle_reduce", &oracle_reduce, py::arg("program"), py::arg("max_steps") = 10000,
        py::arg("node_limit") = pi::kDefaultNodeLimit, "Every irreducible state of a pi-calculus program.");
}
