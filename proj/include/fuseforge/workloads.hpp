#pragma once

#include <string>
#include <vector>

#include "fuseforge/graph.hpp"
#include "fuseforge/simulation.hpp"

namespace fuseforge::workloads {

// Game of Life: bool state, neighbours send 1 when alive, sum of messages
// decides birth and death.
ComputeMethodContract gol_contract();
Simulation gol_simulation(const Graph& g, const std::vector<bool>& alive);
std::vector<bool> random_cells(std::size_t n, double density, std::uint64_t seed);

// SIR epidemics. State is Record{status, infectedSince} with infectedSince
// -1 unless infected.
enum Status : std::int64_t { kSusceptible = 0, kInfected = 1, kRecovered = 2 };
Value sir_state(Status s, std::int64_t infectedSince = -1);
Status sir_status(const Value& state);
ComputeMethodContract epidemics_contract(double beta, std::int64_t recoveryRounds);
// One agent, chosen from the seed, starts infected.
Simulation epidemics_simulation(const Graph& g, double beta, std::int64_t recoveryRounds, std::uint64_t seed);

// Economics on a star: agent 0 is the market, everyone else trades.
struct EconomicsParams {
    std::int64_t initialPrice = 10000;  // cents
    std::int64_t window = 10;
    double jitter = 0.05;
};
// Trader state: Record{lastAction, cash, holdings, seen, w_0 .. w_{window-1}}.
// Market state: Record{price, actionSum}.
inline constexpr std::size_t kTraderWindowStart = 4;
ComputeMethodContract trader_contract(const EconomicsParams& p);
ComputeMethodContract market_contract();
std::int64_t market_price(const Value& state);
Simulation economics_simulation(const Graph& star, const EconomicsParams& p, std::uint64_t seed);

// Accumulative-delta PageRank. State is Record{pr, delta, outDegree}.
// Tolerance mode declares the float sum associative and commutative so that
// pushdown applies, at the cost of bit-exactness.
ComputeMethodContract pagerank_contract(std::int64_t maxIteration, bool tolerance);
Simulation pagerank_simulation(const Graph& g, std::int64_t maxIteration, bool tolerance);
double pagerank_value(const Value& state);
double pagerank_delta(const Value& state);

// Everything a benchmark run needs to build a workload.
struct WorkloadConfig {
    std::string workload = "gol";  // gol | epidemics-erm | epidemics-sbm | economics | pagerank
    std::int64_t agents = 400;
    std::uint64_t seed = 1;
    double density = 0.3;
    double beta = 0.05;
    std::int64_t recoveryRounds = 5;
    double edgeP = 0.01;
    std::int64_t blocks = 5;
    double pIn = 0.01;
    double pOut = 0.0;
    EconomicsParams economics;
    double pagerankP = 0.05;
    std::int64_t maxIteration = 1 << 30;
    bool pagerankTolerance = false;
};

const std::vector<std::string>& workload_names();
// Throws UsageError for an unknown workload name.
void check_workload(const std::string& name);
// Torus dimensions for n agents: width is the largest divisor of n that is
// at most sqrt(n).
std::pair<std::int64_t, std::int64_t> torus_shape(std::int64_t n);
Graph build_graph(const WorkloadConfig& cfg);
Simulation build_simulation(const WorkloadConfig& cfg, const Graph& g);
std::int64_t default_rounds(const std::string& workload);

} // namespace fuseforge::workloads
