#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fuseforge/optimizer.hpp"
#include "fuseforge/thread_pool.hpp"

namespace fuseforge {

struct SimulationState {
    std::int64_t superstep = 0;
    std::vector<Value> values;
    // Values at the end of the previous superstep; kept when some plan is
    // double buffered.
    std::vector<Value> previousValues;
    // What each agent published from `values`, readable next superstep.
    std::vector<std::optional<Value>> messages;
};

// 64-bit hash of all agent values, bit-exact for floats.
std::uint64_t checksum(const std::vector<Value>& values);

struct Metrics {
    std::vector<double> roundMs;
    // Per round: agent-to-agent messages (one per sender per reader),
    // cross-partition wire units and their bytes, values consumed by the
    // watched agent, and mailbox traffic.
    std::vector<std::uint64_t> logical;
    std::vector<std::uint64_t> wire;
    std::vector<std::uint64_t> wireBytes;
    std::vector<std::uint64_t> targetInbound;
    std::vector<std::uint64_t> mailboxSent;
    std::vector<std::uint64_t> mailboxConsumed;
    // Mailbox messages published from the initial state.
    std::uint64_t primingSent = 0;
    PassTimes optimizerMs{};

    double mean_round_ms() const;
    static std::uint64_t total(const std::vector<std::uint64_t>& perRound);
};

struct ExecutionResult {
    SimulationState state;
    Metrics metrics;
};

struct InMessage {
    AgentId sender = 0;
    Value payload;
};

// Deserializes raw payloads with the receiver's contract, checks their tags
// and orders them by sender id.
std::vector<InMessage> deliver(const ComputeMethodContract& receiver, AgentId receiverId, std::vector<InMessage> raw);

// Runs optimized plans in supersteps. Construction links the plans (routes,
// cache slots, schedulable units); run can be called repeatedly.
class Executor {
public:
    Executor(const OptimizedProgram& program, const Simulation& sim, int threads);
    ~Executor();
    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    ExecutionResult run(std::int64_t rounds, std::uint64_t seed);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ExecutionResult execute(const OptimizedProgram& program, const Simulation& sim, std::int64_t rounds, int threads,
                        std::uint64_t seed);

} // namespace fuseforge
