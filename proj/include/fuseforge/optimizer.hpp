#pragma once

#include <array>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "fuseforge/partition.hpp"
#include "fuseforge/simulation.hpp"

namespace fuseforge {

enum class Pass : std::uint8_t { Refine, Synthesize, RewriteRemote, RewriteLocal, Merge, Pushdown };
inline constexpr std::size_t kPassCount = 6;

const char* pass_name(Pass p);

class PassSet {
public:
    constexpr PassSet() = default;
    constexpr PassSet(std::initializer_list<Pass> passes) {
        for (Pass p : passes) bits_ |= bit(p);
    }

    constexpr bool has(Pass p) const { return (bits_ & bit(p)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr PassSet with(Pass p) const {
        PassSet s = *this;
        s.bits_ |= bit(p);
        return s;
    }
    constexpr bool operator==(const PassSet&) const = default;

    std::string to_string() const;

private:
    static constexpr std::uint8_t bit(Pass p) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p)); }
    std::uint8_t bits_ = 0;
};

// Throws ConfigurationError naming the first missing prerequisite:
// Synthesize, RewriteLocal and Pushdown need Refine; RewriteRemote needs
// Synthesize.
void check_pass_dependencies(PassSet passes);

// The benchmark modes, in ablation order.
const std::vector<std::string>& mode_names();
// Throws UsageError listing the valid modes.
PassSet mode_passes(const std::string& mode);

struct RefinedNeighbors {
    std::vector<StateRef> localStatic;
    std::vector<std::pair<StateRef, PartitionId>> remoteStatic;
    std::vector<StateRef> dynamic;
    // Static references folded by an aggregator instead of read directly.
    std::vector<StateRef> aggregated;

    bool operator==(const RefinedNeighbors&) const = default;
};

// Slots are ordered by agent id so readers can address them by offset.
struct MessageCache {
    int id = 0;
    PartitionId sourcePartition = 0;
    PartitionId destPartition = 0;
    std::vector<StateRef> schema;

    std::optional<int> offset_of(const StateRef& r) const;
    bool operator==(const MessageCache&) const = default;
};

enum class Buffer : std::uint8_t { Current, Previous };

struct StagedExpr {
    enum class Kind : std::uint8_t {
        Message,      // mailbox delivery from ref
        CacheLookup,  // ref's slot in cache, found by searching the schema
        CacheRead,    // slot `offset` of cache
        LocalRead,    // ref's published message in the given buffer
        PartialFold,  // partialCompute of `via` over inputs
    };

    Kind kind = Kind::Message;
    StateRef ref;
    int cache = -1;
    int offset = -1;
    Buffer buffer = Buffer::Previous;
    std::vector<StagedExpr> inputs;
    ComputeMethodId via;

    static StagedExpr make(Kind k, StateRef r) {
        StagedExpr e;
        e.kind = k;
        e.ref = r;
        return e;
    }
    static StagedExpr message(StateRef r) { return make(Kind::Message, r); }
    static StagedExpr lookup(int cache, StateRef r) {
        StagedExpr e = make(Kind::CacheLookup, r);
        e.cache = cache;
        return e;
    }
    static StagedExpr cache_read(int cache, int offset, StateRef r) {
        StagedExpr e = make(Kind::CacheRead, r);
        e.cache = cache;
        e.offset = offset;
        return e;
    }
    static StagedExpr local_read(StateRef r, Buffer b) {
        StagedExpr e = make(Kind::LocalRead, r);
        e.buffer = b;
        return e;
    }

    bool operator==(const StagedExpr&) const = default;
};

std::string to_string(const StagedExpr& e);

struct AgentPlan {
    BehavioralEquation equation;
    RefinedNeighbors neighbors;
    ComputationTree tree;
    // Reads producing the agent's in-messages, ordered by sender id; the
    // agent folds them with its own compute method.
    std::vector<StagedExpr> program;

    bool operator==(const AgentPlan&) const = default;
};

struct PartitionPlan {
    Partition partition;
    PassSet passes;
    std::map<AgentId, AgentPlan> perAgent;
    std::vector<MessageCache> inboundCaches;
    std::vector<MessageCache> outboundCaches;
    std::vector<DynamicStateRef> aggregators;
    // PartialFold over the senders' current messages, one per aggregator.
    std::vector<StagedExpr> aggregatorPrograms;
    std::vector<AgentId> mergedOrder;
    // Deduplicated leaves of all member trees, filled by merge.
    std::vector<Leaf> sharedLeaves;
    bool merged = false;
    bool doubleBuffered = false;

    bool operator==(const PartitionPlan&) const = default;
};

// Tree nodes of the plan: one root per member plus leaves, counting shared
// leaves once after merging.
std::size_t node_count(const PartitionPlan& plan);

// Unoptimized plan: every reference is a mailbox message.
PartitionPlan initial_plan(const Partition& part, const Assignment& assignment,
                           const std::map<AgentId, BehavioralEquation>& eqs);

std::map<AgentId, RefinedNeighbors> refine_communication(const Partition& part, const Assignment& assignment,
                                                         const std::map<AgentId, BehavioralEquation>& eqs,
                                                         const StaticMarks& staticMarks);
void refine(PartitionPlan& plan, const Assignment& assignment, const StaticMarks& staticMarks);

// Folds the target's static inbound messages per sending partition. Synthetic
// ids are drawn downwards from nextSyntheticId.
void aggregation_pushdown(std::vector<PartitionPlan>& plans, const Assignment& assignment, AgentId target,
                          const ContractRegistry& contracts, AgentId& nextSyntheticId);

// One cache per directed partition pair with remote static reads; remote
// reads switch from messages to schema lookups.
std::vector<MessageCache> synthesize_caches(std::vector<PartitionPlan>& plans);

void rewrite_remote(PartitionPlan& plan);
void rewrite_local(PartitionPlan& plan);
void merge(PartitionPlan& plan);

using PassTimes = std::array<double, kPassCount>;  // milliseconds, indexed by Pass

struct OptimizedProgram {
    PassSet passes;
    std::vector<PartitionPlan> plans;
    std::vector<MessageCache> caches;  // indexed by cache id
    PassTimes passMs{};

    double total_ms() const;
};

// Runs the enabled passes in pipeline order: refine, pushdown, synthesize,
// rewrite remote, rewrite local, merge.
OptimizedProgram optimize(const Simulation& sim, const std::vector<Partition>& parts, PassSet passes);

} // namespace fuseforge
