#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fuseforge/rng.hpp"
#include "fuseforge/value.hpp"

namespace fuseforge {

using AgentId = std::int64_t;
using PartitionId = std::int32_t;
using ComputeMethodId = std::string;

struct StateRef {
    AgentId agent = 0;
    // Superstep index in unrolled (non-recursive) form; absent for recursive
    // equations.
    std::optional<std::int32_t> generation;

    auto operator<=>(const StateRef&) const = default;
};

std::string to_string(const StateRef& r);

// p := f{i1..in}.q
struct BehavioralEquation {
    StateRef lhs;
    ComputeMethodId compute;
    std::vector<StateRef> referenceSet;
    StateRef rhs;

    bool recursive() const { return lhs == rhs; }
    bool operator==(const BehavioralEquation&) const = default;
};

// Throws StructuralError when the reference set repeats a state.
void validate(const BehavioralEquation& eq);

struct AlgebraicFlags {
    bool associative = false;
    bool commutative = false;

    bool fold_safe() const { return associative && commutative; }
};

// Who is being updated, and when. Stochastic contracts derive their random
// stream from this and nothing else.
struct AgentContext {
    AgentId agent = 0;
    std::int64_t superstep = 0;
    std::uint64_t seed = 0;
};

struct ComputeMethodContract {
    ComputeMethodId id;
    TypeTag valueType = TypeTag::Int;
    TypeTag inMessageType = TypeTag::Int;
    TypeTag outMessageType = TypeTag::Int;
    // nullopt means the agent sends nothing this superstep.
    std::function<std::optional<Value>(const Value& state)> stateToMessage;
    std::function<std::optional<Value>(std::span<const Value> messages)> partialCompute;
    std::function<Value(const AgentContext&, const Value& state, const std::optional<Value>& folded)> updateState;
    // Empty means identity; only allowed when in and out message types agree.
    std::function<Value(const Value& out)> deserialize;
    AlgebraicFlags flags;
    // Draws a random in-message; used to test the declared flags.
    std::function<Value(SplitMix64&)> sampleMessage;
};

Value deserialize(const ComputeMethodContract& c, const Value& out);

// partialCompute over messages after checking every tag against the
// contract's in-message type.
std::optional<Value> fold_messages(const ComputeMethodContract& c, std::span<const Value> messages);

// updateState(state, partialCompute(messages)).
Value default_run(const ComputeMethodContract& c, const AgentContext& ctx, const Value& state,
                  std::span<const Value> messages);

// Folds messages along random binary groupings and compares with the flat
// fold. Throws ContractError describing the first counterexample. Floats
// compare with relative tolerance relTol.
void check_algebraic_flags(const ComputeMethodContract& c, std::uint64_t seed, int cases = 200,
                           double relTol = 0.0);

class ContractRegistry {
public:
    // Registration property-tests the algebraic flags when the contract can
    // sample messages.
    void add(ComputeMethodContract c, double relTol = 0.0);
    const ComputeMethodContract& get(const ComputeMethodId& id) const;
    bool contains(const ComputeMethodId& id) const { return contracts_.count(id) != 0; }

private:
    std::map<ComputeMethodId, ComputeMethodContract> contracts_;
};

// Computation trees

enum class Accessor : std::uint8_t { Local, Remote };

struct CacheOffset {
    int cache = 0;
    int offset = 0;

    bool operator==(const CacheOffset&) const = default;
};

// A state created by the optimizer to fold some senders' messages near them.
struct DynamicStateRef {
    AgentId syntheticId = -1;  // negative, disjoint from agent ids
    PartitionId hostPartition = 0;
    ComputeMethodId foldOp;
    AgentId target = 0;
    std::vector<StateRef> senders;

    bool operator==(const DynamicStateRef&) const = default;
};

using LeafSource = std::variant<StateRef, CacheOffset, DynamicStateRef>;

struct Leaf {
    LeafSource source;
    Accessor accessor = Accessor::Local;
    std::optional<PartitionId> partition;

    bool operator==(const Leaf&) const = default;
};

struct TreeRoot {
    StateRef result;
    ComputeMethodId op;
    std::optional<PartitionId> partition;

    bool operator==(const TreeRoot&) const = default;
};

struct ComputationTree {
    TreeRoot root;
    // children[0] is the equation's own state, then the reference set in order.
    std::vector<Leaf> children;

    bool operator==(const ComputationTree&) const = default;
};

using Placement = std::map<StateRef, PartitionId>;

// Throws PlacementError when a state of the equation has no partition.
ComputationTree to_computation_tree(const BehavioralEquation& eq, const Placement& placement);

} // namespace fuseforge
