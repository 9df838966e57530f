#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fuseforge/equations.hpp"

namespace fuseforge {

// Per agent, the references whose communication pattern is fixed.
using StaticMarks = std::map<AgentId, std::set<StateRef>>;

// An agent program ready for optimization: agent a is updated by the
// recursive equation equations[a] (lhs = rhs = x_a) and starts at initial[a].
struct Simulation {
    std::vector<BehavioralEquation> equations;
    std::vector<Value> initial;
    ContractRegistry contracts;
    // References whose pattern is not known ahead of time; they always travel
    // through the mailbox.
    std::map<AgentId, std::set<StateRef>> dynamicRefs;
    // Agents whose inbound messages may be folded near the senders.
    std::vector<AgentId> pushdownTargets;
    // Agent whose inbound traffic is reported separately in the metrics.
    std::optional<AgentId> watch;

    std::size_t agent_count() const { return equations.size(); }
    const ComputeMethodContract& contract_of(AgentId a) const {
        return contracts.get(equations[static_cast<std::size_t>(a)].compute);
    }
};

// Checks shapes, ranges, registered contracts and initial value tags.
void validate_simulation(const Simulation& sim);

// Every reference not listed in dynamicRefs.
StaticMarks static_marks(const Simulation& sim);

} // namespace fuseforge
