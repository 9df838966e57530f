#include "fuseforge/simulation.hpp"

#include "fuseforge/errors.hpp"

namespace fuseforge {

void validate_simulation(const Simulation& sim) {
    const auto n = static_cast<AgentId>(sim.agent_count());
    if (sim.initial.size() != sim.equations.size()) {
        throw StructuralError("simulation has " + std::to_string(sim.equations.size()) + " equations but " +
                              std::to_string(sim.initial.size()) + " initial values");
    }
    for (AgentId a = 0; a < n; ++a) {
        const auto& eq = sim.equations[static_cast<std::size_t>(a)];
        const StateRef self{a, std::nullopt};
        if (eq.lhs != self || eq.rhs != self) {
            throw StructuralError("equation " + std::to_string(a) + " must update x" + std::to_string(a) +
                                  " recursively");
        }
        validate(eq);
        for (const auto& r : eq.referenceSet) {
            if (r.agent < 0 || r.agent >= n) {
                throw DanglingReferenceError(to_string(eq.lhs) + " references missing agent " + to_string(r));
            }
            if (r.agent == a) throw StructuralError(to_string(eq.lhs) + " references itself");
        }
        const auto& c = sim.contracts.get(eq.compute);
        if (tag_of(sim.initial[static_cast<std::size_t>(a)]) != c.valueType) {
            throw ContractError("initial value of x" + std::to_string(a) + " is " +
                                tag_name(tag_of(sim.initial[static_cast<std::size_t>(a)])) + ", contract " + c.id +
                                " wants " + tag_name(c.valueType));
        }
    }
    for (const auto& [a, refs] : sim.dynamicRefs) {
        if (a < 0 || a >= n) throw DanglingReferenceError("dynamic marks for missing agent " + std::to_string(a));
    }
    for (AgentId t : sim.pushdownTargets) {
        if (t < 0 || t >= n) throw DanglingReferenceError("pushdown target " + std::to_string(t) + " does not exist");
    }
}

StaticMarks static_marks(const Simulation& sim) {
    StaticMarks marks;
    for (const auto& eq : sim.equations) {
        auto& set = marks[eq.lhs.agent];
        auto dyn = sim.dynamicRefs.find(eq.lhs.agent);
        for (const auto& r : eq.referenceSet) {
            if (dyn == sim.dynamicRefs.end() || dyn->second.count(r) == 0) set.insert(r);
        }
    }
    return marks;
}

} // namespace fuseforge
