#include "fuseforge/equations.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fuseforge/errors.hpp"

namespace fuseforge {

std::string to_string(const StateRef& r) {
    std::string s = "x" + std::to_string(r.agent);
    if (r.generation) s += "@" + std::to_string(*r.generation);
    return s;
}

void validate(const BehavioralEquation& eq) {
    std::set<StateRef> seen;
    for (const auto& r : eq.referenceSet) {
        if (!seen.insert(r).second) {
            throw StructuralError("reference set of " + to_string(eq.lhs) + " repeats " + to_string(r));
        }
    }
}

Value deserialize(const ComputeMethodContract& c, const Value& out) {
    if (c.deserialize) return c.deserialize(out);
    return out;
}

std::optional<Value> fold_messages(const ComputeMethodContract& c, std::span<const Value> messages) {
    for (const auto& m : messages) {
        if (tag_of(m) != c.inMessageType) {
            throw ContractError("contract " + c.id + " expects " + tag_name(c.inMessageType) + " messages, got " +
                                tag_name(tag_of(m)));
        }
    }
    return c.partialCompute(messages);
}

Value default_run(const ComputeMethodContract& c, const AgentContext& ctx, const Value& state,
                  std::span<const Value> messages) {
    return c.updateState(ctx, state, fold_messages(c, messages));
}

namespace {

std::optional<Value> fold_tree(const ComputeMethodContract& c, std::vector<Value> ms, SplitMix64& rng) {
    if (ms.size() <= 1) return c.partialCompute(ms);
    const std::size_t cut = 1 + rng.below(ms.size() - 1);
    std::vector<Value> left(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<Value> right(ms.begin() + static_cast<std::ptrdiff_t>(cut), ms.end());
    std::vector<Value> parts;
    if (auto l = fold_tree(c, std::move(left), rng)) parts.push_back(std::move(*l));
    if (auto r = fold_tree(c, std::move(right), rng)) parts.push_back(std::move(*r));
    return c.partialCompute(parts);
}

bool close(const std::optional<Value>& a, const std::optional<Value>& b, double relTol) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    if (relTol > 0 && tag_of(*a) == TypeTag::Float && tag_of(*b) == TypeTag::Float) {
        const double x = std::get<double>(*a), y = std::get<double>(*b);
        return std::abs(x - y) <= relTol * std::max({std::abs(x), std::abs(y), 1e-300});
    }
    return *a == *b;
}

} // namespace

void check_algebraic_flags(const ComputeMethodContract& c, std::uint64_t seed, int cases, double relTol) {
    if (!c.flags.associative && !c.flags.commutative) return;
    if (!c.sampleMessage) throw ContractError("contract " + c.id + " declares algebraic flags but cannot sample");
    SplitMix64 rng(derive_seed(seed, {0xa15e}));
    for (int i = 0; i < cases; ++i) {
        std::vector<Value> ms(rng.below(9));
        for (auto& m : ms) m = c.sampleMessage(rng);
        const auto flat = c.partialCompute(ms);
        std::vector<Value> shuffled = ms;
        if (c.flags.commutative) {
            for (std::size_t k = shuffled.size(); k > 1; --k) std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
        }
        std::optional<Value> grouped =
            c.flags.associative ? fold_tree(c, shuffled, rng) : c.partialCompute(shuffled);
        if (!close(flat, grouped, relTol)) {
            std::string shown;
            for (const auto& m : ms) shown += (shown.empty() ? "" : ",") + to_string(m);
            throw ContractError("contract " + c.id + " violates its declared algebraic flags on {" + shown + "}");
        }
    }
}

void ContractRegistry::add(ComputeMethodContract c, double relTol) {
    if (!c.deserialize && c.inMessageType != c.outMessageType) {
        throw ContractError("contract " + c.id + " needs deserialize: in and out message types differ");
    }
    if (c.sampleMessage) check_algebraic_flags(c, 0x5eed, 200, relTol);
    const ComputeMethodId id = c.id;
    contracts_.insert_or_assign(id, std::move(c));
}

const ComputeMethodContract& ContractRegistry::get(const ComputeMethodId& id) const {
    auto it = contracts_.find(id);
    if (it == contracts_.end()) throw ConfigurationError("unregistered compute method " + id);
    return it->second;
}

ComputationTree to_computation_tree(const BehavioralEquation& eq, const Placement& placement) {
    auto where = [&](const StateRef& r) {
        auto it = placement.find(r);
        if (it == placement.end()) throw PlacementError("no partition for state " + to_string(r));
        return it->second;
    };
    const PartitionId home = where(eq.lhs);
    ComputationTree t;
    t.root = TreeRoot{eq.rhs, eq.compute, home};
    t.children.push_back(Leaf{eq.lhs, Accessor::Local, home});
    for (const auto& r : eq.referenceSet) {
        const PartitionId p = where(r);
        t.children.push_back(Leaf{r, p == home ? Accessor::Local : Accessor::Remote, p});
    }
    return t;
}

} // namespace fuseforge
