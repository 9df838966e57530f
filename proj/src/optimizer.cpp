#include "fuseforge/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <tuple>

#include "fuseforge/errors.hpp"

namespace fuseforge {

namespace {

using EquationMap = std::map<AgentId, BehavioralEquation>;

void check_ref(const StateRef& r, const Assignment& a, const StateRef& from) {
    if (r.agent < 0 || static_cast<std::size_t>(r.agent) >= a.size()) {
        throw DanglingReferenceError(to_string(from) + " references missing agent " + to_string(r));
    }
}

PartitionId where(const StateRef& r, const Assignment& a) { return a[static_cast<std::size_t>(r.agent)]; }

void sort_program(std::vector<StagedExpr>& program) {
    std::stable_sort(program.begin(), program.end(),
                     [](const StagedExpr& x, const StagedExpr& y) { return x.ref < y.ref; });
}

// Programs stay sorted by ref, so a reference has at most one read.
StagedExpr* find_read(std::vector<StagedExpr>& program, const StateRef& r) {
    auto it = std::lower_bound(program.begin(), program.end(), r,
                               [](const StagedExpr& e, const StateRef& x) { return e.ref < x; });
    return it != program.end() && it->ref == r ? &*it : nullptr;
}

PartitionPlan& plan_for(std::vector<PartitionPlan>& plans, PartitionId p) {
    if (p < 0 || static_cast<std::size_t>(p) >= plans.size() || plans[static_cast<std::size_t>(p)].partition.id != p) {
        throw StructuralError("plans must be indexed by partition id");
    }
    return plans[static_cast<std::size_t>(p)];
}

void require_refined(const PartitionPlan& plan, const char* pass) {
    if (!plan.passes.has(Pass::Refine)) {
        throw PipelineOrderError(std::string(pass) + " on partition " + std::to_string(plan.partition.id) +
                                 " before refine");
    }
}

// Structural identity of a leaf for merging.
std::tuple<int, std::int64_t, std::int64_t, int> leaf_key(const Leaf& l) {
    const int acc = static_cast<int>(l.accessor);
    if (const auto* s = std::get_if<StateRef>(&l.source)) return {0, s->agent, s->generation.value_or(-1), acc};
    if (const auto* c = std::get_if<CacheOffset>(&l.source)) return {1, c->cache, c->offset, acc};
    return {2, std::get<DynamicStateRef>(l.source).syntheticId, 0, acc};
}

} // namespace

const char* pass_name(Pass p) {
    switch (p) {
        case Pass::Refine: return "refine";
        case Pass::Synthesize: return "synthesize";
        case Pass::RewriteRemote: return "rewrite-remote";
        case Pass::RewriteLocal: return "rewrite-local";
        case Pass::Merge: return "merge";
        case Pass::Pushdown: return "pushdown";
    }
    return "?";
}

std::string PassSet::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < kPassCount; ++i) {
        const auto p = static_cast<Pass>(i);
        if (has(p)) s += (s.empty() ? "" : ",") + std::string(pass_name(p));
    }
    return "{" + s + "}";
}

void check_pass_dependencies(PassSet passes) {
    static constexpr std::pair<Pass, Pass> kNeeds[] = {
        {Pass::Synthesize, Pass::Refine},
        {Pass::RewriteRemote, Pass::Synthesize},
        {Pass::RewriteLocal, Pass::Refine},
        {Pass::Pushdown, Pass::Refine},
    };
    for (auto [pass, prereq] : kNeeds) {
        if (passes.has(pass) && !passes.has(prereq)) {
            throw ConfigurationError(std::string("pass ") + pass_name(pass) + " requires " + pass_name(prereq) +
                                     ", which is not enabled");
        }
    }
}

const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names = {"unopt", "merge", "merge+cache", "+local",
                                                   "+remote", "full", "full+pushdown"};
    return names;
}

PassSet mode_passes(const std::string& mode) {
    const PassSet cache{Pass::Merge, Pass::Refine, Pass::Synthesize};
    if (mode == "unopt") return {};
    if (mode == "merge") return {Pass::Merge};
    if (mode == "merge+cache") return cache;
    if (mode == "+local") return cache.with(Pass::RewriteLocal);
    if (mode == "+remote") return cache.with(Pass::RewriteRemote);
    if (mode == "full") return cache.with(Pass::RewriteLocal).with(Pass::RewriteRemote);
    if (mode == "full+pushdown") return cache.with(Pass::RewriteLocal).with(Pass::RewriteRemote).with(Pass::Pushdown);
    std::string valid;
    for (const auto& m : mode_names()) valid += (valid.empty() ? "" : ", ") + m;
    throw UsageError("unknown mode '" + mode + "'; valid modes: " + valid);
}

std::optional<int> MessageCache::offset_of(const StateRef& r) const {
    auto it = std::lower_bound(schema.begin(), schema.end(), r);
    if (it == schema.end() || *it != r) return std::nullopt;
    return static_cast<int>(it - schema.begin());
}

std::string to_string(const StagedExpr& e) {
    switch (e.kind) {
        case StagedExpr::Kind::Message: return "msg(" + to_string(e.ref) + ")";
        case StagedExpr::Kind::CacheLookup: return "lookup(c" + std::to_string(e.cache) + "," + to_string(e.ref) + ")";
        case StagedExpr::Kind::CacheRead:
            return "(" + std::to_string(e.cache) + "," + std::to_string(e.offset) + ")@c";
        case StagedExpr::Kind::LocalRead:
            return std::string("local(") + to_string(e.ref) + (e.buffer == Buffer::Previous ? ",prev)" : ",cur)");
        case StagedExpr::Kind::PartialFold: {
            std::string s = e.via + "{";
            for (std::size_t i = 0; i < e.inputs.size(); ++i) s += (i ? "," : "") + to_string(e.inputs[i]);
            return s + "}";
        }
    }
    return "?";
}

std::size_t node_count(const PartitionPlan& plan) {
    if (plan.merged) return plan.perAgent.size() + plan.sharedLeaves.size();
    std::size_t n = 0;
    for (const auto& [a, ap] : plan.perAgent) n += 1 + ap.tree.children.size();
    return n;
}

PartitionPlan initial_plan(const Partition& part, const Assignment& assignment, const EquationMap& eqs) {
    PartitionPlan plan;
    plan.partition = part;
    plan.mergedOrder = part.members;
    for (AgentId a : part.members) {
        auto it = eqs.find(a);
        if (it == eqs.end()) throw StructuralError("no equation for agent " + std::to_string(a));
        const auto& eq = it->second;
        Placement placement{{eq.lhs, where(eq.lhs, assignment)}};
        AgentPlan ap;
        ap.equation = eq;
        for (const auto& r : eq.referenceSet) {
            check_ref(r, assignment, eq.lhs);
            placement.emplace(r, where(r, assignment));
            ap.program.push_back(StagedExpr::message(r));
        }
        sort_program(ap.program);
        ap.tree = to_computation_tree(eq, placement);
        plan.perAgent.emplace(a, std::move(ap));
    }
    return plan;
}

std::map<AgentId, RefinedNeighbors> refine_communication(const Partition& part, const Assignment& assignment,
                                                         const EquationMap& eqs, const StaticMarks& staticMarks) {
    static const std::set<StateRef> kNone;
    std::map<AgentId, RefinedNeighbors> out;
    for (AgentId a : part.members) {
        auto it = eqs.find(a);
        if (it == eqs.end()) throw StructuralError("no equation for agent " + std::to_string(a));
        const auto& eq = it->second;
        auto mk = staticMarks.find(a);
        const auto& marks = mk == staticMarks.end() ? kNone : mk->second;
        for (const auto& m : marks) {
            if (std::find(eq.referenceSet.begin(), eq.referenceSet.end(), m) == eq.referenceSet.end()) {
                throw StructuralError("static mark " + to_string(m) + " is not referenced by " + to_string(eq.lhs));
            }
        }
        RefinedNeighbors rn;
        for (const auto& r : eq.referenceSet) {
            check_ref(r, assignment, eq.lhs);
            if (marks.count(r) == 0) {
                rn.dynamic.push_back(r);
            } else if (where(r, assignment) == part.id) {
                rn.localStatic.push_back(r);
            } else {
                rn.remoteStatic.emplace_back(r, where(r, assignment));
            }
        }
        std::sort(rn.localStatic.begin(), rn.localStatic.end());
        std::sort(rn.remoteStatic.begin(), rn.remoteStatic.end());
        std::sort(rn.dynamic.begin(), rn.dynamic.end());
        out.emplace(a, std::move(rn));
    }
    return out;
}

void refine(PartitionPlan& plan, const Assignment& assignment, const StaticMarks& staticMarks) {
    EquationMap eqs;
    for (const auto& [a, ap] : plan.perAgent) eqs.emplace(a, ap.equation);
    auto refined = refine_communication(plan.partition, assignment, eqs, staticMarks);
    for (auto& [a, ap] : plan.perAgent) ap.neighbors = std::move(refined.at(a));
    plan.passes = plan.passes.with(Pass::Refine);
}

void aggregation_pushdown(std::vector<PartitionPlan>& plans, const Assignment& assignment, AgentId target,
                          const ContractRegistry& contracts, AgentId& nextSyntheticId) {
    if (target < 0 || static_cast<std::size_t>(target) >= assignment.size()) {
        throw DanglingReferenceError("pushdown target " + std::to_string(target) + " does not exist");
    }
    const PartitionId home = assignment[static_cast<std::size_t>(target)];
    PartitionPlan& owner = plan_for(plans, home);
    require_refined(owner, "pushdown");
    AgentPlan& tp = owner.perAgent.at(target);
    const auto& contract = contracts.get(tp.equation.compute);
    if (!contract.flags.fold_safe()) {
        throw AlgebraicPreconditionError("pushdown toward x" + std::to_string(target) + " needs " + contract.id +
                                         " to be associative and commutative");
    }
    if (!tp.neighbors.aggregated.empty()) return;

    // Remote senders fold in their own partition. Local senders fold too
    // when there are several, so the target consumes one value per sending
    // partition; a lone local sender is read directly.
    std::map<PartitionId, std::vector<StateRef>> groups;
    for (const auto& [r, p] : tp.neighbors.remoteStatic) groups[p].push_back(r);
    if (groups.empty()) return;
    if (tp.neighbors.localStatic.size() >= 2) groups[home] = tp.neighbors.localStatic;

    std::set<StateRef> folded;
    std::vector<StagedExpr> aggregateReads;
    std::vector<Leaf> aggregateLeaves;
    for (auto& [q, senders] : groups) {
        std::sort(senders.begin(), senders.end());
        DynamicStateRef d{nextSyntheticId--, q, contract.id, target, senders};
        StagedExpr fold = StagedExpr::make(StagedExpr::Kind::PartialFold, StateRef{d.syntheticId, std::nullopt});
        fold.via = contract.id;
        for (const auto& s : senders) {
            fold.inputs.push_back(StagedExpr::local_read(s, Buffer::Current));
            folded.insert(s);
        }
        aggregateReads.push_back(StagedExpr::message(StateRef{d.syntheticId, std::nullopt}));
        aggregateLeaves.push_back(Leaf{d, q == home ? Accessor::Local : Accessor::Remote, q});
        PartitionPlan& host = plan_for(plans, q);
        host.aggregators.push_back(std::move(d));
        host.aggregatorPrograms.push_back(std::move(fold));
    }

    tp.neighbors.aggregated.assign(folded.begin(), folded.end());
    std::erase_if(tp.neighbors.localStatic, [&](const StateRef& r) { return folded.count(r) != 0; });
    tp.neighbors.remoteStatic.clear();
    std::erase_if(tp.program, [&](const StagedExpr& e) { return folded.count(e.ref) != 0; });
    tp.program.insert(tp.program.end(), aggregateReads.begin(), aggregateReads.end());
    sort_program(tp.program);
    auto& children = tp.tree.children;
    children.erase(std::remove_if(children.begin() + 1, children.end(),
                                  [&](const Leaf& l) {
                                      const auto* s = std::get_if<StateRef>(&l.source);
                                      return s != nullptr && folded.count(*s) != 0;
                                  }),
                   children.end());
    children.insert(children.end(), aggregateLeaves.begin(), aggregateLeaves.end());
    owner.passes = owner.passes.with(Pass::Pushdown);
}

std::vector<MessageCache> synthesize_caches(std::vector<PartitionPlan>& plans) {
    std::map<std::pair<PartitionId, PartitionId>, std::set<StateRef>> wanted;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        auto& plan = plans[i];
        if (plan.partition.id != static_cast<PartitionId>(i)) throw StructuralError("plans must be indexed by partition id");
        require_refined(plan, "synthesize");
        for (const auto& [a, ap] : plan.perAgent) {
            for (const auto& [r, src] : ap.neighbors.remoteStatic) wanted[{src, plan.partition.id}].insert(r);
        }
    }
    std::vector<MessageCache> caches;
    std::map<std::pair<PartitionId, PartitionId>, int> idOf;
    for (auto& plan : plans) {
        plan.inboundCaches.clear();
        plan.outboundCaches.clear();
    }
    for (const auto& [pair, refs] : wanted) {
        MessageCache c;
        c.id = static_cast<int>(caches.size());
        c.sourcePartition = pair.first;
        c.destPartition = pair.second;
        c.schema.assign(refs.begin(), refs.end());
        idOf.emplace(pair, c.id);
        plans[static_cast<std::size_t>(pair.first)].outboundCaches.push_back(c);
        plans[static_cast<std::size_t>(pair.second)].inboundCaches.push_back(c);
        caches.push_back(std::move(c));
    }
    for (auto& plan : plans) {
        for (auto& [a, ap] : plan.perAgent) {
            for (const auto& [r, src] : ap.neighbors.remoteStatic) {
                const int id = idOf.at({src, plan.partition.id});
                StagedExpr* e = find_read(ap.program, r);
                if (e != nullptr && e->kind == StagedExpr::Kind::Message) *e = StagedExpr::lookup(id, r);
            }
        }
        plan.passes = plan.passes.with(Pass::Synthesize);
    }
    return caches;
}

void rewrite_remote(PartitionPlan& plan) {
    require_refined(plan, "rewrite-remote");
    const PartitionId home = plan.partition.id;
    std::map<PartitionId, const MessageCache*> cacheFrom;
    for (const auto& c : plan.inboundCaches) cacheFrom[c.sourcePartition] = &c;
    for (auto& [a, ap] : plan.perAgent) {
        if (ap.neighbors.remoteStatic.empty()) continue;
        std::map<StateRef, Leaf*> remoteLeaves;
        for (auto& leaf : ap.tree.children) {
            const auto* s = std::get_if<StateRef>(&leaf.source);
            if (s != nullptr && leaf.accessor == Accessor::Remote) remoteLeaves.emplace(*s, &leaf);
        }
        for (const auto& [r, src] : ap.neighbors.remoteStatic) {
            auto it = cacheFrom.find(src);
            const MessageCache* cache = it == cacheFrom.end() ? nullptr : it->second;
            const auto offset = cache ? cache->offset_of(r) : std::nullopt;
            if (!offset) {
                throw PipelineOrderError("rewrite-remote: " + to_string(r) + " read by x" + std::to_string(a) +
                                         " has no cache slot; synthesize caches first");
            }
            if (StagedExpr* e = find_read(ap.program, r)) *e = StagedExpr::cache_read(cache->id, *offset, r);
            if (auto leaf = remoteLeaves.find(r); leaf != remoteLeaves.end()) {
                *leaf->second = Leaf{CacheOffset{cache->id, *offset}, Accessor::Local, home};
            }
        }
    }
    plan.passes = plan.passes.with(Pass::RewriteRemote);
}

void rewrite_local(PartitionPlan& plan) {
    require_refined(plan, "rewrite-local");
    for (auto& [a, ap] : plan.perAgent) {
        for (const auto& r : ap.neighbors.localStatic) {
            if (StagedExpr* e = find_read(ap.program, r)) *e = StagedExpr::local_read(r, Buffer::Previous);
        }
    }
    plan.doubleBuffered = true;
    plan.passes = plan.passes.with(Pass::RewriteLocal);
}

void merge(PartitionPlan& plan) {
    plan.mergedOrder = plan.partition.members;
    std::sort(plan.mergedOrder.begin(), plan.mergedOrder.end());
    plan.sharedLeaves.clear();
    std::set<std::tuple<int, std::int64_t, std::int64_t, int>> seen;
    for (AgentId a : plan.mergedOrder) {
        for (const auto& leaf : plan.perAgent.at(a).tree.children) {
            if (seen.insert(leaf_key(leaf)).second) plan.sharedLeaves.push_back(leaf);
        }
    }
    plan.merged = true;
    plan.passes = plan.passes.with(Pass::Merge);
}

double OptimizedProgram::total_ms() const {
    double t = 0;
    for (double x : passMs) t += x;
    return t;
}

OptimizedProgram optimize(const Simulation& sim, const std::vector<Partition>& parts, PassSet passes) {
    validate_simulation(sim);
    check_pass_dependencies(passes);
    const Assignment assignment = assignment_of(parts, sim.agent_count());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].id != static_cast<PartitionId>(i)) throw StructuralError("partition ids must be 0..k-1 in order");
    }

    OptimizedProgram out;
    out.passes = passes;
    out.plans.reserve(parts.size());
    for (const auto& part : parts) {
        EquationMap eqs;
        for (AgentId a : part.members) eqs.emplace(a, sim.equations[static_cast<std::size_t>(a)]);
        out.plans.push_back(initial_plan(part, assignment, eqs));
    }

    using Clock = std::chrono::steady_clock;
    auto timed = [&](Pass p, auto&& body) {
        if (!passes.has(p)) return;
        const auto t0 = Clock::now();
        body();
        out.passMs[static_cast<std::size_t>(p)] +=
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    timed(Pass::Refine, [&] {
        const StaticMarks marks = static_marks(sim);
        for (auto& plan : out.plans) refine(plan, assignment, marks);
    });
    timed(Pass::Pushdown, [&] {
        AgentId next = -1;
        for (AgentId t : sim.pushdownTargets) aggregation_pushdown(out.plans, assignment, t, sim.contracts, next);
    });
    timed(Pass::Synthesize, [&] { out.caches = synthesize_caches(out.plans); });
    timed(Pass::RewriteRemote, [&] {
        for (auto& plan : out.plans) rewrite_remote(plan);
    });
    timed(Pass::RewriteLocal, [&] {
        for (auto& plan : out.plans) rewrite_local(plan);
    });
    timed(Pass::Merge, [&] {
        for (auto& plan : out.plans) merge(plan);
    });
    for (auto& plan : out.plans) plan.passes = passes;
    return out;
}

} // namespace fuseforge
