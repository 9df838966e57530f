#include "fuseforge/pi/translate.hpp"

#include <algorithm>

#include "fuseforge/errors.hpp"

namespace fuseforge::pi {

Name state_name(const StateRef& r, NameTable& names) {
    std::string text = "s" + std::to_string(r.agent);
    if (r.generation) text += "g" + std::to_string(*r.generation);
    return names.intern(text);
}

namespace {

struct Parts {
    Name p, x, d, m, y;
    std::vector<Name> refs;
    std::vector<Name> ms;  // m1..mn
};

Parts names_for(const BehavioralEquation& eq, NameTable& names) {
    validate(eq);
    Parts s;
    s.p = state_name(eq.lhs, names);
    s.x = names.intern("x");
    s.d = names.intern("d");
    s.m = names.intern("m");
    s.y = names.intern("y");
    for (const auto& r : eq.referenceSet) s.refs.push_back(state_name(r, names));
    for (std::size_t k = 1; k <= eq.referenceSet.size(); ++k) s.ms.push_back(names.intern("m" + std::to_string(k)));
    return s;
}

// i1(m).d<m>.0 | ... | in(m).d<m>.0 | d(m1)...d(mn).[[y = f(m1..mn, x)]].tail
Process collect_then(const BehavioralEquation& eq, const Parts& s, Process tail) {
    std::vector<Name> args = s.ms;
    args.push_back(s.x);
    Process collector = apply(eq.compute, args, s.y, std::move(tail));
    for (auto it = s.ms.rbegin(); it != s.ms.rend(); ++it) collector = input(s.d, {*it}, collector);
    std::vector<Process> parts;
    for (Name i : s.refs) parts.push_back(input(i, {s.m}, output(s.d, {s.m})));
    parts.push_back(collector);
    return input(s.p, {s.x}, restrict({s.d, s.m}, parts.size() == 1 ? parts.front() : par(std::move(parts))));
}

std::vector<Name> unique_params(const Parts& s) {
    std::vector<Name> params{s.p};
    for (Name r : s.refs) {
        if (std::find(params.begin(), params.end(), r) == params.end()) params.push_back(r);
    }
    return params;
}

} // namespace

Process translate_nonrecursive(const BehavioralEquation& eq, PiContext& ctx) {
    if (eq.recursive()) {
        throw WrongCaseError("equation for " + to_string(eq.lhs) + " is recursive; use translate_recursive");
    }
    Parts s = names_for(eq, ctx.names);
    Name q = state_name(eq.rhs, ctx.names);
    return collect_then(eq, s, replicate(output(q, {s.y})));
}

std::string recursive_identifier(const BehavioralEquation& eq) { return "P_" + std::to_string(eq.lhs.agent); }

Process translate_recursive(const BehavioralEquation& eq, PiContext& ctx) {
    if (!eq.recursive()) {
        throw WrongCaseError("equation for " + to_string(eq.lhs) + " is not recursive; use translate_nonrecursive");
    }
    Parts s = names_for(eq, ctx.names);
    const std::string id = recursive_identifier(eq);
    std::vector<Name> params = unique_params(s);
    std::vector<Name> yielded{s.p, s.y};
    yielded.insert(yielded.end(), s.refs.begin(), s.refs.end());
    std::vector<Name> args = s.ms;
    args.push_back(s.x);
    Process after = par(output(ctx.names.intern("yield"), yielded, call(id, params)), output(s.p, {s.y}));
    Process body = input(ctx.names.intern("resume"), s.ms, input(s.p, {s.x}, apply(eq.compute, args, s.y, after)));
    ctx.define(id, params, body);
    return body;
}

Process translate_unsynchronized(const BehavioralEquation& eq, PiContext& ctx) {
    Parts s = names_for(eq, ctx.names);
    const std::string id = "L_" + std::to_string(eq.lhs.agent);
    std::vector<Name> params = unique_params(s);
    Process loop = par(replicate(output(s.p, {s.y})), call(id, params));
    ctx.define(id, params, collect_then(eq, s, loop));
    return call(id, params);
}

HostFunction host_function(const ComputeMethodContract& c) {
    return [c](std::span<const Value> args) -> Value {
        if (args.empty()) throw ContractError("host function for " + c.id + " needs the state argument");
        std::vector<Value> msgs;
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (auto out = c.stateToMessage(args[i])) msgs.push_back(deserialize(c, *out));
        }
        return default_run(c, AgentContext{}, args.back(), msgs);
    };
}

} // namespace fuseforge::pi
