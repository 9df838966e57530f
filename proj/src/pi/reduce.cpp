#include <algorithm>
#include <deque>
#include <unordered_map>

#include "fuseforge/pi/semantics.hpp"

namespace fuseforge::pi {

namespace {

// Guards against unguarded recursion such as B = B when a process
// identifier is unfolded to look for a redex.
constexpr int kMaxUnfoldDepth = 16;

// An action a process offers: an output or an input prefix, together with
// what is left of the process once the action fires.
struct Cap {
    bool is_output = false;
    Name channel;
    std::vector<Name> names;
    Process cont;
    Process residual;
    std::vector<Name> extruded;  // fresh names whose scope moves to the top
};

struct Succ {
    Process proc;
    StepLabel label;
    std::optional<std::pair<Name, Value>> bind;
    std::vector<Name> extruded;
};

Process par_of(std::vector<Process> ps) {
    ps.erase(std::remove_if(ps.begin(), ps.end(), [](const Process& p) { return is_nil(p); }), ps.end());
    if (ps.empty()) return nil();
    if (ps.size() == 1) return ps.front();
    return par(std::move(ps));
}

class Stepper {
public:
    Stepper(PiContext& ctx, const std::map<Name, Value>& env) : ctx_(ctx), env_(env) {}

    std::vector<Cap> caps(const Process& p, int depth) {
        std::vector<Cap> out;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Output>) {
                    out.push_back(Cap{true, n.channel, n.payload, n.cont, nil(), {}});
                } else if constexpr (std::is_same_v<T, Input>) {
                    out.push_back(Cap{false, n.channel, n.binders, n.cont, nil(), {}});
                } else if constexpr (std::is_same_v<T, Choice>) {
                    for (const auto& b : n.branches) {
                        auto cs = caps(b, depth);
                        out.insert(out.end(), cs.begin(), cs.end());
                    }
                } else if constexpr (std::is_same_v<T, Parallel>) {
                    for (std::size_t k = 0; k < n.parts.size(); ++k) {
                        for (auto& c : caps(n.parts[k], depth)) {
                            std::vector<Process> rest = others(n.parts, k);
                            rest.push_back(c.residual);
                            c.residual = par_of(std::move(rest));
                            out.push_back(std::move(c));
                        }
                    }
                } else if constexpr (std::is_same_v<T, Restriction>) {
                    std::map<Name, Name> sigma;
                    std::vector<Name> fresh;
                    for (Name x : n.names) {
                        fresh.push_back(ctx_.names.fresh(x));
                        sigma[x] = fresh.back();
                    }
                    Process body = substitute(n.body, sigma, ctx_.names);
                    for (auto& c : caps(body, depth)) {
                        c.extruded.insert(c.extruded.end(), fresh.begin(), fresh.end());
                        out.push_back(std::move(c));
                    }
                } else if constexpr (std::is_same_v<T, Replication>) {
                    for (auto& c : caps(n.body, depth)) {
                        c.residual = par_of({c.residual, p});
                        out.push_back(std::move(c));
                    }
                } else if constexpr (std::is_same_v<T, Call>) {
                    if (depth < kMaxUnfoldDepth) out = caps(ctx_.unfold(n), depth + 1);
                }
            },
            p->v);
        return out;
    }

    std::vector<Succ> steps(const Process& p, int depth) {
        std::vector<Succ> out;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Parallel>) {
                    const auto& parts = n.parts;
                    for (std::size_t k = 0; k < parts.size(); ++k) {
                        for (auto& s : steps(parts[k], depth)) {
                            std::vector<Process> ps = parts;
                            ps[k] = s.proc;
                            s.proc = par_of(std::move(ps));
                            out.push_back(std::move(s));
                        }
                    }
                    std::vector<std::vector<Cap>> cs;
                    for (const auto& q : parts) cs.push_back(caps(q, depth));
                    for (std::size_t i = 0; i < parts.size(); ++i) {
                        for (std::size_t j = i + 1; j < parts.size(); ++j) {
                            for (const auto& a : cs[i]) {
                                for (const auto& b : cs[j]) {
                                    if (a.channel != b.channel || a.is_output == b.is_output) continue;
                                    const Cap& o = a.is_output ? a : b;
                                    const Cap& in = a.is_output ? b : a;
                                    std::vector<Process> rest;
                                    for (std::size_t m = 0; m < parts.size(); ++m) {
                                        if (m != i && m != j) rest.push_back(parts[m]);
                                    }
                                    out.push_back(comm(o, in, std::move(rest)));
                                }
                            }
                        }
                    }
                } else if constexpr (std::is_same_v<T, Restriction>) {
                    for (auto& s : steps(n.body, depth)) {
                        s.proc = restrict(n.names, s.proc);
                        out.push_back(std::move(s));
                    }
                } else if constexpr (std::is_same_v<T, Replication>) {
                    // Redexes inside one copy, then between two copies.
                    for (auto& s : steps(n.body, depth)) {
                        s.proc = par_of({s.proc, p});
                        out.push_back(std::move(s));
                    }
                    auto first = caps(n.body, depth);
                    auto second = caps(n.body, depth);
                    for (const auto& o : first) {
                        if (!o.is_output) continue;
                        for (const auto& in : second) {
                            if (in.is_output || in.channel != o.channel) continue;
                            out.push_back(comm(o, in, {p}));
                        }
                    }
                } else if constexpr (std::is_same_v<T, Choice>) {
                    for (const auto& b : n.branches) {
                        auto ss = steps(b, depth);
                        out.insert(out.end(), ss.begin(), ss.end());
                    }
                } else if constexpr (std::is_same_v<T, Call>) {
                    if (depth < kMaxUnfoldDepth) out = steps(ctx_.unfold(n), depth + 1);
                } else if constexpr (std::is_same_v<T, Apply>) {
                    if (auto s = fire(n)) out.push_back(std::move(*s));
                }
            },
            p->v);
        return out;
    }

private:
    PiContext& ctx_;
    const std::map<Name, Value>& env_;

    static std::vector<Process> others(const std::vector<Process>& ps, std::size_t skip) {
        std::vector<Process> out;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (i != skip) out.push_back(ps[i]);
        }
        return out;
    }

    Succ comm(const Cap& o, const Cap& in, std::vector<Process> rest) {
        if (o.names.size() != in.names.size()) {
            throw ReductionError("arity mismatch on channel " + ctx_.names.text(o.channel) + ": output sends " +
                                 std::to_string(o.names.size()) + " names, input binds " +
                                 std::to_string(in.names.size()));
        }
        std::map<Name, Name> sigma;
        for (std::size_t i = 0; i < in.names.size(); ++i) {
            if (in.names[i] != o.names[i]) sigma[in.names[i]] = o.names[i];
        }
        rest.push_back(o.residual);
        rest.push_back(in.residual);
        rest.push_back(o.cont);
        rest.push_back(substitute(in.cont, sigma, ctx_.names));
        Succ s;
        s.proc = par_of(std::move(rest));
        s.label.kind = StepLabel::Kind::Comm;
        s.label.channel = ctx_.names.text(o.channel);
        for (Name x : o.names) s.label.names.push_back(ctx_.names.text(x));
        s.extruded = o.extruded;
        s.extruded.insert(s.extruded.end(), in.extruded.begin(), in.extruded.end());
        return s;
    }

    std::optional<Value> value_of(Name n) const {
        if (auto it = env_.find(n); it != env_.end()) return it->second;
        return ctx_.names.literal_value(n);
    }

    std::optional<Succ> fire(const Apply& a) {
        auto fn = ctx_.functions.find(a.fn);
        if (fn == ctx_.functions.end()) throw ConfigurationError("unregistered compute method " + a.fn);
        std::vector<Value> args;
        for (Name x : a.args) {
            auto v = value_of(x);
            if (!v) return std::nullopt;
            args.push_back(std::move(*v));
        }
        Value result = fn->second(args);
        Name lit = ctx_.names.literal(result);
        Succ s;
        s.proc = substitute(a.cont, {{a.result, lit}}, ctx_.names);
        s.label.kind = StepLabel::Kind::Apply;
        s.label.channel = a.fn;
        for (Name x : a.args) s.label.names.push_back(ctx_.names.text(x));
        s.label.result = ctx_.names.text(lit);
        s.bind = std::make_pair(lit, result);
        return s;
    }
};

struct Keyed {
    ReductionState state;
    std::string key;
};

std::vector<Keyed> successors(const ReductionState& s, PiContext& ctx) {
    Process p = normalize(s.process, ctx.names);
    Stepper stepper(ctx, s.valueEnv);
    std::vector<Keyed> out;
    for (auto& succ : stepper.steps(p, 0)) {
        Process next = succ.extruded.empty() ? succ.proc : restrict(succ.extruded, succ.proc);
        Keyed k;
        auto norm = normalize_with_key(next, ctx.names);
        k.key = std::move(norm.key);
        k.state.process = std::move(norm.process);
        k.state.valueEnv = s.valueEnv;
        if (succ.bind) k.state.valueEnv.insert_or_assign(succ.bind->first, succ.bind->second);
        k.state.stepCount = s.stepCount + 1;
        k.state.trace = s.trace;
        k.state.trace.push_back(std::move(succ.label));
        out.push_back(std::move(k));
    }
    return out;
}

bool has_cycle(const std::vector<std::vector<std::size_t>>& edges) {
    enum : std::uint8_t { White, Grey, Black };
    std::vector<std::uint8_t> color(edges.size(), White);
    for (std::size_t root = 0; root < edges.size(); ++root) {
        if (color[root] != White) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = Grey;
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            if (i < edges[v].size()) {
                std::size_t w = edges[v][i++];
                if (color[w] == Grey) return true;
                if (color[w] == White) {
                    color[w] = Grey;
                    stack.emplace_back(w, 0);
                }
            } else {
                color[v] = Black;
                stack.pop_back();
            }
        }
    }
    return false;
}

void collect_literals(const Process& p, PiContext& ctx, std::map<Name, Value>& env) {
    for (Name n : free_names(p)) {
        if (auto v = ctx.names.literal_value(n)) env.emplace(n, *v);
    }
}

} // namespace

std::string StepLabel::to_string() const {
    std::string s;
    if (kind == Kind::Comm) {
        s = channel + "<";
        for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
        return s + ">";
    }
    s = channel + "(";
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
    return s + ")=" + result;
}

ReductionState initial_state(const Process& p, PiContext& ctx) {
    ReductionState s;
    s.process = normalize(p, ctx.names);
    collect_literals(s.process, ctx, s.valueEnv);
    return s;
}

std::vector<ReductionState> reduce_step(const ReductionState& s, PiContext& ctx) {
    std::vector<ReductionState> out;
    for (auto& k : successors(s, ctx)) out.push_back(std::move(k.state));
    return out;
}

ReductionResult reduce_all(const ReductionState& s, PiContext& ctx, std::size_t maxSteps, std::size_t nodeLimit) {
    ReductionResult result;
    std::vector<ReductionState> states;
    std::vector<std::vector<std::size_t>> edges;
    std::unordered_map<std::string, std::size_t> seen;
    std::deque<std::size_t> frontier;

    ReductionState start = s;
    auto norm = normalize_with_key(s.process, ctx.names);
    start.process = norm.process;
    seen.emplace(std::move(norm.key), 0);
    states.push_back(std::move(start));
    edges.emplace_back();
    frontier.push_back(0);

    while (!frontier.empty()) {
        if (result.transitions >= maxSteps) break;
        const std::size_t cur = frontier.front();
        frontier.pop_front();
        auto next = successors(states[cur], ctx);
        result.transitions += next.size();
        if (next.empty()) {
            result.irreducible.push_back(states[cur]);
            continue;
        }
        for (auto& k : next) {
            auto [it, inserted] = seen.emplace(k.key, states.size());
            if (inserted) {
                if (states.size() >= nodeLimit) {
                    result.explored = states.size();
                    result.nonTerminating = true;
                    throw ResourceLimitError("reduction explored more than " + std::to_string(nodeLimit) + " states",
                                             std::move(result));
                }
                states.push_back(std::move(k.state));
                edges.emplace_back();
                frontier.push_back(it->second);
            }
            edges[cur].push_back(it->second);
        }
    }
    result.explored = states.size();
    if (!frontier.empty()) {
        result.nonTerminating = true;
    } else if (has_cycle(edges)) {
        result.nonTerminating = true;
    }
    return result;
}

std::optional<Value> observe(const ReductionState& s, Name channel, const PiContext& ctx) {
    std::optional<Value> found;
    bool conflict = false;
    auto visit_item = [&](const Process& p, auto&& self) -> void {
        if (const auto* par_node = as<Parallel>(p)) {
            for (const auto& q : par_node->parts) self(q, self);
            return;
        }
        if (const auto* res = as<Restriction>(p)) {
            if (std::find(res->names.begin(), res->names.end(), channel) != res->names.end()) return;
            self(res->body, self);
            return;
        }
        if (const auto* rep = as<Replication>(p)) {
            self(rep->body, self);
            return;
        }
        const auto* out = as<Output>(p);
        if (!out || out->channel != channel || out->payload.size() != 1) return;
        Name x = out->payload.front();
        std::optional<Value> v;
        if (auto it = s.valueEnv.find(x); it != s.valueEnv.end()) v = it->second;
        else v = ctx.names.literal_value(x);
        if (!v) return;
        if (found && !(*found == *v)) conflict = true;
        found = v;
    };
    visit_item(s.process, visit_item);
    if (conflict) return std::nullopt;
    return found;
}

std::string env_to_string(const ReductionState& s, const NameTable& names) {
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& [n, v] : s.valueEnv) items.emplace_back(names.text(n), to_string(v));
    std::sort(items.begin(), items.end());
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i].first + "=" + items[i].second;
    }
    return out + "}";
}

} // namespace fuseforge::pi
