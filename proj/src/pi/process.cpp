#include "fuseforge/pi/process.hpp"

#include <algorithm>

#include "fuseforge/errors.hpp"

namespace fuseforge::pi {

namespace {

Process make(auto&& node) { return std::make_shared<const Node>(Node{std::forward<decltype(node)>(node)}); }

} // namespace

Process nil() {
    static const Process p = make(Nil{});
    return p;
}

Process output(Name channel, std::vector<Name> payload, Process cont) {
    return make(Output{channel, std::move(payload), std::move(cont)});
}

Process input(Name channel, std::vector<Name> binders, Process cont) {
    return make(Input{channel, std::move(binders), std::move(cont)});
}

Process choice(Process a, Process b) { return make(Choice{{std::move(a), std::move(b)}}); }
Process choice(std::vector<Process> branches) { return make(Choice{std::move(branches)}); }
Process par(Process a, Process b) { return make(Parallel{{std::move(a), std::move(b)}}); }
Process par(std::vector<Process> parts) { return make(Parallel{std::move(parts)}); }
Process restrict(Name n, Process body) { return make(Restriction{{n}, std::move(body)}); }
Process restrict(std::vector<Name> names, Process body) {
    return make(Restriction{std::move(names), std::move(body)});
}
Process replicate(Process body) { return make(Replication{std::move(body)}); }
Process apply(std::string fn, std::vector<Name> args, Name result, Process cont) {
    return make(Apply{std::move(fn), std::move(args), result, std::move(cont)});
}
Process call(std::string def, std::vector<Name> args) { return make(Call{std::move(def), std::move(args)}); }

bool is_nil(const Process& p) { return std::holds_alternative<Nil>(p->v); }

void PiContext::define(const std::string& id, std::vector<Name> params, Process body) {
    std::set<Name> seen;
    for (Name n : params) {
        if (!seen.insert(n).second) throw StructuralError("duplicate parameter in definition " + id);
    }
    definitions[id] = Definition{std::move(params), std::move(body)};
}

void PiContext::register_function(const std::string& id, HostFunction fn) { functions[id] = std::move(fn); }

Process PiContext::unfold(const Call& c) {
    auto it = definitions.find(c.def);
    if (it == definitions.end()) throw ConfigurationError("undefined process identifier " + c.def);
    const Definition& d = it->second;
    if (d.params.size() != c.args.size()) {
        throw StructuralError("identifier " + c.def + " expects " + std::to_string(d.params.size()) +
                              " names, got " + std::to_string(c.args.size()));
    }
    std::map<Name, Name> sigma;
    for (std::size_t i = 0; i < d.params.size(); ++i) {
        if (d.params[i] != c.args[i]) sigma[d.params[i]] = c.args[i];
    }
    return sigma.empty() ? d.body : substitute(d.body, sigma, names);
}

namespace {

void collect_free(const Process& p, std::set<Name>& out, std::vector<Name>& bound) {
    auto is_bound = [&](Name n) { return std::find(bound.begin(), bound.end(), n) != bound.end(); };
    auto use = [&](Name n) {
        if (!is_bound(n)) out.insert(n);
    };
    auto under = [&](const std::vector<Name>& binders, const Process& body) {
        bound.insert(bound.end(), binders.begin(), binders.end());
        collect_free(body, out, bound);
        bound.resize(bound.size() - binders.size());
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Output>) {
                use(n.channel);
                for (Name x : n.payload) use(x);
                collect_free(n.cont, out, bound);
            } else if constexpr (std::is_same_v<T, Input>) {
                use(n.channel);
                under(n.binders, n.cont);
            } else if constexpr (std::is_same_v<T, Choice>) {
                for (const auto& b : n.branches) collect_free(b, out, bound);
            } else if constexpr (std::is_same_v<T, Parallel>) {
                for (const auto& b : n.parts) collect_free(b, out, bound);
            } else if constexpr (std::is_same_v<T, Restriction>) {
                under(n.names, n.body);
            } else if constexpr (std::is_same_v<T, Replication>) {
                collect_free(n.body, out, bound);
            } else if constexpr (std::is_same_v<T, Apply>) {
                for (Name x : n.args) use(x);
                under({n.result}, n.cont);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (Name x : n.args) use(x);
            }
        },
        p->v);
}

struct Substituter {
    NameTable& names;

    Name map(Name n, const std::map<Name, Name>& s) const {
        auto it = s.find(n);
        return it == s.end() ? n : it->second;
    }

    std::vector<Name> map_all(const std::vector<Name>& ns, const std::map<Name, Name>& s) const {
        std::vector<Name> out;
        out.reserve(ns.size());
        for (Name n : ns) out.push_back(map(n, s));
        return out;
    }

    // Adjusts the substitution for a binder site; binders that would capture
    // a substituted name are renamed to fresh names.
    std::vector<Name> bind(const std::vector<Name>& binders, std::map<Name, Name>& s, const Process& body) {
        for (Name b : binders) s.erase(b);
        if (s.empty()) return binders;
        std::set<Name> range;
        std::set<Name> body_free = free_names(body);
        for (const auto& [from, to] : s) {
            if (body_free.count(from)) range.insert(to);
        }
        std::vector<Name> out = binders;
        for (Name& b : out) {
            if (range.count(b)) {
                Name fresh = names.fresh(b);
                s[b] = fresh;
                b = fresh;
            }
        }
        return out;
    }

    Process run(const Process& p, const std::map<Name, Name>& sigma) {
        if (sigma.empty()) return p;
        return std::visit(
            [&](const auto& n) -> Process {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Nil>) {
                    return p;
                } else if constexpr (std::is_same_v<T, Output>) {
                    return output(map(n.channel, sigma), map_all(n.payload, sigma), run(n.cont, sigma));
                } else if constexpr (std::is_same_v<T, Input>) {
                    auto s = sigma;
                    auto binders = bind(n.binders, s, n.cont);
                    return input(map(n.channel, sigma), std::move(binders), run(n.cont, s));
                } else if constexpr (std::is_same_v<T, Choice>) {
                    std::vector<Process> bs;
                    for (const auto& b : n.branches) bs.push_back(run(b, sigma));
                    return choice(std::move(bs));
                } else if constexpr (std::is_same_v<T, Parallel>) {
                    std::vector<Process> ps;
                    for (const auto& b : n.parts) ps.push_back(run(b, sigma));
                    return par(std::move(ps));
                } else if constexpr (std::is_same_v<T, Restriction>) {
                    auto s = sigma;
                    auto ns = bind(n.names, s, n.body);
                    return restrict(std::move(ns), run(n.body, s));
                } else if constexpr (std::is_same_v<T, Replication>) {
                    return replicate(run(n.body, sigma));
                } else if constexpr (std::is_same_v<T, Apply>) {
                    auto s = sigma;
                    auto r = bind({n.result}, s, n.cont);
                    return apply(n.fn, map_all(n.args, sigma), r.front(), run(n.cont, s));
                } else {
                    return call(n.def, map_all(n.args, sigma));
                }
            },
            p->v);
    }
};

void print(const Process& p, const NameTable& names, std::string& out) {
    auto names_list = [&](const std::vector<Name>& ns) {
        out += '(';
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (i) out += ' ';
            out += names.text(ns[i]);
        }
        out += ')';
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Nil>) {
                out += '0';
            } else if constexpr (std::is_same_v<T, Output>) {
                out += "(out " + names.text(n.channel) + ' ';
                names_list(n.payload);
                out += ' ';
                print(n.cont, names, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Input>) {
                out += "(in " + names.text(n.channel) + ' ';
                names_list(n.binders);
                out += ' ';
                print(n.cont, names, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Choice> || std::is_same_v<T, Parallel>) {
                out += std::is_same_v<T, Choice> ? "(sum" : "(par";
                const auto& items = [&]() -> const std::vector<Process>& {
                    if constexpr (std::is_same_v<T, Choice>) return n.branches;
                    else return n.parts;
                }();
                for (const auto& b : items) {
                    out += ' ';
                    print(b, names, out);
                }
                out += ')';
            } else if constexpr (std::is_same_v<T, Restriction>) {
                out += "(new ";
                names_list(n.names);
                out += ' ';
                print(n.body, names, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Replication>) {
                out += "(rep ";
                print(n.body, names, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Apply>) {
                out += "(apply " + n.fn + ' ';
                names_list(n.args);
                out += ' ' + names.text(n.result) + ' ';
                print(n.cont, names, out);
                out += ')';
            } else {
                out += "(call " + n.def + ' ';
                names_list(n.args);
                out += ')';
            }
        },
        p->v);
}

} // namespace

std::set<Name> free_names(const Process& p) {
    std::set<Name> out;
    std::vector<Name> bound;
    collect_free(p, out, bound);
    return out;
}

Process substitute(const Process& p, const std::map<Name, Name>& sigma, NameTable& names) {
    return Substituter{names}.run(p, sigma);
}

std::string to_sexpr(const Process& p, const NameTable& names) {
    std::string out;
    print(p, names, out);
    return out;
}

} // namespace fuseforge::pi
