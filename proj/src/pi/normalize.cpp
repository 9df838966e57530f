#include <algorithm>
#include <numeric>

#include "fuseforge/errors.hpp"
#include "fuseforge/pi/semantics.hpp"

namespace fuseforge::pi {

namespace {

// Name-independent cleanup: nested sums and compositions spliced, nil
// operands dropped, directly nested restrictions merged, (v x)0 = 0.
Process simplify(const Process& p) {
    return std::visit(
        [&](const auto& n) -> Process {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Nil> || std::is_same_v<T, Call>) {
                return p;
            } else if constexpr (std::is_same_v<T, Output>) {
                return output(n.channel, n.payload, simplify(n.cont));
            } else if constexpr (std::is_same_v<T, Input>) {
                return input(n.channel, n.binders, simplify(n.cont));
            } else if constexpr (std::is_same_v<T, Apply>) {
                return apply(n.fn, n.args, n.result, simplify(n.cont));
            } else if constexpr (std::is_same_v<T, Replication>) {
                return replicate(simplify(n.body));
            } else if constexpr (std::is_same_v<T, Restriction>) {
                Process body = simplify(n.body);
                if (is_nil(body)) return body;
                std::vector<Name> names;
                for (Name x : n.names) {
                    if (std::find(names.begin(), names.end(), x) == names.end()) names.push_back(x);
                }
                if (const auto* inner = as<Restriction>(body)) {
                    // The inner binder shadows an equal outer one.
                    for (Name x : inner->names) {
                        names.erase(std::remove(names.begin(), names.end(), x), names.end());
                    }
                    names.insert(names.end(), inner->names.begin(), inner->names.end());
                    body = inner->body;
                }
                return restrict(std::move(names), body);
            } else {
                constexpr bool is_sum = std::is_same_v<T, Choice>;
                const auto& items = [&]() -> const std::vector<Process>& {
                    if constexpr (is_sum) return n.branches;
                    else return n.parts;
                }();
                std::vector<Process> flat;
                for (const auto& c : items) {
                    Process s = simplify(c);
                    if (is_nil(s)) continue;
                    if (const auto* same = as<T>(s)) {
                        const auto& sub = [&]() -> const std::vector<Process>& {
                            if constexpr (is_sum) return same->branches;
                            else return same->parts;
                        }();
                        flat.insert(flat.end(), sub.begin(), sub.end());
                    } else {
                        flat.push_back(std::move(s));
                    }
                }
                if (flat.empty()) return nil();
                if (flat.size() == 1) return flat.front();
                if constexpr (is_sum) return choice(std::move(flat));
                else return par(std::move(flat));
            }
        },
        p->v);
}

struct Canon {
    Process proc;
    std::string key;
    // Keys of the top-level parallel items when the block has no restriction.
    std::vector<std::string> parts;
    bool restricted = false;
    // Replication items: the body's parts, for P | !P absorption.
    bool is_rep = false;
    std::vector<std::string> rep_parts;
    bool rep_restricted = false;
    // Choice items: the alternatives, for splicing into an enclosing sum.
    std::vector<std::pair<Process, std::string>> alts;
};

// Scoped renaming from names in the input process to names in the output.
class Scope {
public:
    void push(std::uint32_t from, Name to) { stack_.emplace_back(from, to); }
    void pop(std::size_t count = 1) { stack_.resize(stack_.size() - count); }
    std::size_t depth() const { return stack_.size(); }
    void truncate(std::size_t depth) { stack_.resize(depth); }

    Name resolve(Name n) const {
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            if (it->first == n.id) return it->second;
        }
        return n;
    }

private:
    std::vector<std::pair<std::uint32_t, Name>> stack_;
};

struct RawItem {
    Process p;
    std::vector<std::pair<std::uint32_t, int>> renames;  // name id -> block slot
    std::vector<int> uses;  // block slots free in p
};

// Upper bound on orderings tried for restricted names that the signature
// refinement cannot tell apart.
constexpr std::size_t kMaxTieCandidates = 720;

class Canonicalizer {
public:
    explicit Canonicalizer(NameTable& names) : names_(names) {}

    Canon block(const Process& p, std::size_t level, Scope& scope) {
        std::vector<RawItem> items;
        std::vector<Name> hints;
        std::vector<std::pair<std::uint32_t, int>> renames;
        flatten(p, renames, hints, items);
        const int nslots = static_cast<int>(hints.size());
        for (auto& it : items) {
            for (Name f : free_names(it.p)) {
                for (auto r = it.renames.rbegin(); r != it.renames.rend(); ++r) {
                    if (r->first == f.id) {
                        if (std::find(it.uses.begin(), it.uses.end(), r->second) == it.uses.end()) {
                            it.uses.push_back(r->second);
                        }
                        break;
                    }
                }
            }
        }

        // Provisional pass: block names keep their identity, so keys decide
        // syntactic equality for P | !P absorption.
        std::vector<Name> labels(nslots);
        for (int b = 0; b < nslots; ++b) labels[b] = names_.provisional(level + b);
        std::vector<Canon> prov = canon_items(items, labels, level + nslots, scope);
        std::vector<bool> removed(items.size(), false);
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (is_nil(prov[i].proc)) removed[i] = true;
        }
        absorb(prov, removed);

        std::vector<RawItem> live;
        std::vector<Canon> live_prov;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (!removed[i]) {
                live.push_back(std::move(items[i]));
                live_prov.push_back(std::move(prov[i]));
            }
        }
        std::vector<int> used;
        for (const auto& it : live) {
            for (int b : it.uses) used.push_back(b);
        }
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        const std::size_t k = used.size();

        if (k == 0) {
            if (nslots == 0) return assemble({}, std::move(live_prov), level);
            std::vector<Name> none(nslots, names_.mask());
            return assemble({}, canon_items(live, none, level, scope), level);
        }

        const std::size_t inner = level + k;
        // Masked keys hide which restricted name is which; a name's signature
        // is the sorted keys of the items using it, with that name marked.
        std::vector<std::vector<std::string>> sig(nslots);
        for (int b : used) {
            std::vector<Name> marked(nslots, names_.mask());
            marked[b] = names_.mark();
            for (const auto& it : live) {
                if (std::find(it.uses.begin(), it.uses.end(), b) == it.uses.end()) continue;
                sig[b].push_back(canon_item_with(it, marked, inner, scope).key);
            }
            std::sort(sig[b].begin(), sig[b].end());
        }
        std::vector<int> order = used;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sig[a] < sig[b]; });

        std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) of ties
        std::size_t candidates = 1;
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i + 1;
            while (j < order.size() && sig[order[j]] == sig[order[i]]) ++j;
            if (j - i > 1) {
                groups.emplace_back(i, j);
                for (std::size_t f = 2; f <= j - i && candidates <= kMaxTieCandidates; ++f) candidates *= f;
            }
            i = j;
        }
        const bool exhaustive = candidates <= kMaxTieCandidates;

        std::optional<Canon> best;
        std::vector<int> perm = order;
        for (;;) {
            std::vector<Name> final_labels(nslots, names_.mask());
            std::vector<Name> bound;
            for (std::size_t pos = 0; pos < perm.size(); ++pos) {
                final_labels[perm[pos]] = names_.canonical(level + pos);
                bound.push_back(final_labels[perm[pos]]);
            }
            Canon c = assemble(bound, canon_items(live, final_labels, inner, scope), level);
            if (!best || c.key < best->key) best = std::move(c);
            if (!exhaustive || !next_candidate(perm, groups)) break;
        }
        return std::move(*best);
    }

private:
    NameTable& names_;

    void flatten(const Process& p, std::vector<std::pair<std::uint32_t, int>>& renames, std::vector<Name>& hints,
                 std::vector<RawItem>& out) {
        if (is_nil(p)) return;
        if (const auto* par_node = as<Parallel>(p)) {
            for (const auto& q : par_node->parts) flatten(q, renames, hints, out);
            return;
        }
        if (const auto* res = as<Restriction>(p)) {
            for (Name x : res->names) {
                renames.emplace_back(x.id, static_cast<int>(hints.size()));
                hints.push_back(x);
            }
            flatten(res->body, renames, hints, out);
            renames.resize(renames.size() - res->names.size());
            return;
        }
        out.push_back(RawItem{p, renames, {}});
    }

    static bool next_candidate(std::vector<int>& perm, const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
        for (auto g = groups.rbegin(); g != groups.rend(); ++g) {
            if (std::next_permutation(perm.begin() + g->first, perm.begin() + g->second)) return true;
            // next_permutation wrapped this group back to sorted order; carry.
        }
        return false;
    }

    void absorb(const std::vector<Canon>& prov, std::vector<bool>& removed) {
        std::vector<std::size_t> reps;
        for (std::size_t i = 0; i < prov.size(); ++i) {
            if (prov[i].is_rep && !prov[i].rep_restricted && !prov[i].rep_parts.empty()) reps.push_back(i);
        }
        std::sort(reps.begin(), reps.end(), [&](auto a, auto b) { return prov[a].key < prov[b].key; });
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t r : reps) {
                if (removed[r]) continue;
                std::vector<std::size_t> hit;
                bool ok = true;
                for (const auto& need : prov[r].rep_parts) {
                    bool found = false;
                    for (std::size_t j = 0; j < prov.size(); ++j) {
                        if (j == r || removed[j] || prov[j].key != need) continue;
                        if (std::find(hit.begin(), hit.end(), j) != hit.end()) continue;
                        hit.push_back(j);
                        found = true;
                        break;
                    }
                    if (!found) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    for (std::size_t j : hit) removed[j] = true;
                    changed = true;
                }
            }
        }
    }

    Canon canon_item_with(const RawItem& it, const std::vector<Name>& labels, std::size_t level, Scope& scope) {
        for (const auto& [id, slot] : it.renames) scope.push(id, labels[slot]);
        Canon c = item(it.p, level, scope);
        scope.pop(it.renames.size());
        return c;
    }

    std::vector<Canon> canon_items(const std::vector<RawItem>& items, const std::vector<Name>& labels,
                                   std::size_t level, Scope& scope) {
        std::vector<Canon> out;
        out.reserve(items.size());
        for (const auto& it : items) out.push_back(canon_item_with(it, labels, level, scope));
        return out;
    }

    Canon assemble(const std::vector<Name>& bound, std::vector<Canon> items, std::size_t level) {
        (void)level;
        items.erase(std::remove_if(items.begin(), items.end(), [](const Canon& c) { return is_nil(c.proc); }),
                    items.end());
        std::sort(items.begin(), items.end(), [](const Canon& a, const Canon& b) { return a.key < b.key; });
        Canon out;
        if (items.empty()) {
            out.proc = nil();
            out.key = "0";
            return out;
        }
        if (items.size() == 1 && bound.empty()) {
            Canon single = std::move(items.front());
            single.parts = {single.key};
            single.restricted = false;
            return single;
        }
        std::string body_key;
        Process body;
        if (items.size() == 1) {
            body = items.front().proc;
            body_key = items.front().key;
        } else {
            std::vector<Process> ps;
            body_key = "(par";
            for (auto& c : items) {
                ps.push_back(c.proc);
                body_key += ' ';
                body_key += c.key;
            }
            body_key += ')';
            body = par(std::move(ps));
        }
        if (bound.empty()) {
            for (auto& c : items) out.parts.push_back(c.key);
            out.proc = body;
            out.key = std::move(body_key);
            return out;
        }
        out.restricted = true;
        out.proc = restrict(bound, body);
        out.key = "(new (";
        for (std::size_t i = 0; i < bound.size(); ++i) {
            if (i) out.key += ' ';
            out.key += names_.text(bound[i]);
        }
        out.key += ") " + body_key + ")";
        return out;
    }

    std::string names_text(const std::vector<Name>& ns) const {
        std::string s = "(";
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (i) s += ' ';
            s += names_.text(ns[i]);
        }
        return s + ")";
    }

    std::vector<Name> resolve_all(const std::vector<Name>& ns, const Scope& scope) const {
        std::vector<Name> out;
        out.reserve(ns.size());
        for (Name n : ns) out.push_back(scope.resolve(n));
        return out;
    }

    Canon binder_cont(const std::vector<Name>& binders, const Process& cont, std::size_t level, Scope& scope,
                      std::vector<Name>& bound_out) {
        for (std::size_t i = 0; i < binders.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (binders[i] == binders[j]) {
                    throw StructuralError("duplicate binder " + names_.text(binders[i]) + " in input prefix");
                }
            }
        }
        for (std::size_t i = 0; i < binders.size(); ++i) {
            bound_out.push_back(names_.canonical(level + i));
            scope.push(binders[i].id, bound_out.back());
        }
        Canon c = block(cont, level + binders.size(), scope);
        scope.pop(binders.size());
        return c;
    }

    Canon item(const Process& p, std::size_t level, Scope& scope) {
        Canon out;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Output>) {
                    Name ch = scope.resolve(n.channel);
                    auto payload = resolve_all(n.payload, scope);
                    Canon c = block(n.cont, level, scope);
                    out.key = "(out " + names_.text(ch) + ' ' + names_text(payload) + ' ' + c.key + ')';
                    out.proc = output(ch, std::move(payload), c.proc);
                } else if constexpr (std::is_same_v<T, Input>) {
                    Name ch = scope.resolve(n.channel);
                    std::vector<Name> bound;
                    Canon c = binder_cont(n.binders, n.cont, level, scope, bound);
                    out.key = "(in " + names_.text(ch) + ' ' + names_text(bound) + ' ' + c.key + ')';
                    out.proc = input(ch, std::move(bound), c.proc);
                } else if constexpr (std::is_same_v<T, Apply>) {
                    auto args = resolve_all(n.args, scope);
                    std::vector<Name> bound;
                    Canon c = binder_cont({n.result}, n.cont, level, scope, bound);
                    out.key = "(apply " + n.fn + ' ' + names_text(args) + ' ' + names_.text(bound.front()) + ' ' +
                              c.key + ')';
                    out.proc = apply(n.fn, std::move(args), bound.front(), c.proc);
                } else if constexpr (std::is_same_v<T, Call>) {
                    auto args = resolve_all(n.args, scope);
                    out.key = "(call " + n.def + ' ' + names_text(args) + ')';
                    out.proc = call(n.def, std::move(args));
                } else if constexpr (std::is_same_v<T, Replication>) {
                    Canon body = block(n.body, level, scope);
                    out.key = "(rep " + body.key + ')';
                    out.proc = replicate(body.proc);
                    out.is_rep = true;
                    out.rep_parts = body.parts;
                    out.rep_restricted = body.restricted;
                } else if constexpr (std::is_same_v<T, Choice>) {
                    std::vector<std::pair<Process, std::string>> alts;
                    for (const auto& b : n.branches) {
                        Canon c = block(b, level, scope);
                        if (is_nil(c.proc)) continue;
                        if (!c.alts.empty()) {
                            alts.insert(alts.end(), c.alts.begin(), c.alts.end());
                        } else {
                            alts.emplace_back(c.proc, c.key);
                        }
                    }
                    std::sort(alts.begin(), alts.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
                    if (alts.empty()) {
                        out.proc = nil();
                        out.key = "0";
                        return;
                    }
                    if (alts.size() == 1) {
                        out.proc = alts.front().first;
                        out.key = alts.front().second;
                        return;
                    }
                    std::vector<Process> ps;
                    out.key = "(sum";
                    for (const auto& [proc, key] : alts) {
                        ps.push_back(proc);
                        out.key += ' ';
                        out.key += key;
                    }
                    out.key += ')';
                    out.proc = choice(std::move(ps));
                    out.alts = std::move(alts);
                } else if constexpr (std::is_same_v<T, Nil>) {
                    out.proc = nil();
                    out.key = "0";
                } else {
                    // Parallel and Restriction never reach here: flatten splits them.
                    Canon c = block(p, level, scope);
                    out = std::move(c);
                }
            },
            p->v);
        return out;
    }
};

Canon canonicalize(const Process& p, NameTable& names) {
    Canonicalizer c(names);
    Scope scope;
    return c.block(simplify(p), 0, scope);
}

} // namespace

Process normalize(const Process& p, NameTable& names) { return canonicalize(p, names).proc; }

std::string canonical_key(const Process& p, NameTable& names) { return canonicalize(p, names).key; }

Normalized normalize_with_key(const Process& p, NameTable& names) {
    Canon c = canonicalize(p, names);
    return Normalized{std::move(c.proc), std::move(c.key)};
}

} // namespace fuseforge::pi
