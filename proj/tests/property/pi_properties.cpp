#include <doctest.h>

#include <algorithm>

#include "fuseforge/pi/semantics.hpp"
#include "fuseforge/pi/translate.hpp"
#include "fuseforge/rng.hpp"

using namespace fuseforge;
using namespace fuseforge::pi;

namespace {

// Random guarded processes over three free channels. Every channel carries
// exactly one name so any generated process is arity-consistent. Bound names
// are "<prefix><k>", so two generations with the same rng state and different
// prefixes are alpha-variants of each other.
class ProcessGen {
public:
    ProcessGen(PiContext& ctx, std::uint64_t seed, std::string prefix)
        : ctx_(ctx), rng_(seed), prefix_(std::move(prefix)) {
        for (const char* f : {"a", "b", "c"}) free_.push_back(ctx_.names.intern(f));
    }

    Process any(int depth) { return any(depth, free_); }

    Process prefix(int depth, const std::vector<Name>& scope) {
        const Name ch = pick(scope);
        if (rng_.bernoulli(0.5)) return output(ch, {pick(scope)}, cont(depth, scope));
        const Name x = bound();
        auto inner = scope;
        inner.push_back(x);
        return input(ch, {x}, cont(depth, inner));
    }

private:
    Process cont(int depth, const std::vector<Name>& scope) {
        return depth <= 1 || rng_.bernoulli(0.3) ? nil() : any(depth - 1, scope);
    }

    Process any(int depth, const std::vector<Name>& scope) {
        if (depth <= 1) return rng_.bernoulli(0.2) ? nil() : prefix(1, scope);
        switch (rng_.below(6)) {
            case 0:
            case 1: return prefix(depth, scope);
            case 2: {
                std::vector<Process> branches;
                for (std::uint64_t k = 0, n = 2 + rng_.below(2); k < n; ++k) branches.push_back(prefix(depth - 1, scope));
                return choice(std::move(branches));
            }
            case 3: {
                std::vector<Process> parts;
                for (std::uint64_t k = 0, n = 2 + rng_.below(2); k < n; ++k) parts.push_back(any(depth - 1, scope));
                return par(std::move(parts));
            }
            case 4: {
                std::vector<Name> names{bound()};
                if (rng_.bernoulli(0.3)) names.push_back(bound());
                auto inner = scope;
                inner.insert(inner.end(), names.begin(), names.end());
                return restrict(names, any(depth - 1, inner));
            }
            default: return replicate(prefix(depth - 1, scope));
        }
    }

    Name pick(const std::vector<Name>& scope) { return scope[rng_.below(scope.size())]; }
    Name bound() { return ctx_.names.intern(prefix_ + std::to_string(next_++)); }

    PiContext& ctx_;
    SplitMix64 rng_;
    std::string prefix_;
    std::vector<Name> free_;
    int next_ = 0;
};

std::vector<Process> children_of(const Process& p) {
    if (const auto* c = as<Choice>(p)) return c->branches;
    if (const auto* c = as<Parallel>(p)) return c->parts;
    return {};
}

// A random congruent variant of p, applying the axioms at random positions.
class Scrambler {
public:
    Scrambler(PiContext& ctx, std::uint64_t seed) : ctx_(ctx), rng_(seed) {}

    Process operator()(const Process& p) {
        return std::visit(
            [&](const auto& n) -> Process {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Nil>) {
                    switch (rng_.below(3)) {
                        case 0: return restrict(fresh(), nil());
                        case 1: return par(nil(), nil());
                        default: return nil();
                    }
                } else if constexpr (std::is_same_v<T, Output>) {
                    return output(n.channel, n.payload, (*this)(n.cont));
                } else if constexpr (std::is_same_v<T, Input>) {
                    return input(n.channel, n.binders, (*this)(n.cont));
                } else if constexpr (std::is_same_v<T, Choice>) {
                    // Sum branches stay guarded; only a bare 0 may be added.
                    std::vector<Process> bs;
                    for (const auto& b : n.branches) bs.push_back(guarded(b));
                    if (rng_.bernoulli(0.3)) bs.push_back(nil());
                    shuffle(bs);
                    return regroup(bs, [](Process a, Process b) { return choice(std::move(a), std::move(b)); });
                } else if constexpr (std::is_same_v<T, Parallel>) {
                    std::vector<Process> ps;
                    for (const auto& q : n.parts) ps.push_back((*this)(q));
                    if (rng_.bernoulli(0.3)) ps.push_back(nil());
                    shuffle(ps);
                    return regroup(ps, [](Process a, Process b) { return par(std::move(a), std::move(b)); });
                } else if constexpr (std::is_same_v<T, Restriction>) {
                    return scope(n);
                } else if constexpr (std::is_same_v<T, Replication>) {
                    if (rng_.bernoulli(0.4)) return par(n.body, p);
                    return replicate(guarded(n.body));
                } else {
                    return p;
                }
            },
            p->v);
    }

private:
    Process guarded(const Process& p) {
        if (const auto* o = as<Output>(p)) return output(o->channel, o->payload, (*this)(o->cont));
        if (const auto* i = as<Input>(p)) return input(i->channel, i->binders, (*this)(i->cont));
        return p;
    }

    // RES-SWAP, nesting, and RES-SCOPE for parts that do not mention the names.
    Process scope(const Restriction& r) {
        std::vector<Name> names = r.names;
        shuffle(names);
        Process body = (*this)(r.body);
        if (const auto* pr = as<Parallel>(r.body); pr != nullptr && rng_.bernoulli(0.5)) {
            std::vector<Process> inside, outside;
            for (const auto& q : pr->parts) {
                const auto fn = free_names(q);
                const bool mentions = std::any_of(names.begin(), names.end(), [&](Name x) { return fn.count(x) != 0; });
                (mentions ? inside : outside).push_back((*this)(q));
            }
            if (!outside.empty()) {
                Process in = inside.empty() ? nil() : (inside.size() == 1 ? inside.front() : par(inside));
                outside.push_back(restrict(names, in));
                return par(outside);
            }
        }
        if (names.size() > 1 && rng_.bernoulli(0.5)) {
            for (auto it = names.rbegin(); it != names.rend(); ++it) body = restrict(*it, body);
            return body;
        }
        return restrict(names, body);
    }

    template <class Join>
    Process regroup(std::vector<Process> xs, Join join) {
        while (xs.size() > 1) {
            const std::size_t i = rng_.below(xs.size() - 1);
            xs[i] = join(xs[i], xs[i + 1]);
            xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        }
        return xs.front();
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng_.below(k)]);
    }

    Name fresh() { return ctx_.names.intern("dead" + std::to_string(counter_++)); }

    PiContext& ctx_;
    SplitMix64 rng_;
    int counter_ = 0;
};

std::string key(PiContext& ctx, const Process& p) { return canonical_key(p, ctx.names); }

std::vector<std::string> successor_keys(PiContext& ctx, const Process& p) {
    std::vector<std::string> keys;
    for (const auto& s : reduce_step(initial_state(p, ctx), ctx)) keys.push_back(key(ctx, s.process));
    std::sort(keys.begin(), keys.end());
    return keys;
}

constexpr int kProcessCases = 200;

} // namespace

TEST_SUITE("congruence") {
    TEST_CASE("normalization is idempotent on random processes") {
        for (int i = 0; i < kProcessCases; ++i) {
            PiContext ctx;
            ProcessGen gen(ctx, derive_seed(1, {static_cast<std::uint64_t>(i)}), "x");
            const Process p = gen.any(5);
            const Process once = normalize(p, ctx.names);
            const Process twice = normalize(once, ctx.names);
            CAPTURE(to_sexpr(p, ctx.names));
            CHECK(to_sexpr(twice, ctx.names) == to_sexpr(once, ctx.names));
        }
    }

    TEST_CASE("every axiom instance normalizes to one canonical form") {
        for (int i = 0; i < kProcessCases; ++i) {
            PiContext ctx;
            ProcessGen gen(ctx, derive_seed(2, {static_cast<std::uint64_t>(i)}), "x");
            const Process P = gen.any(3), Q = gen.any(3), R = gen.any(3);
            const Process G = gen.prefix(3, {ctx.names.intern("a"), ctx.names.intern("b")});
            const Process H = gen.prefix(3, {ctx.names.intern("b"), ctx.names.intern("c")});
            const Process K = gen.prefix(3, {ctx.names.intern("a"), ctx.names.intern("c")});
            CAPTURE(to_sexpr(P, ctx.names));
            CAPTURE(to_sexpr(Q, ctx.names));

            CHECK(key(ctx, choice(G, H)) == key(ctx, choice(H, G)));
            CHECK(key(ctx, choice(choice(G, H), K)) == key(ctx, choice(G, choice(H, K))));
            CHECK(key(ctx, choice(G, nil())) == key(ctx, G));
            CHECK(key(ctx, par(P, Q)) == key(ctx, par(Q, P)));
            CHECK(key(ctx, par(par(P, Q), R)) == key(ctx, par(P, par(Q, R))));
            CHECK(key(ctx, par(P, nil())) == key(ctx, P));

            const Name u = ctx.names.intern("u"), v = ctx.names.intern("v");
            const Process Qu = par(Q, output(u, {v}));
            CHECK(key(ctx, restrict(u, restrict(v, Qu))) == key(ctx, restrict(v, restrict(u, Qu))));
            // u does not occur in P.
            CHECK(key(ctx, restrict(u, par(P, Qu))) == key(ctx, par(P, restrict(u, Qu))));
            CHECK(key(ctx, restrict(u, nil())) == key(ctx, nil()));
            CHECK(key(ctx, replicate(G)) == key(ctx, par(G, replicate(G))));

            PiContext alphaCtx;
            const std::uint64_t seed = derive_seed(3, {static_cast<std::uint64_t>(i)});
            ProcessGen g1(alphaCtx, seed, "x"), g2(alphaCtx, seed, "z");
            CHECK(key(alphaCtx, g1.any(5)) == key(alphaCtx, g2.any(5)));
        }
    }

    TEST_CASE("random congruent variants share the canonical form and the successors") {
        for (int i = 0; i < kProcessCases; ++i) {
            PiContext ctx;
            ProcessGen gen(ctx, derive_seed(4, {static_cast<std::uint64_t>(i)}), "x");
            const Process p = gen.any(5);
            Scrambler scramble(ctx, derive_seed(5, {static_cast<std::uint64_t>(i)}));
            const Process q = scramble(p);
            CAPTURE(to_sexpr(p, ctx.names));
            CAPTURE(to_sexpr(q, ctx.names));
            REQUIRE(key(ctx, p) == key(ctx, q));
            CHECK(successor_keys(ctx, p) == successor_keys(ctx, q));
        }
    }
}

namespace {

// y = 3x + sum m_k^2 - 2 * sum m_k. Receivers race to the collector, so
// messages arrive in any order; the function may only treat them as a
// multiset, but it must still tell the state apart from the messages.
Value mix(std::span<const Value> args) {
    std::int64_t y = 3 * as_int(args.back());
    for (std::size_t k = 0; k + 1 < args.size(); ++k) {
        const std::int64_t m = as_int(args[k]);
        y += m * m - 2 * m;
    }
    return Value{y};
}

} // namespace

TEST_SUITE("oracle") {
    TEST_CASE("translated BSP systems reach one final environment") {
        for (int i = 0; i < 30; ++i) {
            SplitMix64 rng(derive_seed(6, {static_cast<std::uint64_t>(i)}));
            const auto agents = static_cast<AgentId>(1 + rng.below(3));
            const auto supersteps = static_cast<std::int32_t>(1 + rng.below(2));
            PiContext ctx;
            ctx.register_function("mix", mix);

            std::vector<std::int64_t> values(static_cast<std::size_t>(agents));
            std::vector<Process> parts;
            for (AgentId a = 0; a < agents; ++a) {
                values[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(rng.below(20)) - 10;
                const Name p0 = state_name(StateRef{a, 0}, ctx.names);
                parts.push_back(replicate(output(p0, {ctx.names.literal(Value{values[static_cast<std::size_t>(a)]})})));
            }
            for (std::int32_t t = 0; t < supersteps; ++t) {
                std::vector<std::int64_t> next(values.size());
                for (AgentId a = 0; a < agents; ++a) {
                    BehavioralEquation eq{StateRef{a, t}, "mix", {}, StateRef{a, t + 1}};
                    std::vector<Value> args;
                    for (AgentId b = 0; b < agents; ++b) {
                        if (b != a && rng.bernoulli(0.6)) {
                            eq.referenceSet.push_back(StateRef{b, t});
                            args.push_back(Value{values[static_cast<std::size_t>(b)]});
                        }
                    }
                    args.push_back(Value{values[static_cast<std::size_t>(a)]});
                    next[static_cast<std::size_t>(a)] = as_int(mix(args));
                    parts.push_back(translate_nonrecursive(eq, ctx));
                }
                values = next;
            }
            auto result = reduce_all(initial_state(par(parts), ctx), ctx, 1'000'000);
            CHECK_FALSE(result.nonTerminating);
            REQUIRE_FALSE(result.irreducible.empty());
            for (const auto& fin : result.irreducible) {
                for (AgentId a = 0; a < agents; ++a) {
                    const Name last = state_name(StateRef{a, supersteps}, ctx.names);
                    CHECK(observe(fin, last, ctx) == std::optional<Value>(values[static_cast<std::size_t>(a)]));
                }
            }
        }
    }
}
