#include "fuseforge/pi/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <memory>
#include <optional>

#include "fuseforge/errors.hpp"

namespace fuseforge::pi {

namespace {

struct Sx {
    bool is_atom = true;
    std::string atom;
    std::vector<Sx> list;
    int line = 1;
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<Sx> read_all() {
        std::vector<Sx> out;
        skip();
        while (pos_ < text_.size()) {
            out.push_back(read());
            skip();
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (c == '\n') ++line_;
                ++pos_;
            } else {
                break;
            }
        }
    }

    Sx read() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("line " + std::to_string(line_) + ": unexpected end of input");
        Sx node;
        node.line = line_;
        if (text_[pos_] == ')') throw ParseError("line " + std::to_string(line_) + ": unexpected ')'");
        if (text_[pos_] == '(') {
            ++pos_;
            node.is_atom = false;
            for (;;) {
                skip();
                if (pos_ >= text_.size()) throw ParseError("line " + std::to_string(node.line) + ": unclosed '('");
                if (text_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                node.list.push_back(read());
            }
            return node;
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
               text_[pos_] != ')' && text_[pos_] != ';') {
            ++pos_;
        }
        node.atom = std::string(text_.substr(start, pos_ - start));
        return node;
    }
};

class Builder {
public:
    explicit Builder(PiContext& ctx) : ctx_(ctx) {}

    Process process(const Sx& s) {
        if (s.is_atom) {
            if (s.atom == "0") return nil();
            fail(s, "expected a process, got '" + s.atom + "'");
        }
        if (s.list.empty() || !s.list[0].is_atom) fail(s, "expected a keyword after '('");
        const std::string& kw = s.list[0].atom;
        if (kw == "out" || kw == "in") {
            arity(s, 4);
            Name ch = name(s.list[1]);
            auto ns = names(s.list[2]);
            Process cont = process(s.list[3]);
            return kw == "out" ? output(ch, std::move(ns), cont) : input(ch, std::move(ns), cont);
        }
        if (kw == "sum" || kw == "par") {
            if (s.list.size() < 2) fail(s, "'" + kw + "' needs at least one operand");
            std::vector<Process> ps;
            for (std::size_t i = 1; i < s.list.size(); ++i) ps.push_back(process(s.list[i]));
            if (ps.size() == 1) return ps.front();
            return kw == "sum" ? choice(std::move(ps)) : par(std::move(ps));
        }
        if (kw == "new") {
            arity(s, 3);
            return restrict(names(s.list[1]), process(s.list[2]));
        }
        if (kw == "rep") {
            arity(s, 2);
            return replicate(process(s.list[1]));
        }
        if (kw == "apply") {
            arity(s, 5);
            return apply(atom(s.list[1]), names(s.list[2]), name(s.list[3]), process(s.list[4]));
        }
        if (kw == "call") {
            arity(s, 3);
            return call(atom(s.list[1]), names(s.list[2]));
        }
        fail(s, "unknown form '" + kw + "'");
    }

    bool definition(const Sx& s) {
        if (s.is_atom || s.list.empty() || !s.list[0].is_atom || s.list[0].atom != "def") return false;
        arity(s, 4);
        ctx_.define(atom(s.list[1]), names(s.list[2]), process(s.list[3]));
        return true;
    }

private:
    PiContext& ctx_;

    [[noreturn]] static void fail(const Sx& s, const std::string& msg) {
        throw ParseError("line " + std::to_string(s.line) + ": " + msg);
    }

    static void arity(const Sx& s, std::size_t n) {
        if (s.list.size() != n) {
            fail(s, "'" + s.list[0].atom + "' takes " + std::to_string(n - 1) + " operands");
        }
    }

    static const std::string& atom(const Sx& s) {
        if (!s.is_atom) fail(s, "expected a name");
        return s.atom;
    }

    Name name(const Sx& s) {
        const std::string& a = atom(s);
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
        if (ec == std::errc() && ptr == a.data() + a.size()) return ctx_.names.literal(Value{v});
        try {
            return ctx_.names.intern(a);
        } catch (const StructuralError& e) {
            fail(s, e.what());
        }
    }

    std::vector<Name> names(const Sx& s) {
        if (s.is_atom) fail(s, "expected a parenthesized name list");
        std::vector<Name> out;
        for (const auto& x : s.list) out.push_back(name(x));
        return out;
    }
};

} // namespace

Process parse_program(std::string_view text, PiContext& ctx) {
    auto forms = Reader(text).read_all();
    Builder b(ctx);
    std::optional<Process> main;
    for (const auto& f : forms) {
        if (b.definition(f)) continue;
        if (main) throw ParseError("line " + std::to_string(f.line) + ": more than one top-level process");
        main = b.process(f);
    }
    if (!main) throw ParseError("no process in input");
    return *main;
}

void register_builtins(PiContext& ctx) {
    auto ints = [](std::span<const Value> args) {
        std::vector<std::int64_t> xs;
        for (const auto& a : args) xs.push_back(as_int(a));
        if (xs.empty()) throw ContractError("builtin needs at least one argument");
        return xs;
    };
    ctx.register_function("add", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        std::int64_t s = 0;
        for (auto x : xs) s += x;
        return s;
    });
    ctx.register_function("mul", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        std::int64_t s = 1;
        for (auto x : xs) s *= x;
        return s;
    });
    ctx.register_function("sub", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        std::int64_t s = xs.front();
        for (std::size_t i = 1; i < xs.size(); ++i) s -= xs[i];
        return s;
    });
    ctx.register_function("rsub", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        std::int64_t s = xs.back();
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) s -= xs[i];
        return s;
    });
    ctx.register_function("min", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        return *std::min_element(xs.begin(), xs.end());
    });
    ctx.register_function("max", [ints](std::span<const Value> a) -> Value {
        auto xs = ints(a);
        return *std::max_element(xs.begin(), xs.end());
    });
    ctx.register_function("id", [ints](std::span<const Value> a) -> Value { return ints(a).front(); });
}

} // namespace fuseforge::pi
