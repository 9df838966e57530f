#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fuseforge/value.hpp"

namespace fuseforge::pi {

struct Name {
    std::uint32_t id = 0;

    auto operator<=>(const Name&) const = default;
};

struct NameHash {
    std::size_t operator()(Name n) const noexcept { return n.id; }
};

// Interns user names and hands out names that can never collide with them:
// fresh names (from restriction unfolding), literal names (one per value) and
// the reserved labels the canonicalizer uses.
class NameTable {
public:
    NameTable();

    // User-facing names. Rejects empty text, whitespace, parentheses and the
    // reserved leading characters % ? ! # '.
    Name intern(std::string_view text);

    // A name distinct from every other name, printed as "<hint>'<n>".
    Name fresh(Name hint);

    // The name standing for a concrete value; interned by value text.
    Name literal(const Value& v);
    std::optional<Value> literal_value(Name n) const;

    // Bound-name labels used by normalize: "%<level>".
    Name canonical(std::size_t level);
    // Provisional block-name labels: "#<level>".
    Name provisional(std::size_t level);
    Name mask() const { return mask_; }
    Name mark() const { return mark_; }

    const std::string& text(Name n) const { return texts_.at(n.id); }
    bool is_fresh(Name n) const { return kinds_.at(n.id) == Kind::Fresh; }
    std::size_t size() const { return texts_.size(); }

private:
    enum class Kind : std::uint8_t { User, Fresh, Literal, Reserved };

    Name add(std::string text, Kind kind, bool indexed);
    Name reserved(const std::string& text);

    std::vector<std::string> texts_;
    std::vector<Kind> kinds_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::unordered_map<std::uint32_t, Value> literals_;
    std::vector<Name> canonical_;
    std::vector<Name> provisional_;
    std::uint64_t fresh_counter_ = 0;
    Name mask_;
    Name mark_;
};

} // namespace fuseforge::pi
