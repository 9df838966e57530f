#include "fuseforge/pi/names.hpp"

#include <cctype>

#include "fuseforge/errors.hpp"

namespace fuseforge::pi {

NameTable::NameTable() {
    mask_ = reserved("?");
    mark_ = reserved("!");
}

Name NameTable::add(std::string text, Kind kind, bool indexed) {
    const auto id = static_cast<std::uint32_t>(texts_.size());
    if (indexed) index_.emplace(text, id);
    texts_.push_back(std::move(text));
    kinds_.push_back(kind);
    return Name{id};
}

Name NameTable::reserved(const std::string& text) {
    if (auto it = index_.find(text); it != index_.end()) return Name{it->second};
    return add(text, Kind::Reserved, true);
}

Name NameTable::intern(std::string_view text) {
    if (text.empty()) throw StructuralError("empty name");
    const char c0 = text.front();
    if (c0 == '%' || c0 == '?' || c0 == '!' || c0 == '#' || c0 == '\'') {
        throw StructuralError("name '" + std::string(text) + "' uses a reserved prefix");
    }
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '\'') {
            throw StructuralError("invalid character in name '" + std::string(text) + "'");
        }
    }
    std::string key(text);
    if (auto it = index_.find(key); it != index_.end()) return Name{it->second};
    return add(std::move(key), Kind::User, true);
}

Name NameTable::fresh(Name hint) {
    std::string base = text(hint);
    if (auto q = base.find('\''); q != std::string::npos) base.resize(q);
    if (kinds_.at(hint.id) == Kind::Reserved || kinds_.at(hint.id) == Kind::Literal) base = "v";
    return add(base + "'" + std::to_string(++fresh_counter_), Kind::Fresh, false);
}

Name NameTable::literal(const Value& v) {
    std::string text = to_string(v);
    if (auto it = index_.find(text); it != index_.end()) {
        if (!literals_.count(it->second)) literals_.emplace(it->second, v);
        return Name{it->second};
    }
    Name n = add(std::move(text), Kind::Literal, true);
    literals_.emplace(n.id, v);
    return n;
}

std::optional<Value> NameTable::literal_value(Name n) const {
    if (auto it = literals_.find(n.id); it != literals_.end()) return it->second;
    return std::nullopt;
}

Name NameTable::canonical(std::size_t level) {
    while (canonical_.size() <= level) canonical_.push_back(reserved("%" + std::to_string(canonical_.size())));
    return canonical_[level];
}

Name NameTable::provisional(std::size_t level) {
    while (provisional_.size() <= level) {
        provisional_.push_back(reserved("#" + std::to_string(provisional_.size())));
    }
    return provisional_[level];
}

} // namespace fuseforge::pi
