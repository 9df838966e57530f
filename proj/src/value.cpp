#include "fuseforge/value.hpp"

#include <bit>
#include <cstdio>

#include "fuseforge/errors.hpp"
#include "fuseforge/rng.hpp"

namespace fuseforge {

TypeTag tag_of(const Value& v) { return static_cast<TypeTag>(v.index()); }

const char* tag_name(TypeTag t) {
    switch (t) {
        case TypeTag::Bool: return "bool";
        case TypeTag::Int: return "int64";
        case TypeTag::Float: return "float64";
        case TypeTag::Record: return "record";
    }
    return "?";
}

namespace {

std::string scalar_to_string(const Scalar& s) {
    if (const auto* b = std::get_if<bool>(&s)) return *b ? "true" : "false";
    if (const auto* i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(s));
    std::string out = buf;
    // Keep floats distinguishable from integers in text form.
    if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
    return out;
}

std::uint64_t scalar_bits(const Scalar& s) {
    if (const auto* b = std::get_if<bool>(&s)) return *b ? 1 : 0;
    if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<std::uint64_t>(*i);
    return std::bit_cast<std::uint64_t>(std::get<double>(s));
}

Scalar to_scalar(const Value& v) {
    switch (v.index()) {
        case 0: return std::get<bool>(v);
        case 1: return std::get<std::int64_t>(v);
        default: return std::get<double>(v);
    }
}

[[noreturn]] void mismatch(TypeTag want, const Value& got) {
    throw ContractError(std::string("expected ") + tag_name(want) + " value, got " +
                        tag_name(tag_of(got)));
}

} // namespace

std::string to_string(const Value& v) {
    if (const auto* r = std::get_if<Record>(&v)) {
        std::string out = "{";
        for (std::size_t i = 0; i < r->fields.size(); ++i) {
            if (i) out += ',';
            out += scalar_to_string(r->fields[i]);
        }
        return out + "}";
    }
    return scalar_to_string(to_scalar(v));
}

std::uint64_t hash_combine_value(std::uint64_t h, const Value& v) {
    h = mix64(h ^ (v.index() + 1));
    if (const auto* r = std::get_if<Record>(&v)) {
        h = mix64(h ^ r->fields.size());
        for (const auto& f : r->fields) h = mix64(h ^ (f.index() + 0x100) ^ mix64(scalar_bits(f)));
        return h;
    }
    return mix64(h ^ mix64(scalar_bits(to_scalar(v))));
}

bool as_bool(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    mismatch(TypeTag::Bool, v);
}

std::int64_t as_int(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    mismatch(TypeTag::Int, v);
}

double as_float(const Value& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    mismatch(TypeTag::Float, v);
}

const Record& as_record(const Value& v) {
    if (const auto* r = std::get_if<Record>(&v)) return *r;
    mismatch(TypeTag::Record, v);
}

std::int64_t field_int(const Record& r, std::size_t i) {
    if (i < r.fields.size()) {
        if (const auto* x = std::get_if<std::int64_t>(&r.fields[i])) return *x;
    }
    throw ContractError("record field " + std::to_string(i) + " is not an int64");
}

double field_float(const Record& r, std::size_t i) {
    if (i < r.fields.size()) {
        if (const auto* x = std::get_if<double>(&r.fields[i])) return *x;
    }
    throw ContractError("record field " + std::to_string(i) + " is not a float64");
}

} // namespace fuseforge
