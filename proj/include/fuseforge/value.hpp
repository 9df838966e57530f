#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fuseforge {

using Scalar = std::variant<bool, std::int64_t, double>;

// Small fixed-layout record. Workloads agree on the field order.
struct Record {
    std::vector<Scalar> fields;

    bool operator==(const Record&) const = default;
};

// Runtime-tagged value over the closed set of supported types.
using Value = std::variant<bool, std::int64_t, double, Record>;

enum class TypeTag : std::uint8_t { Bool, Int, Float, Record };

TypeTag tag_of(const Value& v);
const char* tag_name(TypeTag t);

std::string to_string(const Value& v);

// Folds the bit pattern of a value into a running 64-bit hash. Floats hash
// by their IEEE representation so checksums are bit-exact.
std::uint64_t hash_combine_value(std::uint64_t h, const Value& v);

// Accessors that throw ContractError on a tag mismatch.
bool as_bool(const Value& v);
std::int64_t as_int(const Value& v);
double as_float(const Value& v);
const Record& as_record(const Value& v);

std::int64_t field_int(const Record& r, std::size_t i);
double field_float(const Record& r, std::size_t i);

} // namespace fuseforge
