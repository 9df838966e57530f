#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fuseforge/errors.hpp"
#include "fuseforge/pi/process.hpp"

namespace fuseforge::pi {

// Canonical representative under structural congruence. Sums and parallel
// compositions are flattened and sorted, nil identities and dead restrictions
// dropped, restrictions pulled to the front of each parallel block, P | !P
// folded into !P when P has no top-level restriction, and bound names renamed
// to "%<level>".
Process normalize(const Process& p, NameTable& names);

// Text of normalize(p); equal keys mean congruent processes.
std::string canonical_key(const Process& p, NameTable& names);

struct Normalized {
    Process process;
    std::string key;
};
Normalized normalize_with_key(const Process& p, NameTable& names);

struct StepLabel {
    enum class Kind { Comm, Apply };
    Kind kind = Kind::Comm;
    std::string channel;  // Comm: channel; Apply: function id
    std::vector<std::string> names;  // Comm: payload; Apply: arguments
    std::string result;  // Apply only

    std::string to_string() const;
};

struct ReductionState {
    Process process;
    std::map<Name, Value> valueEnv;
    std::size_t stepCount = 0;
    std::vector<StepLabel> trace;
};

// Steps an Apply node takes. The encoding is a single host call.
inline constexpr std::size_t kApplySteps = 1;

// Normalizes p and binds every literal name free in it.
ReductionState initial_state(const Process& p, PiContext& ctx);

// One successor per redex: every complementary output/input pair and every
// enabled Apply. Replication and process identifiers unfold only as far as
// needed to expose a redex. Successor processes are normalized.
std::vector<ReductionState> reduce_step(const ReductionState& s, PiContext& ctx);

struct ReductionResult {
    std::vector<ReductionState> irreducible;
    bool nonTerminating = false;
    std::size_t explored = 0;  // distinct states visited
    std::size_t transitions = 0;  // successor states generated
};

class ResourceLimitError : public Error {
public:
    ResourceLimitError(const std::string& what, ReductionResult partial)
        : Error(what), partial(std::move(partial)) {}

    ReductionResult partial;
};

inline constexpr std::size_t kDefaultNodeLimit = 100000;

// Breadth-first exploration of every reduction sequence, deduplicating states
// by canonical form. maxSteps bounds the number of transitions explored; when
// it runs out with unexplored states left, or when the explored graph has a
// cycle, the result is flagged nonTerminating. More than nodeLimit distinct
// states raises ResourceLimitError carrying what was found so far.
ReductionResult reduce_all(const ReductionState& s, PiContext& ctx, std::size_t maxSteps,
                           std::size_t nodeLimit = kDefaultNodeLimit);

// Value sent on a free channel by a top-level output (possibly replicated) of
// the state, if there is exactly one such value.
std::optional<Value> observe(const ReductionState& s, Name channel, const PiContext& ctx);

std::string env_to_string(const ReductionState& s, const NameTable& names);

} // namespace fuseforge::pi
