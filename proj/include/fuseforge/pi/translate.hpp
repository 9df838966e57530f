#pragma once

#include "fuseforge/equations.hpp"
#include "fuseforge/pi/process.hpp"

namespace fuseforge::pi {

// Channel carrying the value of a state: "s<agent>" or "s<agent>g<generation>".
Name state_name(const StateRef& r, NameTable& names);

// p(x).(v d)(v m)( i1(m).d<m>.0 | ... | in(m).d<m>.0
//                | d(m1)...d(mn).[[y = f(m1..mn, x)]].!q<y>.0 )
// Throws WrongCaseError for recursive equations.
Process translate_nonrecursive(const BehavioralEquation& eq, PiContext& ctx);

// Registers P(p, i1..in) = resume(m1..mn).p(x).[[y = f(m1..mn, x)]].
//     ( yield<p, y, i1..in>.P(p, i1..in) | p<y>.0 )
// and returns its body. resume and yield are free, system-wide channels.
// Throws WrongCaseError for non-recursive equations.
Process translate_recursive(const BehavioralEquation& eq, PiContext& ctx);

// Identifier name used by translate_recursive for eq.
std::string recursive_identifier(const BehavioralEquation& eq);

// The non-recursive shape looping on p with no scheduler in between:
// L(p, i..) = p(x).(v d)(v m)( ...receivers... | d(m1)...[[y]].(!p<y>.0 | L(p, i..)) ).
// Returns the call L(p, i..). This composition never settles.
Process translate_unsynchronized(const BehavioralEquation& eq, PiContext& ctx);

// Host function (m1..mn, x) -> updateState(x, partialCompute(messages)),
// where each m is a neighbour state turned into an in-message.
HostFunction host_function(const ComputeMethodContract& c);

} // namespace fuseforge::pi
