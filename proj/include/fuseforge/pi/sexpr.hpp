#pragma once

#include <string_view>

#include "fuseforge/pi/process.hpp"

namespace fuseforge::pi {

// Text form of processes, one construct per parenthesized form:
//
//   P ::= 0
//       | (out a (x ...) P)         output x... on a, then P
//       | (in a (x ...) P)          input binding x..., then P
//       | (sum P Q ...)             choice
//       | (par P Q ...)             parallel composition
//       | (new (a ...) P)           restriction
//       | (rep P)                   replication
//       | (apply f (x ...) y P)     y = f(x...), then P
//       | (call B (a ...))          process identifier
//
// A program is any number of (def B (params ...) P) forms followed by one
// process. Integer tokens denote literal values. `;` starts a comment.
Process parse_program(std::string_view text, PiContext& ctx);

// add, mul, min, max: over all arguments. sub: first minus the rest.
// rsub: last minus the rest (so rsub(m, x) = x - m). id: first argument.
// All operate on int64 values.
void register_builtins(PiContext& ctx);

} // namespace fuseforge::pi
