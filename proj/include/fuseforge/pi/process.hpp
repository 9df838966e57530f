#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fuseforge/pi/names.hpp"
#include "fuseforge/value.hpp"

namespace fuseforge::pi {

struct Node;
using Process = std::shared_ptr<const Node>;

struct Nil {};
struct Output {
    Name channel;
    std::vector<Name> payload;
    Process cont;
};
struct Input {
    Name channel;
    std::vector<Name> binders;
    Process cont;
};
// Binary in the calculus; builders produce two alternatives and normalize
// flattens nested sums into one list.
struct Choice {
    std::vector<Process> branches;
};
struct Parallel {
    std::vector<Process> parts;
};
struct Restriction {
    std::vector<Name> names;
    Process body;
};
struct Replication {
    Process body;
};
// [[ result = fn(args) ]].cont, evaluated in one step by a host function.
struct Apply {
    std::string fn;
    std::vector<Name> args;
    Name result;
    Process cont;
};
// Process identifier instantiated with actual names.
struct Call {
    std::string def;
    std::vector<Name> args;
};

struct Node {
    std::variant<Nil, Output, Input, Choice, Parallel, Restriction, Replication, Apply, Call> v;
};

Process nil();
Process output(Name channel, std::vector<Name> payload, Process cont = nil());
Process input(Name channel, std::vector<Name> binders, Process cont = nil());
Process choice(Process a, Process b);
Process choice(std::vector<Process> branches);
Process par(Process a, Process b);
Process par(std::vector<Process> parts);
Process restrict(Name n, Process body);
Process restrict(std::vector<Name> names, Process body);
Process replicate(Process body);
Process apply(std::string fn, std::vector<Name> args, Name result, Process cont);
Process call(std::string def, std::vector<Name> args);

template <class T>
const T* as(const Process& p) {
    return std::get_if<T>(&p->v);
}

bool is_nil(const Process& p);

using HostFunction = std::function<Value(std::span<const Value>)>;

struct Definition {
    std::vector<Name> params;
    Process body;
};

// Everything a process needs to be interpreted: the name universe, process
// identifier definitions and the host functions behind Apply nodes.
struct PiContext {
    NameTable names;
    std::map<std::string, Definition> definitions;
    std::map<std::string, HostFunction> functions;

    void define(const std::string& id, std::vector<Name> params, Process body);
    void register_function(const std::string& id, HostFunction fn);
    // Body of the identifier with parameters replaced by the call arguments.
    Process unfold(const Call& c);
};

std::set<Name> free_names(const Process& p);

// Capture-avoiding simultaneous substitution of free names.
Process substitute(const Process& p, const std::map<Name, Name>& sigma, NameTable& names);

std::string to_sexpr(const Process& p, const NameTable& names);

} // namespace fuseforge::pi
