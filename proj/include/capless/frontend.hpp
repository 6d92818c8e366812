#pragma once

#include <string>
#include <string_view>

#include "capless/context.hpp"
#include "capless/diagnostics.hpp"
#include "capless/syntax.hpp"

namespace capless {

// typedefs, assumptions, then one term
struct Program {
    Dialect dialect = Dialect::Capless;
    TypeDefContext defs;
    Context ctx;
    Term term;
};

// Throws CheckError (E-PARSE, E-NON-MNF-OPERAND, E-RUNTIME-FORM, E-UNBOUND-VARIABLE,
// E-UNKNOWN-TYPEDEF, E-ARITY) on the first problem.
Program parse_program(std::string_view text, Dialect dialect, NameSupply& ns, const std::string& file = "");

// Parse a fragment against the declarations of an already parsed program.
Exist parse_exist_in(const Program& p, std::string_view text, NameSupply& ns);
Type parse_type_in(const Program& p, std::string_view text, NameSupply& ns);
CaptureSet parse_cset_in(const Program& p, std::string_view text, NameSupply& ns);

// Canonical text. Names print as their hints; a serial suffix is added only when
// two names visible at the same point share a hint. The context, when given,
// fixes the spelling of its names first.
std::string print(const Shape& s, const Context* ctx = nullptr);
std::string print(const Type& t, const Context* ctx = nullptr);
std::string print(const Exist& e, const Context* ctx = nullptr);
std::string print(const CaptureSet& c, const Context* ctx = nullptr);
std::string print(const CaptureBound& b, const Context* ctx = nullptr);
std::string print(const Term& t, const Context* ctx = nullptr);
std::string print_program(const Program& p);

Dialect dialect_for_path(const std::string& path, Dialect fallback);

}  // namespace capless
