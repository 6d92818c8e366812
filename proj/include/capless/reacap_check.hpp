#pragma once

#include "capless/capless_check.hpp"
#include "capless/context.hpp"
#include "capless/syntax.hpp"

namespace capless {

// Deep capture set: the union of the covariant capture sets of a type.
// Throws E-UNKNOWN-TYPEDEF for an applied head missing from defs.
CaptureSet dcs(const Context& ctx, const TypeDefContext& defs, const Type& t);
CaptureSet dcs(const Context& ctx, const TypeDefContext& defs, const Shape& s);

// Replaces cap by d in the capture sets reachable without crossing a function arrow
// or a contravariant applied argument.
Type reach_refine(const TypeDefContext& defs, const CaptureSet& d, const Type& t);
Shape reach_refine(const TypeDefContext& defs, const CaptureSet& d, const Shape& s);

// Expands K[T1..Tn] to its body. Covariant arguments must not reach cap.
// Throws E-UNKNOWN-TYPEDEF, E-ARITY or E-CAP-IN-COVARIANT-ARG.
Type dealias(const Context& ctx, const TypeDefContext& defs, const Shape& applied, NameSupply& ns);

bool subtype_reacap(const Context& ctx, const TypeDefContext& defs, const Type& t1, const Type& t2, NameSupply& ns);
bool subtype_reacap(const Context& ctx, const TypeDefContext& defs, const Exist& e1, const Exist& e2,
                    NameSupply& ns);

struct ReacapOptions {
    // Lint: reject unbox {.., cap, ..} x.
    bool forbid_cap_unbox = false;
};

// Derivation nodes use the Reacap rule names: var, box, unbox, abs, app, tabs, tapp,
// cabs, capp, let, and sub for subsumption on an answer.
TypingResult synth_reacap(const Context& ctx, const TypeDefContext& defs, const Term& t, NameSupply& ns,
                          const ReacapOptions& opts = {});

}  // namespace capless
