#pragma once

#include <string>
#include <utility>
#include <vector>

#include "capless/context.hpp"
#include "capless/diagnostics.hpp"
#include "capless/syntax.hpp"

namespace capless {

// One node per rule application. Subsumption steps appear as "sub" nodes whose
// `from` is the type before widening.
struct Derivation {
    std::string rule;
    Term term;
    Context ctx;
    CaptureSet use;
    Exist type;
    Exist from;
    std::vector<Derivation> premises;
};

struct TypingResult {
    CaptureSet use;
    Exist type;
    Derivation derivation;
};

bool subtype_capless(const Context& ctx, const Exist& e1, const Exist& e2, NameSupply& ns);
bool subtype_capless(const Context& ctx, const Type& t1, const Type& t2, NameSupply& ns);
bool subshape_capless(const Context& ctx, const Shape& s1, const Shape& s2, NameSupply& ns);

// Widens `binder` (declared type binder_type) to its captures in the use set and in
// covariant capture positions of e. Throws E-AVOIDANCE-FAILURE on a contravariant occurrence.
std::pair<CaptureSet, Exist> avoid_let(const Name& binder, const Type& binder_type, const CaptureSet& use,
                                       const Exist& e);

// Covers the scoped-capability forms (boundary, invoke, runtime labels and scopes).
// Throws CheckError on the first type error.
TypingResult synth_capless(const Context& ctx, const Term& t, NameSupply& ns);

// Replays a derivation against the declarative rules; empty when every node is justified.
std::vector<std::string> validate_derivation(const Derivation& d, NameSupply& ns);

}  // namespace capless
