#pragma once

#include <map>
#include <optional>
#include <string>

#include "capless/capless_check.hpp"
#include "capless/context.hpp"
#include "capless/frontend.hpp"
#include "capless/syntax.hpp"

namespace capless {

// <D, rho, rho*>: D interprets cap; rho and rho* map term variables (by serial)
// to target capture sets. Capture variables are mapped to themselves.
struct TranslationContext {
    CaptureSet interp;
    std::map<std::uint64_t, CaptureSet> rho;
    std::map<std::uint64_t, CaptureSet> rho_star;

    TranslationContext with_interp(CaptureSet d) const {
        TranslationContext t = *this;
        t.interp = std::move(d);
        return t;
    }
};

// Throws E-UNMAPPED-CAPTURE for a term or reach capture outside rho / rho*.
CaptureSet encode_cset(const TranslationContext& tau, const CaptureSet& c);
// The parameter-bound reading: cap maps to an unbounded bound.
CaptureBound encode_bound(const TranslationContext& tau, const CaptureSet& c);

Type encode_type(const TranslationContext& tau, const TypeDefContext& defs, const Type& t, NameSupply& ns);
Shape encode_shape(const TranslationContext& tau, const TypeDefContext& defs, const Shape& s, NameSupply& ns);
// Target type of a term binding x: S^C where cx encodes C. Function shapes also carry
// cx on their arrow, since a Capless closure records its captures there.
Type encode_binding(const TranslationContext& tau, const TypeDefContext& defs, const Shape& s, const CaptureSet& cx,
                    NameSupply& ns);
// exists c. [[T]] under interpretation {c}
Exist encode_packed(const TranslationContext& tau, const TypeDefContext& defs, const Type& t, NameSupply& ns);

// Empty iff tau is proper for source gamma and target delta; otherwise the failed conditions.
std::vector<std::string> proper_violations(const TranslationContext& tau, const Context& gamma,
                                           const Context& delta, const TypeDefContext& defs, NameSupply& ns);

struct Adapted {
    Term term;  // an answer
    CaptureSet interp;
};

// Turns answer a, typed in delta at [[S1^C]] under d1, into an answer typed at [[S2^C]]
// under the returned interpretation. gamma is the source context for S1 <: S2.
Adapted adapt_subtype(const TranslationContext& tau, const Context& gamma, const Context& delta,
                      const TypeDefContext& defs, const Term& a, const Shape& s1, const Shape& s2,
                      const CaptureSet& c, const CaptureSet& d1, NameSupply& ns);

struct Translated {
    Term term;
    CaptureSet interp;  // D'
    bool packed = false;  // typed at exists c. [[T]]^{c} rather than [[T]]^{D'}
};

// Directed by a Reacap derivation whose context is the source counterpart of delta.
Translated translate(const TranslationContext& tau, const Context& delta, const TypeDefContext& defs,
                     const Derivation& d, NameSupply& ns);

struct TranslationReport {
    bool verified = false;
    Program output;              // Capless program
    TranslationContext tau;      // top-level context
    std::string source_type;
    std::string source_use;
    std::string expected_type;   // encoding of the source type
    std::string output_type;     // Capless type of the output
    std::string output_use;
    bool alpha_equal = false;    // output type alpha-equals the expectation
    std::optional<Diagnostic> error;
};

// Typechecks src in Reacap, translates from the top-level proper context, and re-checks
// the output in Capless. Throws CheckError only for source type errors.
TranslationReport verify_translation(const Program& src, NameSupply& ns);

// The proper context and target assumptions for a Reacap program's declarations.
std::pair<TranslationContext, Context> initial_translation_context(const Program& src, NameSupply& ns);

}  // namespace capless
