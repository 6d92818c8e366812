#pragma once

#include <vector>

#include "capless/context.hpp"
#include "capless/diagnostics.hpp"
#include "capless/syntax.hpp"

namespace capless {

bool wf_cset_capless(const Context& ctx, const CaptureSet& c);
bool wf_bound_capless(const Context& ctx, const CaptureBound& b);
bool wf_shape_capless(const Context& ctx, const Shape& s);
bool wf_type_capless(const Context& ctx, const Type& t);
bool wf_type_capless(const Context& ctx, const Exist& e);
bool wf_context_capless(const Context& ctx);

bool wf_cset_reacap(const Context& ctx, const CaptureSet& c);
bool wf_shape_reacap(const Context& ctx, const TypeDefContext& defs, const Shape& s);
bool wf_type_reacap(const Context& ctx, const TypeDefContext& defs, const Type& t);
bool wf_context_reacap(const Context& ctx, const TypeDefContext& defs);

// Empty iff every definition is variance-well-formed against the ones before it.
std::vector<Diagnostic> wf_typedef_context(const TypeDefContext& defs);

}  // namespace capless
