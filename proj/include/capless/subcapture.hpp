#pragma once

#include "capless/context.hpp"
#include "capless/syntax.hpp"

namespace capless {

// C1 <: C2 with sc-elem, sc-var and sc-bound; sc-set and sc-trans are admissible.
bool subcapture_capless(const Context& ctx, const CaptureSet& c1, const CaptureSet& c2);

// Same without sc-bound. cap and reach captures only relate through sc-elem.
bool subcapture_reacap(const Context& ctx, const CaptureSet& c1, const CaptureSet& c2);

// B <: * always; * <: C never.
bool bound_subtype(const Context& ctx, const CaptureBound& b1, const CaptureBound& b2);

}  // namespace capless
