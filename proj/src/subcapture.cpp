#include "capless/subcapture.hpp"

#include <map>
#include <stdexcept>

namespace capless {

namespace {

enum class Mark { Active, Yes, No };

class Subcapture {
public:
    Subcapture(const Context& ctx, const CaptureSet& goal, bool with_bound)
        : ctx_(ctx), goal_(goal), with_bound_(with_bound) {}

    bool set(const CaptureSet& c) {
        for (const auto& x : c)
            if (!elem(x)) return false;
        return true;
    }

private:
    bool elem(const Capture& x) {
        if (goal_.contains(x)) return true;
        auto it = memo_.find(x);
        if (it != memo_.end()) {
            if (it->second == Mark::Active)
                throw std::logic_error("cyclic capture bound while deciding subcapturing");
            return it->second == Mark::Yes;
        }
        memo_[x] = Mark::Active;
        bool r = expand(x);
        memo_[x] = r ? Mark::Yes : Mark::No;
        return r;
    }

    bool expand(const Capture& x) {
        const Binding* b = x.kind == CaptureKind::Cap ? nullptr : ctx_.find(x.name);
        if (!b) return false;
        if (x.kind == CaptureKind::Term && b->kind == BindKind::Term) return set(b->type.cs);
        if (with_bound_ && x.kind == CaptureKind::Capt && b->kind == BindKind::Capt && !b->cbound.unbounded)
            return set(b->cbound.set);
        return false;
    }

    const Context& ctx_;
    const CaptureSet& goal_;
    bool with_bound_;
    std::map<Capture, Mark> memo_;
};

}  // namespace

bool subcapture_capless(const Context& ctx, const CaptureSet& c1, const CaptureSet& c2) {
    return Subcapture(ctx, c2, true).set(c1);
}

bool subcapture_reacap(const Context& ctx, const CaptureSet& c1, const CaptureSet& c2) {
    return Subcapture(ctx, c2, false).set(c1);
}

bool bound_subtype(const Context& ctx, const CaptureBound& b1, const CaptureBound& b2) {
    if (b2.unbounded) return true;
    if (b1.unbounded) return false;
    return subcapture_capless(ctx, b1.set, b2.set);
}

}  // namespace capless
