#include "capless/context.hpp"

namespace capless {

Context Context::extend(const Binding& b) const {
    Context c = *this;
    c.index_[b.name.serial] = c.items_.size();
    c.items_.push_back(b);
    return c;
}

Context Context::extend_term(const Name& x, Type t) const {
    Binding b;
    b.kind = BindKind::Term;
    b.name = x;
    b.type = std::move(t);
    return extend(b);
}

Context Context::extend_type(const Name& x, Shape bound) const {
    Binding b;
    b.kind = BindKind::Type;
    b.name = x;
    b.bound = std::move(bound);
    return extend(b);
}

Context Context::extend_capt(const Name& c, CaptureBound bd) const {
    Binding b;
    b.kind = BindKind::Capt;
    b.name = c;
    b.cbound = std::move(bd);
    return extend(b);
}

Context Context::extend_label(const Name& l, Shape s) const {
    Binding b;
    b.kind = BindKind::Label;
    b.name = l;
    b.bound = std::move(s);
    return extend(b);
}

const Binding* Context::find(const Name& n) const {
    auto it = index_.find(n.serial);
    return it == index_.end() ? nullptr : &items_[it->second];
}

Context Context::prefix_before(const Name& n) const {
    Context c;
    for (const auto& b : items_) {
        if (b.name == n) break;
        c = c.extend(b);
    }
    return c;
}

}  // namespace capless
