#pragma once

#include <unordered_map>
#include <vector>

#include "capless/syntax.hpp"

namespace capless {

enum class BindKind { Term, Type, Capt, Label };

struct Binding {
    BindKind kind = BindKind::Term;
    Name name;
    Type type;             // Term
    Shape bound;           // Type bound, Label result shape
    CaptureBound cbound;   // Capt
};

// Ordered telescope. Extension copies; contexts stay small.
class Context {
public:
    Context extend_term(const Name& x, Type t) const;
    Context extend_type(const Name& x, Shape bound) const;
    Context extend_capt(const Name& c, CaptureBound b = CaptureBound::star()) const;
    Context extend_label(const Name& l, Shape s) const;
    Context extend(const Binding& b) const;

    const Binding* find(const Name& n) const;
    bool has(const Name& n) const { return find(n) != nullptr; }
    const std::vector<Binding>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    // prefix of the telescope strictly before the binding of n
    Context prefix_before(const Name& n) const;

private:
    std::vector<Binding> items_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace capless
