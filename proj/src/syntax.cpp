#include "capless/syntax.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace capless {

// --- capture sets ---

CaptureSet::CaptureSet(std::initializer_list<Capture> xs) : items_(xs) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

CaptureSet::CaptureSet(std::vector<Capture> xs) : items_(std::move(xs)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool CaptureSet::contains(const Capture& c) const {
    return std::binary_search(items_.begin(), items_.end(), c);
}

bool CaptureSet::mentions(const Name& n) const {
    for (const auto& c : items_)
        if (c.kind != CaptureKind::Cap && c.name == n) return true;
    return false;
}

void CaptureSet::insert(const Capture& c) {
    auto it = std::lower_bound(items_.begin(), items_.end(), c);
    if (it == items_.end() || !(*it == c)) items_.insert(it, c);
}

CaptureSet CaptureSet::unite(const CaptureSet& o) const {
    CaptureSet r;
    std::set_union(items_.begin(), items_.end(), o.items_.begin(), o.items_.end(),
                   std::back_inserter(r.items_));
    return r;
}

CaptureSet CaptureSet::minus(const CaptureSet& o) const {
    CaptureSet r;
    std::set_difference(items_.begin(), items_.end(), o.items_.begin(), o.items_.end(),
                        std::back_inserter(r.items_));
    return r;
}

CaptureSet CaptureSet::without(const Capture& c) const { return minus(CaptureSet{c}); }

bool CaptureSet::subset_of(const CaptureSet& o) const {
    return std::includes(o.items_.begin(), o.items_.end(), items_.begin(), items_.end());
}

// --- constructors ---

namespace {
std::shared_ptr<ShapeNode> node(ShapeKind k) {
    auto n = std::make_shared<ShapeNode>();
    n->kind = k;
    return n;
}
std::shared_ptr<TermNode> tnode(TermKind k, Span sp) {
    auto n = std::make_shared<TermNode>();
    n->kind = k;
    n->span = sp;
    return n;
}
}  // namespace

Shape mk_top() {
    static const Shape top = node(ShapeKind::Top);
    return top;
}
Shape mk_never() {
    static const Shape nev = node(ShapeKind::Never);
    return nev;
}
Shape mk_tvar(Name x) {
    auto n = node(ShapeKind::TVar);
    n->name = std::move(x);
    return n;
}
Shape mk_fun(UseAnnot use, Name x, Type param, Exist result) {
    auto n = node(ShapeKind::Fun);
    n->use = use;
    n->name = std::move(x);
    n->param = std::move(param);
    n->result = std::move(result);
    return n;
}
Shape mk_tfun(Name x, Shape bound, Exist result) {
    auto n = node(ShapeKind::TFun);
    n->name = std::move(x);
    n->sbound = std::move(bound);
    n->result = std::move(result);
    return n;
}
Shape mk_cfun(Name c, CaptureBound bound, Exist result) {
    auto n = node(ShapeKind::CFun);
    n->name = std::move(c);
    n->cbound = std::move(bound);
    n->result = std::move(result);
    return n;
}
Shape mk_boxed(Type t) {
    auto n = node(ShapeKind::Boxed);
    n->param = std::move(t);
    return n;
}
Shape mk_applied(Name head, std::vector<Type> args) {
    auto n = node(ShapeKind::Applied);
    n->name = std::move(head);
    n->args = std::move(args);
    return n;
}
Shape mk_break(Shape s) {
    auto n = node(ShapeKind::Break);
    n->sbound = std::move(s);
    return n;
}

Term mk_var(Name x, Span sp) {
    auto n = tnode(TermKind::Var, sp);
    n->x = std::move(x);
    return n;
}
Term mk_lam(UseAnnot use, Name x, Type t, Term body, Span sp) {
    auto n = tnode(TermKind::Lam, sp);
    n->use = use;
    n->x = std::move(x);
    n->ty = std::move(t);
    n->a = std::move(body);
    return n;
}
Term mk_tlam(Name x, Shape bound, Term body, Span sp) {
    auto n = tnode(TermKind::TLam, sp);
    n->x = std::move(x);
    n->shape = std::move(bound);
    n->a = std::move(body);
    return n;
}
Term mk_clam(Name c, CaptureBound bound, Term body, Span sp) {
    auto n = tnode(TermKind::CLam, sp);
    n->x = std::move(c);
    n->cbound = std::move(bound);
    n->a = std::move(body);
    return n;
}
Term mk_pack(CaptureSet witness, Name payload, std::optional<Exist> ann, Span sp) {
    auto n = tnode(TermKind::Pack, sp);
    n->cs = std::move(witness);
    n->x = std::move(payload);
    n->ann = std::move(ann);
    return n;
}
Term mk_box(Name x, Span sp) {
    auto n = tnode(TermKind::Box, sp);
    n->x = std::move(x);
    return n;
}
Term mk_app(Name f, Name a, Span sp) {
    auto n = tnode(TermKind::App, sp);
    n->x = std::move(f);
    n->y = std::move(a);
    return n;
}
Term mk_tapp(Name f, Shape s, Span sp) {
    auto n = tnode(TermKind::TApp, sp);
    n->x = std::move(f);
    n->shape = std::move(s);
    return n;
}
Term mk_capp(Name f, CaptureSet c, Span sp) {
    auto n = tnode(TermKind::CApp, sp);
    n->x = std::move(f);
    n->cs = std::move(c);
    return n;
}
Term mk_let(Name x, Term rhs, Term body, Span sp) {
    auto n = tnode(TermKind::Let, sp);
    n->x = std::move(x);
    n->a = std::move(rhs);
    n->b = std::move(body);
    return n;
}
Term mk_letex(Name c, Name x, Term rhs, Term body, Span sp) {
    auto n = tnode(TermKind::LetEx, sp);
    n->y = std::move(c);
    n->x = std::move(x);
    n->a = std::move(rhs);
    n->b = std::move(body);
    return n;
}
Term mk_unbox(CaptureSet c, Name x, Span sp) {
    auto n = tnode(TermKind::Unbox, sp);
    n->cs = std::move(c);
    n->x = std::move(x);
    return n;
}
Term mk_boundary(Shape s, Name c, Name x, Term body, Span sp) {
    auto n = tnode(TermKind::Boundary, sp);
    n->shape = std::move(s);
    n->y = std::move(c);
    n->x = std::move(x);
    n->a = std::move(body);
    return n;
}
Term mk_scope(Name label, Shape s, Term body) {
    auto n = tnode(TermKind::Scope, {});
    n->x = std::move(label);
    n->shape = std::move(s);
    n->a = std::move(body);
    n->runtime = true;
    return n;
}

bool is_value(const Term& t) {
    switch (t->kind) {
        case TermKind::Lam:
        case TermKind::TLam:
        case TermKind::CLam:
        case TermKind::Pack:
        case TermKind::Box:
            return true;
        default:
            return false;
    }
}

bool is_answer(const Term& t) { return t->kind == TermKind::Var || is_value(t); }

const TypeDef* TypeDefContext::find(const Name& n) const {
    for (const auto& d : defs_)
        if (d.name == n) return &d;
    return nullptr;
}

const TypeDef* TypeDefContext::find(const std::string& text) const {
    for (const auto& d : defs_)
        if (d.name.hint == text) return &d;
    return nullptr;
}

// --- free names ---

bool FreeNames::contains(const Name& n) const {
    return std::binary_search(names.begin(), names.end(), n);
}

namespace {

struct FvCollector {
    std::set<std::uint64_t> bound;
    std::map<std::uint64_t, Name> out;

    void name(const Name& n) {
        if (n.valid() && !bound.count(n.serial)) out.emplace(n.serial, n);
    }
    void cs(const CaptureSet& c) {
        for (const auto& x : c)
            if (x.kind != CaptureKind::Cap) name(x.name);
    }
    void bind(const Name& n) { bound.insert(n.serial); }
    void unbind(const Name& n) { bound.erase(n.serial); }

    void type(const Type& t) {
        shape(t.shape);
        cs(t.cs);
    }
    void exist(const Exist& e) {
        if (e.binder) bind(*e.binder);
        type(e.body);
        if (e.binder) unbind(*e.binder);
    }
    void shape(const Shape& s) {
        if (!s) return;
        switch (s->kind) {
            case ShapeKind::Top:
            case ShapeKind::Never:
                break;
            case ShapeKind::TVar:
                name(s->name);
                break;
            case ShapeKind::Fun:
                type(s->param);
                bind(s->name);
                exist(s->result);
                unbind(s->name);
                break;
            case ShapeKind::TFun:
                shape(s->sbound);
                bind(s->name);
                exist(s->result);
                unbind(s->name);
                break;
            case ShapeKind::CFun:
                if (!s->cbound.unbounded) cs(s->cbound.set);
                bind(s->name);
                exist(s->result);
                unbind(s->name);
                break;
            case ShapeKind::Boxed:
                type(s->param);
                break;
            case ShapeKind::Applied:
                for (const auto& a : s->args) type(a);
                break;
            case ShapeKind::Break:
                shape(s->sbound);
                break;
        }
    }
    void term(const Term& t) {
        if (!t) return;
        switch (t->kind) {
            case TermKind::Var:
            case TermKind::Box:
                name(t->x);
                break;
            case TermKind::Lam:
                type(t->ty);
                bind(t->x);
                term(t->a);
                unbind(t->x);
                break;
            case TermKind::TLam:
                shape(t->shape);
                bind(t->x);
                term(t->a);
                unbind(t->x);
                break;
            case TermKind::CLam:
                if (!t->cbound.unbounded) cs(t->cbound.set);
                bind(t->x);
                term(t->a);
                unbind(t->x);
                break;
            case TermKind::Pack:
                cs(t->cs);
                name(t->x);
                if (t->ann) exist(*t->ann);
                break;
            case TermKind::App:
                name(t->x);
                name(t->y);
                break;
            case TermKind::TApp:
                name(t->x);
                shape(t->shape);
                break;
            case TermKind::CApp:
                name(t->x);
                cs(t->cs);
                break;
            case TermKind::Unbox:
                name(t->x);
                cs(t->cs);
                break;
            case TermKind::Let:
                term(t->a);
                bind(t->x);
                term(t->b);
                unbind(t->x);
                break;
            case TermKind::LetEx:
                term(t->a);
                bind(t->y);
                bind(t->x);
                term(t->b);
                unbind(t->x);
                unbind(t->y);
                break;
            case TermKind::Boundary:
                shape(t->shape);
                bind(t->y);
                bind(t->x);
                term(t->a);
                unbind(t->x);
                unbind(t->y);
                break;
            case TermKind::Scope:
                name(t->x);
                shape(t->shape);
                term(t->a);
                break;
        }
    }
    FreeNames result() const {
        FreeNames f;
        for (const auto& [k, v] : out) f.names.push_back(v);
        return f;
    }
};

}  // namespace

FreeNames free_names(const Type& t) {
    FvCollector c;
    c.type(t);
    return c.result();
}
FreeNames free_names(const Exist& e) {
    FvCollector c;
    c.exist(e);
    return c.result();
}
FreeNames free_names(const Shape& s) {
    FvCollector c;
    c.shape(s);
    return c.result();
}
FreeNames free_names(const Term& t) {
    FvCollector c;
    c.term(t);
    return c.result();
}
FreeNames free_names(const CaptureSet& cs) {
    FvCollector c;
    c.cs(cs);
    return c.result();
}

// --- substitution engine ---

namespace {

// Simultaneous substitution with binder renaming on clash.
class Subst {
public:
    explicit Subst(NameSupply* ns) : ns_(ns) {}

    std::unordered_map<std::uint64_t, Name> rename;      // term vars and labels
    std::map<Capture, CaptureSet> capt;                  // capture -> set
    std::unordered_map<std::uint64_t, Type> tvar;        // type vars
    std::unordered_set<std::uint64_t> avoid;             // free names of the ranges
    bool freshen_all = false;

    void add_range_fv(const FreeNames& f) {
        for (const auto& n : f.names) avoid.insert(n.serial);
    }

    Name var(const Name& n) const {
        auto it = rename.find(n.serial);
        return it == rename.end() ? n : it->second;
    }

    CaptureSet cs(const CaptureSet& c) const {
        std::vector<Capture> out;
        for (const auto& x : c) {
            auto it = capt.find(x);
            if (it != capt.end()) {
                for (const auto& y : it->second) out.push_back(y);
                continue;
            }
            if (x.kind == CaptureKind::Term || x.kind == CaptureKind::Reach) {
                auto r = rename.find(x.name.serial);
                if (r != rename.end()) {
                    out.push_back(Capture{x.kind, r->second});
                    continue;
                }
            }
            out.push_back(x);
        }
        return CaptureSet(std::move(out));
    }

    CaptureBound bound(const CaptureBound& b) const {
        if (b.unbounded) return b;
        return CaptureBound::of(cs(b.set));
    }

    // Scoped binder handling. Returns the (possibly renamed) binder.
    enum class Sort { TermV, CaptV, TypeV };

    struct Saved {
        Sort sort;
        Name old;
        std::optional<Name> prev_rename;
        std::optional<CaptureSet> prev_capt;
        std::optional<CaptureSet> prev_reach;
        std::optional<Type> prev_tvar;
    };

    Name enter(const Name& b, Sort sort, std::vector<Saved>& stack) {
        Saved sv{sort, b, {}, {}, {}, {}};
        bool clash = freshen_all || avoid.count(b.serial) > 0;
        Name nb = b;
        if (clash) {
            if (!ns_) throw std::logic_error("substitution needs a name supply to avoid capture");
            nb = ns_->fresh_like(b);
        }
        switch (sort) {
            case Sort::TermV: {
                auto it = rename.find(b.serial);
                if (it != rename.end()) sv.prev_rename = it->second;
                auto ic = capt.find(Capture::term(b));
                if (ic != capt.end()) sv.prev_capt = ic->second;
                auto ir = capt.find(Capture::reach(b));
                if (ir != capt.end()) sv.prev_reach = ir->second;
                capt.erase(Capture::term(b));
                capt.erase(Capture::reach(b));
                if (clash)
                    rename[b.serial] = nb;
                else
                    rename.erase(b.serial);
                break;
            }
            case Sort::CaptV: {
                auto ic = capt.find(Capture::capt(b));
                if (ic != capt.end()) sv.prev_capt = ic->second;
                if (clash)
                    capt[Capture::capt(b)] = CaptureSet{Capture::capt(nb)};
                else
                    capt.erase(Capture::capt(b));
                break;
            }
            case Sort::TypeV: {
                auto it = tvar.find(b.serial);
                if (it != tvar.end()) sv.prev_tvar = it->second;
                if (clash)
                    tvar[b.serial] = pure(mk_tvar(nb));
                else
                    tvar.erase(b.serial);
                break;
            }
        }
        stack.push_back(std::move(sv));
        return nb;
    }

    void leave(std::vector<Saved>& stack) {
        Saved sv = std::move(stack.back());
        stack.pop_back();
        const Name& b = sv.old;
        switch (sv.sort) {
            case Sort::TermV:
                rename.erase(b.serial);
                if (sv.prev_rename) rename[b.serial] = *sv.prev_rename;
                capt.erase(Capture::term(b));
                capt.erase(Capture::reach(b));
                if (sv.prev_capt) capt[Capture::term(b)] = *sv.prev_capt;
                if (sv.prev_reach) capt[Capture::reach(b)] = *sv.prev_reach;
                break;
            case Sort::CaptV:
                capt.erase(Capture::capt(b));
                if (sv.prev_capt) capt[Capture::capt(b)] = *sv.prev_capt;
                break;
            case Sort::TypeV:
                tvar.erase(b.serial);
                if (sv.prev_tvar) tvar[b.serial] = *sv.prev_tvar;
                break;
        }
    }

    Type type(const Type& t) {
        CaptureSet c = cs(t.cs);
        if (t.shape && t.shape->kind == ShapeKind::TVar) {
            auto it = tvar.find(t.shape->name.serial);
            if (it != tvar.end()) {
                if (t.cs.empty()) return it->second;
                return Type{it->second.shape, it->second.cs.unite(c)};
            }
        }
        return Type{shape(t.shape), c};
    }

    Exist exist(const Exist& e) {
        if (!e.binder) return plain(type(e.body));
        std::vector<Saved> st;
        Name nb = enter(*e.binder, Sort::CaptV, st);
        Type body = type(e.body);
        leave(st);
        return exists(nb, body);
    }

    Shape shape(const Shape& s) {
        if (!s) return s;
        switch (s->kind) {
            case ShapeKind::Top:
            case ShapeKind::Never:
                return s;
            case ShapeKind::TVar: {
                auto it = tvar.find(s->name.serial);
                if (it == tvar.end()) return s;
                if (!it->second.cs.empty())
                    throw std::logic_error("capturing type substituted into a shape-only position");
                return it->second.shape;
            }
            case ShapeKind::Fun: {
                Type p = type(s->param);
                std::vector<Saved> st;
                Name nb = enter(s->name, Sort::TermV, st);
                Exist r = exist(s->result);
                leave(st);
                return mk_fun(s->use, nb, p, r);
            }
            case ShapeKind::TFun: {
                Shape b = shape(s->sbound);
                std::vector<Saved> st;
                Name nb = enter(s->name, Sort::TypeV, st);
                Exist r = exist(s->result);
                leave(st);
                return mk_tfun(nb, b, r);
            }
            case ShapeKind::CFun: {
                CaptureBound b = bound(s->cbound);
                std::vector<Saved> st;
                Name nb = enter(s->name, Sort::CaptV, st);
                Exist r = exist(s->result);
                leave(st);
                return mk_cfun(nb, b, r);
            }
            case ShapeKind::Boxed:
                return mk_boxed(type(s->param));
            case ShapeKind::Applied: {
                std::vector<Type> args;
                for (const auto& a : s->args) args.push_back(type(a));
                return mk_applied(s->name, std::move(args));
            }
            case ShapeKind::Break:
                return mk_break(shape(s->sbound));
        }
        return s;
    }

    Term term(const Term& t) {
        if (!t) return t;
        switch (t->kind) {
            case TermKind::Var:
                return mk_var(var(t->x), t->span);
            case TermKind::Box:
                return mk_box(var(t->x), t->span);
            case TermKind::Lam: {
                Type p = type(t->ty);
                std::vector<Saved> st;
                Name nb = enter(t->x, Sort::TermV, st);
                Term body = term(t->a);
                leave(st);
                return mk_lam(t->use, nb, p, body, t->span);
            }
            case TermKind::TLam: {
                Shape b = shape(t->shape);
                std::vector<Saved> st;
                Name nb = enter(t->x, Sort::TypeV, st);
                Term body = term(t->a);
                leave(st);
                return mk_tlam(nb, b, body, t->span);
            }
            case TermKind::CLam: {
                CaptureBound b = bound(t->cbound);
                std::vector<Saved> st;
                Name nb = enter(t->x, Sort::CaptV, st);
                Term body = term(t->a);
                leave(st);
                return mk_clam(nb, b, body, t->span);
            }
            case TermKind::Pack: {
                std::optional<Exist> ann;
                if (t->ann) ann = exist(*t->ann);
                return mk_pack(cs(t->cs), var(t->x), ann, t->span);
            }
            case TermKind::App:
                return mk_app(var(t->x), var(t->y), t->span);
            case TermKind::TApp:
                return mk_tapp(var(t->x), shape(t->shape), t->span);
            case TermKind::CApp:
                return mk_capp(var(t->x), cs(t->cs), t->span);
            case TermKind::Unbox:
                return mk_unbox(cs(t->cs), var(t->x), t->span);
            case TermKind::Let: {
                Term rhs = term(t->a);
                std::vector<Saved> st;
                Name nb = enter(t->x, Sort::TermV, st);
                Term body = term(t->b);
                leave(st);
                return mk_let(nb, rhs, body, t->span);
            }
            case TermKind::LetEx: {
                Term rhs = term(t->a);
                std::vector<Saved> st;
                Name nc = enter(t->y, Sort::CaptV, st);
                Name nx = enter(t->x, Sort::TermV, st);
                Term body = term(t->b);
                leave(st);
                leave(st);
                return mk_letex(nc, nx, rhs, body, t->span);
            }
            case TermKind::Boundary: {
                Shape s = shape(t->shape);
                std::vector<Saved> st;
                Name nc = enter(t->y, Sort::CaptV, st);
                Name nx = enter(t->x, Sort::TermV, st);
                Term body = term(t->a);
                leave(st);
                leave(st);
                return mk_boundary(s, nc, nx, body, t->span);
            }
            case TermKind::Scope:
                return mk_scope(var(t->x), shape(t->shape), term(t->a));
        }
        return t;
    }

private:
    NameSupply* ns_;
};

Subst term_renaming(const Name& from, const Name& to, NameSupply& ns) {
    Subst s(&ns);
    s.rename[from.serial] = to;
    s.avoid.insert(to.serial);
    return s;
}

Subst capt_subst(const Capture& from, const CaptureSet& to, NameSupply& ns) {
    Subst s(&ns);
    s.capt[from] = to;
    s.add_range_fv(free_names(to));
    return s;
}

}  // namespace

Term subst_term_var(const Term& t, const Name& from, const Name& to, NameSupply& ns) {
    if (from == to) return t;
    return term_renaming(from, to, ns).term(t);
}
Type subst_term_var(const Type& t, const Name& from, const Name& to, NameSupply& ns) {
    if (from == to) return t;
    return term_renaming(from, to, ns).type(t);
}
Exist subst_term_var(const Exist& e, const Name& from, const Name& to, NameSupply& ns) {
    if (from == to) return e;
    return term_renaming(from, to, ns).exist(e);
}

CaptureSet subst_capt(const CaptureSet& cs, const Capture& from, const CaptureSet& to) {
    if (!cs.contains(from)) return cs;
    return cs.without(from).unite(to);
}

Type subst_capt_var(const Type& t, const Capture& from, const CaptureSet& to, NameSupply& ns) {
    return capt_subst(from, to, ns).type(t);
}
Exist subst_capt_var(const Exist& e, const Capture& from, const CaptureSet& to, NameSupply& ns) {
    return capt_subst(from, to, ns).exist(e);
}
Shape subst_capt_var(const Shape& s, const Capture& from, const CaptureSet& to, NameSupply& ns) {
    return capt_subst(from, to, ns).shape(s);
}
Term subst_capt_var(const Term& t, const Capture& from, const CaptureSet& to, NameSupply& ns) {
    return capt_subst(from, to, ns).term(t);
}

Type subst_type_var(const Type& t, const Name& from, const Type& repl, NameSupply& ns) {
    Subst s(&ns);
    s.tvar[from.serial] = repl;
    s.add_range_fv(free_names(repl));
    return s.type(t);
}
Exist subst_type_var(const Exist& e, const Name& from, const Type& repl, NameSupply& ns) {
    Subst s(&ns);
    s.tvar[from.serial] = repl;
    s.add_range_fv(free_names(repl));
    return s.exist(e);
}
Shape subst_type_var(const Shape& sh, const Name& from, const Type& repl, NameSupply& ns) {
    Subst s(&ns);
    s.tvar[from.serial] = repl;
    s.add_range_fv(free_names(repl));
    return s.shape(sh);
}
Term subst_type_var(const Term& t, const Name& from, const Shape& repl, NameSupply& ns) {
    Subst s(&ns);
    s.tvar[from.serial] = pure(repl);
    s.add_range_fv(free_names(repl));
    return s.term(t);
}

Term freshen(const Term& t, NameSupply& ns) {
    Subst s(&ns);
    s.freshen_all = true;
    return s.term(t);
}

// --- variance-aware reach substitution ---

namespace {

struct ReachSubst {
    Name x;
    CaptureSet repl;
    const TypeDefContext* defs;

    CaptureSet cs(const CaptureSet& c, Variance v) const {
        Capture r = Capture::reach(x);
        if (!c.contains(r)) return c;
        CaptureSet out = c.without(r);
        if (v == Variance::Covariant) out = out.unite(repl);
        return out;
    }
    Type type(const Type& t, Variance v) const { return Type{shape(t.shape, v), cs(t.cs, v)}; }
    Exist exist(const Exist& e, Variance v) const { return Exist{e.binder, type(e.body, v)}; }
    Shape shape(const Shape& s, Variance v) const {
        if (!s) return s;
        switch (s->kind) {
            case ShapeKind::Top:
            case ShapeKind::Never:
            case ShapeKind::TVar:
                return s;
            case ShapeKind::Fun:
                if (s->name == x) return s;
                return mk_fun(s->use, s->name, type(s->param, flip(v)), exist(s->result, v));
            case ShapeKind::TFun:
                return mk_tfun(s->name, s->sbound, exist(s->result, v));
            case ShapeKind::CFun: {
                CaptureBound b = s->cbound;
                if (!b.unbounded) b.set = cs(b.set, flip(v));
                return mk_cfun(s->name, b, exist(s->result, v));
            }
            case ShapeKind::Boxed:
                return mk_boxed(type(s->param, v));
            case ShapeKind::Applied: {
                const TypeDef* d = defs ? defs->find(s->name) : nullptr;
                std::vector<Type> args;
                for (std::size_t i = 0; i < s->args.size(); ++i) {
                    Variance pv = Variance::Covariant;
                    if (d && i < d->params.size()) pv = d->params[i].second;
                    Variance av = pv == Variance::Covariant ? v : flip(v);
                    args.push_back(type(s->args[i], av));
                }
                return mk_applied(s->name, std::move(args));
            }
            case ShapeKind::Break:
                return mk_break(shape(s->sbound, flip(v)));
        }
        return s;
    }
};

}  // namespace

Type subst_reach_variant(const Type& t, const Name& x, const CaptureSet& repl, Variance v,
                         const TypeDefContext* defs) {
    ReachSubst rs{x, repl, defs};
    return rs.type(t, v);
}

// --- alpha equivalence ---

namespace {

struct AlphaEq {
    // binder serial -> scope id, one map per side
    std::unordered_map<std::uint64_t, std::uint64_t> lmap, rmap;
    std::uint64_t next_id = 1;

    bool name(const Name& a, const Name& b) const {
        auto ia = lmap.find(a.serial);
        auto ib = rmap.find(b.serial);
        if (ia == lmap.end() && ib == rmap.end()) return a.serial == b.serial;
        if (ia == lmap.end() || ib == rmap.end()) return false;
        return ia->second == ib->second;
    }

    static std::vector<std::tuple<int, int, std::uint64_t>> canon(
        const CaptureSet& c, const std::unordered_map<std::uint64_t, std::uint64_t>& m) {
        std::vector<std::tuple<int, int, std::uint64_t>> out;
        for (const auto& x : c) {
            if (x.kind == CaptureKind::Cap) {
                out.emplace_back(3, 0, 0);
                continue;
            }
            auto it = m.find(x.name.serial);
            if (it == m.end())
                out.emplace_back(static_cast<int>(x.kind), 0, x.name.serial);
            else
                out.emplace_back(static_cast<int>(x.kind), 1, it->second);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool cs(const CaptureSet& a, const CaptureSet& b) const {
        if (a.size() != b.size()) return false;
        return canon(a, lmap) == canon(b, rmap);
    }

    bool bound(const CaptureBound& a, const CaptureBound& b) const {
        if (a.unbounded != b.unbounded) return false;
        return a.unbounded || cs(a.set, b.set);
    }

    struct Scope {
        AlphaEq& eq;
        std::uint64_t a, b;
        std::optional<std::uint64_t> pa, pb;
        Scope(AlphaEq& e, const Name& x, const Name& y) : eq(e), a(x.serial), b(y.serial) {
            if (auto it = eq.lmap.find(a); it != eq.lmap.end()) pa = it->second;
            if (auto it = eq.rmap.find(b); it != eq.rmap.end()) pb = it->second;
            std::uint64_t id = eq.next_id++;
            eq.lmap[a] = id;
            eq.rmap[b] = id;
        }
        ~Scope() {
            eq.lmap.erase(a);
            eq.rmap.erase(b);
            if (pa) eq.lmap[a] = *pa;
            if (pb) eq.rmap[b] = *pb;
        }
    };

    bool type(const Type& a, const Type& b) { return shape(a.shape, b.shape) && cs(a.cs, b.cs); }
    bool exist(const Exist& a, const Exist& b) {
        if (a.existential() != b.existential()) return false;
        if (!a.binder) return type(a.body, b.body);
        Scope sc(*this, *a.binder, *b.binder);
        return type(a.body, b.body);
    }
    bool shape(const Shape& a, const Shape& b) {
        if (!a || !b) return !a && !b;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case ShapeKind::Top:
            case ShapeKind::Never:
                return true;
            case ShapeKind::TVar:
                return name(a->name, b->name);
            case ShapeKind::Fun: {
                if (a->use != b->use || !type(a->param, b->param)) return false;
                Scope sc(*this, a->name, b->name);
                return exist(a->result, b->result);
            }
            case ShapeKind::TFun: {
                if (!shape(a->sbound, b->sbound)) return false;
                Scope sc(*this, a->name, b->name);
                return exist(a->result, b->result);
            }
            case ShapeKind::CFun: {
                if (!bound(a->cbound, b->cbound)) return false;
                Scope sc(*this, a->name, b->name);
                return exist(a->result, b->result);
            }
            case ShapeKind::Boxed:
                return type(a->param, b->param);
            case ShapeKind::Applied:
                if (!(a->name == b->name) || a->args.size() != b->args.size()) return false;
                for (std::size_t i = 0; i < a->args.size(); ++i)
                    if (!type(a->args[i], b->args[i])) return false;
                return true;
            case ShapeKind::Break:
                return shape(a->sbound, b->sbound);
        }
        return false;
    }
    bool term(const Term& a, const Term& b) {
        if (!a || !b) return !a && !b;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case TermKind::Var:
            case TermKind::Box:
                return name(a->x, b->x);
            case TermKind::Lam: {
                if (a->use != b->use || !type(a->ty, b->ty)) return false;
                Scope sc(*this, a->x, b->x);
                return term(a->a, b->a);
            }
            case TermKind::TLam: {
                if (!shape(a->shape, b->shape)) return false;
                Scope sc(*this, a->x, b->x);
                return term(a->a, b->a);
            }
            case TermKind::CLam: {
                if (!bound(a->cbound, b->cbound)) return false;
                Scope sc(*this, a->x, b->x);
                return term(a->a, b->a);
            }
            case TermKind::Pack:
                if (a->ann.has_value() != b->ann.has_value()) return false;
                if (a->ann && !exist(*a->ann, *b->ann)) return false;
                return cs(a->cs, b->cs) && name(a->x, b->x);
            case TermKind::App:
                return name(a->x, b->x) && name(a->y, b->y);
            case TermKind::TApp:
                return name(a->x, b->x) && shape(a->shape, b->shape);
            case TermKind::CApp:
            case TermKind::Unbox:
                return name(a->x, b->x) && cs(a->cs, b->cs);
            case TermKind::Let: {
                if (!term(a->a, b->a)) return false;
                Scope sc(*this, a->x, b->x);
                return term(a->b, b->b);
            }
            case TermKind::LetEx: {
                if (!term(a->a, b->a)) return false;
                Scope s1(*this, a->y, b->y);
                Scope s2(*this, a->x, b->x);
                return term(a->b, b->b);
            }
            case TermKind::Boundary: {
                if (!shape(a->shape, b->shape)) return false;
                Scope s1(*this, a->y, b->y);
                Scope s2(*this, a->x, b->x);
                return term(a->a, b->a);
            }
            case TermKind::Scope:
                return name(a->x, b->x) && shape(a->shape, b->shape) && term(a->a, b->a);
        }
        return false;
    }
};

}  // namespace

bool alpha_eq(const Type& a, const Type& b) {
    AlphaEq e;
    return e.type(a, b);
}
bool alpha_eq(const Exist& a, const Exist& b) {
    AlphaEq e;
    return e.exist(a, b);
}
bool alpha_eq(const Shape& a, const Shape& b) {
    AlphaEq e;
    return e.shape(a, b);
}
bool alpha_eq(const Term& a, const Term& b) {
    AlphaEq e;
    return e.term(a, b);
}

int depth(const Shape& s) {
    if (!s) return 0;
    switch (s->kind) {
        case ShapeKind::Top:
        case ShapeKind::Never:
        case ShapeKind::TVar:
            return 1;
        case ShapeKind::Fun:
            return 1 + std::max(depth(s->param), depth(s->result.body));
        case ShapeKind::TFun:
            return 1 + std::max(depth(s->sbound), depth(s->result.body));
        case ShapeKind::CFun:
            return 1 + depth(s->result.body);
        case ShapeKind::Boxed:
            return 1 + depth(s->param);
        case ShapeKind::Applied: {
            int d = 0;
            for (const auto& a : s->args) d = std::max(d, depth(a));
            return 1 + d;
        }
        case ShapeKind::Break:
            return 1 + depth(s->sbound);
    }
    return 1;
}

int depth(const Type& t) { return depth(t.shape); }

}  // namespace capless
