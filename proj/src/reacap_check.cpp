#include "capless/reacap_check.hpp"

#include "capless/frontend.hpp"
#include "capless/subcapture.hpp"
#include "capless/wellformed.hpp"

namespace capless {

namespace {

constexpr int kSubtypeDepthLimit = 4000;

const TypeDef& lookup_def(const TypeDefContext& defs, const Name& head) {
    const TypeDef* d = defs.find(head);
    if (!d) fail(code::UnknownTypeDef, "unknown type definition " + head.hint);
    return *d;
}

Shape promote(const Context& g, Shape s) {
    while (s->kind == ShapeKind::TVar) {
        const Binding* b = g.find(s->name);
        if (!b || b->kind != BindKind::Type) break;
        s = b->bound;
    }
    return s;
}

}  // namespace

// --- deep capture sets ---

CaptureSet dcs(const Context& ctx, const TypeDefContext& defs, const Type& t) {
    return dcs(ctx, defs, t.shape).unite(t.cs);
}

CaptureSet dcs(const Context& ctx, const TypeDefContext& defs, const Shape& s) {
    auto exist = [&](const Exist& e) {
        CaptureSet c = dcs(ctx, defs, e.body);
        return e.binder ? c.without(Capture::capt(*e.binder)) : c;
    };
    switch (s->kind) {
        case ShapeKind::Top:
        case ShapeKind::Never:
        case ShapeKind::Break:
            return {};
        case ShapeKind::TVar: {
            const Binding* b = ctx.find(s->name);
            if (!b || b->kind != BindKind::Type || !b->bound) return {};
            return dcs(ctx, defs, b->bound);
        }
        case ShapeKind::Fun:
            return exist(s->result).without(Capture::term(s->name)).without(Capture::reach(s->name));
        case ShapeKind::TFun:
            return exist(s->result);
        case ShapeKind::CFun:
            return exist(s->result).without(Capture::capt(s->name));
        case ShapeKind::Boxed:
            return dcs(ctx, defs, s->param);
        case ShapeKind::Applied: {
            const TypeDef& d = lookup_def(defs, s->name);
            CaptureSet out;
            for (std::size_t i = 0; i < s->args.size() && i < d.params.size(); ++i)
                if (d.params[i].second == Variance::Covariant) out = out.unite(dcs(ctx, defs, s->args[i]));
            return out;
        }
    }
    return {};
}

// --- reach refinement ---

Type reach_refine(const TypeDefContext& defs, const CaptureSet& d, const Type& t) {
    return Type{reach_refine(defs, d, t.shape), subst_capt(t.cs, Capture::cap(), d)};
}

Shape reach_refine(const TypeDefContext& defs, const CaptureSet& d, const Shape& s) {
    auto exist = [&](const Exist& e) { return Exist{e.binder, reach_refine(defs, d, e.body)}; };
    switch (s->kind) {
        case ShapeKind::Boxed:
            return mk_boxed(reach_refine(defs, d, s->param));
        case ShapeKind::TFun:
            return mk_tfun(s->name, s->sbound, exist(s->result));
        case ShapeKind::CFun:
            return mk_cfun(s->name, s->cbound, exist(s->result));
        case ShapeKind::Applied: {
            const TypeDef& def = lookup_def(defs, s->name);
            std::vector<Type> args;
            for (std::size_t i = 0; i < s->args.size(); ++i) {
                bool co = i < def.params.size() && def.params[i].second == Variance::Covariant;
                args.push_back(co ? reach_refine(defs, d, s->args[i]) : s->args[i]);
            }
            return mk_applied(s->name, std::move(args));
        }
        default:
            // r-top, r-tvar, r-fun
            return s;
    }
}

// --- dealiasing ---

namespace {

// Empty optional when a covariant argument reaches cap.
std::optional<Type> try_dealias(const Context& ctx, const TypeDefContext& defs, const Shape& s, NameSupply& ns,
                                std::string* why = nullptr) {
    const TypeDef& d = lookup_def(defs, s->name);
    if (d.params.size() != s->args.size())
        fail(code::Arity, s->name.hint + " expects " + std::to_string(d.params.size()) + " arguments, got " +
                              std::to_string(s->args.size()));
    for (std::size_t i = 0; i < d.params.size(); ++i) {
        if (d.params[i].second != Variance::Covariant) continue;
        if (dcs(ctx, defs, s->args[i]).contains_cap()) {
            if (why) *why = print(s->args[i], &ctx);
            return std::nullopt;
        }
    }
    Type out = pure(d.body);
    for (std::size_t i = 0; i < d.params.size(); ++i) out = subst_type_var(out, d.params[i].first, s->args[i], ns);
    return out;
}

}  // namespace

Type dealias(const Context& ctx, const TypeDefContext& defs, const Shape& applied, NameSupply& ns) {
    if (applied->kind != ShapeKind::Applied) return pure(applied);
    std::string why;
    auto r = try_dealias(ctx, defs, applied, ns, &why);
    if (!r)
        fail(code::CapInCovariantArg, "covariant argument " + why + " of " + applied->name.hint + " reaches cap",
             {}, "dealias");
    return *r;
}

// --- subtyping ---

namespace {

class Subtyper {
public:
    Subtyper(const TypeDefContext& defs, NameSupply& ns) : defs_(defs), ns_(ns) {}

    bool exist(const Context& g, const Exist& e1, const Exist& e2) {
        Guard guard(*this);
        if (e1.existential() && e2.existential()) {
            Name c = *e1.binder;
            Type t1 = e1.body;
            if (g.has(c)) {
                c = ns_.fresh_like(c);
                t1 = subst_capt_var(t1, Capture::capt(*e1.binder), CaptureSet::of_capt(c), ns_);
            }
            Type t2 = subst_capt_var(e2.body, Capture::capt(*e2.binder), CaptureSet::of_capt(c), ns_);
            return type(g.extend_capt(c), t1, t2);
        }
        if (e2.existential()) return e1.body.shape->kind == ShapeKind::Never;
        if (e1.existential()) return false;
        return type(g, e1.body, e2.body);
    }

    bool type(const Context& g, const Type& t1, const Type& t2) {
        Guard guard(*this);
        const Shape& s1 = t1.shape;
        const Shape& s2 = t2.shape;
        if (s2->kind == ShapeKind::Top || s1->kind == ShapeKind::Never) return sc(g, t1.cs, t2.cs);
        bool a1 = s1->kind == ShapeKind::Applied;
        bool a2 = s2->kind == ShapeKind::Applied;
        if (a1 && a2 && s1->name == s2->name && args(g, s1, s2) && sc(g, t1.cs, t2.cs)) return true;
        if (a1 || a2) {
            // dealias in either direction, then compare the expansions
            if (a1) {
                if (auto e = try_dealias(g, defs_, s1, ns_))
                    if (type(g, Type{e->shape, e->cs.unite(t1.cs)}, t2)) return true;
            }
            if (a2) {
                if (auto e = try_dealias(g, defs_, s2, ns_))
                    if (type(g, t1, Type{e->shape, e->cs.unite(t2.cs)})) return true;
            }
            return false;
        }
        return shape(g, s1, s2) && sc(g, t1.cs, t2.cs);
    }

private:
    bool sc(const Context& g, const CaptureSet& c1, const CaptureSet& c2) { return subcapture_reacap(g, c1, c2); }

    bool args(const Context& g, const Shape& s1, const Shape& s2) {
        const TypeDef& d = lookup_def(defs_, s1->name);
        if (s1->args.size() != s2->args.size() || s1->args.size() != d.params.size()) return false;
        for (std::size_t i = 0; i < d.params.size(); ++i) {
            bool ok = d.params[i].second == Variance::Covariant ? type(g, s1->args[i], s2->args[i])
                                                                : type(g, s2->args[i], s1->args[i]);
            if (!ok) return false;
        }
        return true;
    }

    bool shape(const Context& g, Shape s1, const Shape& s2) {
        if (s1->kind == ShapeKind::TVar) {
            if (s2->kind == ShapeKind::TVar && s2->name == s1->name) return true;
            Shape up = promote(g, s1);
            if (up == s1 || up->kind == ShapeKind::TVar) return false;
            return type(g, pure(up), pure(s2));
        }
        if (s1->kind != s2->kind) return false;
        switch (s1->kind) {
            case ShapeKind::Boxed:
                return type(g, s1->param, s2->param);
            case ShapeKind::Fun: {
                if (!use_leq(s1->use, s2->use)) return false;
                if (!type(g, s2->param, s1->param)) return false;
                Name x = s1->name;
                Exist e1 = s1->result;
                if (g.has(x)) {
                    x = ns_.fresh_like(x);
                    e1 = subst_term_var(e1, s1->name, x, ns_);
                }
                Exist e2 = x == s2->name ? s2->result : subst_term_var(s2->result, s2->name, x, ns_);
                return exist(g.extend_term(x, s2->param), e1, e2);
            }
            case ShapeKind::TFun: {
                if (!type(g, pure(s2->sbound), pure(s1->sbound))) return false;
                Name x = s1->name;
                Exist e1 = s1->result;
                if (g.has(x)) {
                    x = ns_.fresh_like(x);
                    e1 = subst_type_var(e1, s1->name, pure(mk_tvar(x)), ns_);
                }
                Exist e2 = x == s2->name ? s2->result : subst_type_var(s2->result, s2->name, pure(mk_tvar(x)), ns_);
                return exist(g.extend_type(x, s2->sbound), e1, e2);
            }
            case ShapeKind::CFun: {
                if (!bound_subtype(g, s2->cbound, s1->cbound)) return false;
                Name c = s1->name;
                Exist e1 = s1->result;
                if (g.has(c)) {
                    c = ns_.fresh_like(c);
                    e1 = subst_capt_var(e1, Capture::capt(s1->name), CaptureSet::of_capt(c), ns_);
                }
                Exist e2 = c == s2->name ? s2->result
                                         : subst_capt_var(s2->result, Capture::capt(s2->name), CaptureSet::of_capt(c), ns_);
                return exist(g.extend_capt(c, s2->cbound), e1, e2);
            }
            case ShapeKind::Break:
                return type(g, pure(s2->sbound), pure(s1->sbound));
            default:
                return false;
        }
    }

    struct Guard {
        explicit Guard(Subtyper& s) : s_(s) {
            if (++s_.depth_ > kSubtypeDepthLimit) {
                s_.depth_ = 0;
                fail(code::Internal, "subtyping exceeded its recursion budget");
            }
        }
        ~Guard() { --s_.depth_; }
        Subtyper& s_;
    };

    const TypeDefContext& defs_;
    NameSupply& ns_;
    int depth_ = 0;
};

// Let avoidance for x and x*: covariant x widens to its captures, covariant x* to its deep set.
class ReachAvoid {
public:
    ReachAvoid(const TypeDefContext& defs, const Name& x, CaptureSet shallow, CaptureSet deep)
        : defs_(defs), x_(x), shallow_(std::move(shallow)), deep_(std::move(deep)) {}

    CaptureSet cs(const CaptureSet& c, Variance v) const {
        CaptureSet out = c;
        for (auto [cap, repl] : {std::pair{Capture::term(x_), &shallow_}, std::pair{Capture::reach(x_), &deep_}}) {
            if (!out.contains(cap)) continue;
            if (v == Variance::Contravariant)
                fail(code::AvoidanceFailure, "local variable " + x_.hint +
                                                 " occurs in a contravariant position of the result type and cannot be widened");
            out = out.without(cap).unite(*repl);
        }
        return out;
    }
    Type type(const Type& t, Variance v) const { return Type{shape(t.shape, v), cs(t.cs, v)}; }
    Exist exist(const Exist& e, Variance v) const { return Exist{e.binder, type(e.body, v)}; }
    Shape shape(const Shape& s, Variance v) const {
        switch (s->kind) {
            case ShapeKind::Fun:
                return mk_fun(s->use, s->name, type(s->param, flip(v)), exist(s->result, v));
            case ShapeKind::TFun:
                return mk_tfun(s->name, shape(s->sbound, flip(v)), exist(s->result, v));
            case ShapeKind::CFun: {
                CaptureBound b = s->cbound.unbounded ? s->cbound : CaptureBound::of(cs(s->cbound.set, flip(v)));
                return mk_cfun(s->name, b, exist(s->result, v));
            }
            case ShapeKind::Boxed:
                return mk_boxed(type(s->param, v));
            case ShapeKind::Applied: {
                const TypeDef& d = lookup_def(defs_, s->name);
                std::vector<Type> args;
                for (std::size_t i = 0; i < s->args.size(); ++i) {
                    bool co = i < d.params.size() && d.params[i].second == Variance::Covariant;
                    args.push_back(type(s->args[i], co ? v : flip(v)));
                }
                return mk_applied(s->name, std::move(args));
            }
            default:
                return s;
        }
    }

private:
    const TypeDefContext& defs_;
    Name x_;
    CaptureSet shallow_;
    CaptureSet deep_;
};

// --- synthesis ---

class Checker {
public:
    Checker(const TypeDefContext& defs, NameSupply& ns, const ReacapOptions& opts)
        : defs_(defs), ns_(ns), opts_(opts), sub_(defs, ns) {}

    TypingResult synth(const Context& g, const Term& t) {
        switch (t->kind) {
            case TermKind::Var:
                return var(g, t->x, t).first;
            case TermKind::Lam:
                return lam(g, t);
            case TermKind::TLam:
                return tlam(g, t);
            case TermKind::CLam:
                return clam(g, t);
            case TermKind::Box:
                return box(g, t);
            case TermKind::Unbox:
                return unbox(g, t);
            case TermKind::App:
                return app(g, t);
            case TermKind::TApp:
                return tapp(g, t);
            case TermKind::CApp:
                return capp(g, t);
            case TermKind::Let:
                return let(g, t);
            case TermKind::Pack:
            case TermKind::LetEx:
            case TermKind::Boundary:
            case TermKind::Scope:
                fail(code::IllFormed, "existentials and scoped capabilities are not part of Reacap", t->span);
        }
        fail(code::Internal, "unknown term form", t->span);
    }

private:
    static TypingResult result(const char* rule, const Context& g, const Term& t, CaptureSet use, Type ty,
                               std::vector<Derivation> premises = {}) {
        Derivation d{rule, t, g, use, plain(ty), {}, std::move(premises)};
        return TypingResult{std::move(use), plain(std::move(ty)), std::move(d)};
    }

    static Derivation sub_node(const Context& g, const Term& t, const Type& from, const Type& to) {
        Derivation d;
        d.rule = "sub";
        d.term = t;
        d.ctx = g;
        d.from = plain(from);
        d.type = plain(to);
        return d;
    }

    void require_wf(bool ok, const std::string& what, Span sp, const char* rule) {
        if (!ok) fail(code::IllFormed, what + " is not well-formed here", sp, rule);
    }

    // Head shape for elimination forms: type variables go to their bound, applied types are dealiased.
    Shape expose(const Context& g, Shape s) {
        for (;;) {
            s = promote(g, s);
            if (s->kind != ShapeKind::Applied) return s;
            auto e = try_dealias(g, defs_, s, ns_);
            if (!e) return s;
            s = e->shape;
        }
    }

    // Rule var: the declared shape refined with {x*}, captured by {x}.
    std::pair<TypingResult, Type> var(const Context& g, const Name& x, const Term& at) {
        const Binding* b = g.find(x);
        if (!b || b->kind != BindKind::Term) fail(code::UnboundVariable, "unbound variable " + x.hint, at->span, "var");
        Shape s = reach_refine(defs_, CaptureSet{Capture::reach(x)}, b->type.shape);
        Type ty{s, CaptureSet::of_term(x)};
        Term node = at->kind == TermKind::Var && at->x == x ? at : mk_var(x, at->span);
        return {result("var", g, node, CaptureSet::of_term(x), ty), ty};
    }

    Term open_term_binder(const Context& g, Name& x, const Term& body) {
        if (!g.has(x)) return body;
        Name y = ns_.fresh_like(x);
        Term b = subst_term_var(body, x, y, ns_);
        x = y;
        return b;
    }
    Term open_capt_binder(const Context& g, Name& c, const Term& body) {
        if (!g.has(c)) return body;
        Name d = ns_.fresh_like(c);
        Term b = subst_capt_var(body, Capture::capt(c), CaptureSet::of_capt(d), ns_);
        c = d;
        return b;
    }
    Term open_type_binder(const Context& g, Name& x, const Term& body) {
        if (!g.has(x)) return body;
        Name y = ns_.fresh_like(x);
        Term b = subst_type_var(body, x, mk_tvar(y), ns_);
        x = y;
        return b;
    }

    TypingResult lam(const Context& g, const Term& t) {
        require_wf(wf_type_reacap(g, defs_, t->ty), "parameter type " + print(t->ty, &g), t->span, "abs");
        Name x = t->x;
        Term body = open_term_binder(g, x, t->a);
        TypingResult r = synth(g.extend_term(x, t->ty), body);
        if (t->use == UseAnnot::Plain && r.use.contains(Capture::reach(x)))
            fail(code::ReachEscape,
                 "the body uses " + x.hint + "* but the parameter is not declared @use", t->span, "abs",
                 std::nullopt, print(r.use, &g));
        CaptureSet cs = r.use.without(Capture::term(x)).without(Capture::reach(x));
        Type ty{mk_fun(t->use, x, t->ty, r.type), cs};
        return result("abs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult tlam(const Context& g, const Term& t) {
        require_wf(wf_shape_reacap(g, defs_, t->shape), "type bound " + print(t->shape, &g), t->span, "tabs");
        Name x = t->x;
        Term body = open_type_binder(g, x, t->a);
        TypingResult r = synth(g.extend_type(x, t->shape), body);
        Type ty{mk_tfun(x, t->shape, r.type), r.use};
        return result("tabs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult clam(const Context& g, const Term& t) {
        Name c = t->x;
        Term body = open_capt_binder(g, c, t->a);
        TypingResult r = synth(g.extend_capt(c, t->cbound), body);
        if (r.use.contains(Capture::capt(c)))
            fail(code::AvoidanceFailure, "the body uses capture parameter " + c.hint + ", which cannot be widened",
                 t->span, "cabs");
        Type ty{mk_cfun(c, t->cbound, r.type), r.use};
        return result("cabs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult box(const Context& g, const Term& t) {
        auto [rv, xt] = var(g, t->x, t);
        return result("box", g, t, {}, pure(mk_boxed(xt)), {std::move(rv.derivation)});
    }

    TypingResult unbox(const Context& g, const Term& t) {
        require_wf(wf_cset_reacap(g, t->cs), "unbox set " + print(t->cs, &g), t->span, "unbox");
        if (opts_.forbid_cap_unbox && t->cs.contains_cap())
            fail(code::CapUnbox, "unboxing with cap is disabled by the lint", t->span, "unbox");
        auto [rv, xt] = var(g, t->x, t);
        Shape s = expose(g, xt.shape);
        if (s->kind != ShapeKind::Boxed)
            fail(code::NotABox, t->x.hint + " is not a box", t->span, "unbox", std::nullopt, print(xt, &g));
        const Type& inner = s->param;
        if (!subcapture_reacap(g, inner.cs, t->cs))
            fail(code::UnboxUseMismatch, "the box holds " + print(inner.cs, &g) + ", not covered by the unbox set",
                 t->span, "unbox", print(t->cs, &g), print(inner.cs, &g));
        if (!subcapture_reacap(g, CaptureSet::of_term(t->x), t->cs))
            fail(code::UnboxUseMismatch, "the unbox set does not cover " + t->x.hint + " itself", t->span, "unbox",
                 print(t->cs, &g), print(CaptureSet::of_term(t->x), &g));
        Type boxed = pure(mk_boxed(Type{inner.shape, t->cs}));
        std::vector<Derivation> prem;
        prem.push_back(std::move(rv.derivation));
        prem.push_back(sub_node(g, mk_var(t->x, t->span), xt, boxed));
        return result("unbox", g, t, t->cs, Type{inner.shape, t->cs}, std::move(prem));
    }

    TypingResult app(const Context& g, const Term& t) {
        auto [rf, ft] = var(g, t->x, t);
        auto [ry, yt] = var(g, t->y, t);
        Shape s = expose(g, ft.shape);
        if (s->kind != ShapeKind::Fun)
            fail(code::NotAFunction, t->x.hint + " is not a function", t->span, "app", std::nullopt, print(ft, &g));
        if (!sub_.type(g, yt, s->param))
            fail(code::ArgumentMismatch, "argument " + t->y.hint + " does not match the parameter type", t->span,
                 "app", print(s->param, &g), print(yt, &g));
        CaptureSet deep = dcs(g, defs_, yt.shape);
        CaptureSet use{Capture::term(t->x), Capture::term(t->y)};
        if (s->use == UseAnnot::Use) use = use.unite(deep);
        Type res = subst_reach_variant(s->result.body, s->name, deep, Variance::Covariant, &defs_);
        res = subst_term_var(res, s->name, t->y, ns_);
        std::vector<Derivation> prem;
        prem.push_back(std::move(rf.derivation));
        prem.push_back(std::move(ry.derivation));
        prem.push_back(sub_node(g, mk_var(t->y, t->span), yt, s->param));
        return result("app", g, t, use, res, std::move(prem));
    }

    TypingResult tapp(const Context& g, const Term& t) {
        require_wf(wf_shape_reacap(g, defs_, t->shape), "type argument " + print(t->shape, &g), t->span, "tapp");
        auto [rf, ft] = var(g, t->x, t);
        Shape s = expose(g, ft.shape);
        if (s->kind != ShapeKind::TFun)
            fail(code::NotAFunction, t->x.hint + " is not a type function", t->span, "tapp", std::nullopt,
                 print(ft, &g));
        CaptureSet deep = dcs(g, defs_, t->shape);
        if (deep.contains_cap())
            fail(code::CapInTypeArg, "type argument " + print(t->shape, &g) + " reaches cap", t->span, "tapp",
                 std::nullopt, print(deep, &g));
        if (!sub_.type(g, pure(t->shape), pure(s->sbound)))
            fail(code::BoundViolation, "type argument violates the bound", t->span, "tapp", print(s->sbound, &g),
                 print(t->shape, &g));
        Type res = subst_type_var(s->result.body, s->name, pure(t->shape), ns_);
        return result("tapp", g, t, CaptureSet::of_term(t->x), res, {std::move(rf.derivation)});
    }

    TypingResult capp(const Context& g, const Term& t) {
        require_wf(wf_cset_reacap(g, t->cs), "capture argument " + print(t->cs, &g), t->span, "capp");
        auto [rf, ft] = var(g, t->x, t);
        Shape s = expose(g, ft.shape);
        if (s->kind != ShapeKind::CFun)
            fail(code::NotAFunction, t->x.hint + " is not a capture function", t->span, "capp", std::nullopt,
                 print(ft, &g));
        Type res = subst_capt_var(s->result.body, Capture::capt(s->name), t->cs, ns_);
        return result("capp", g, t, CaptureSet::of_term(t->x), res, {std::move(rf.derivation)});
    }

    TypingResult let(const Context& g, const Term& t) {
        TypingResult r1 = synth(g, t->a);
        Type xt = r1.type.body;
        Name x = t->x;
        Term body = open_term_binder(g, x, t->b);
        TypingResult r2 = synth(g.extend_term(x, xt), body);
        ReachAvoid avoid(defs_, x, xt.cs, dcs(g, defs_, xt));
        CaptureSet use = avoid.cs(r1.use.unite(r2.use), Variance::Covariant);
        Type ty = avoid.type(r2.type.body, Variance::Covariant);
        return result("let", g, t, use, ty, {std::move(r1.derivation), std::move(r2.derivation)});
    }

    const TypeDefContext& defs_;
    NameSupply& ns_;
    ReacapOptions opts_;
    Subtyper sub_;
};

}  // namespace

bool subtype_reacap(const Context& ctx, const TypeDefContext& defs, const Type& t1, const Type& t2, NameSupply& ns) {
    return Subtyper(defs, ns).type(ctx, t1, t2);
}

bool subtype_reacap(const Context& ctx, const TypeDefContext& defs, const Exist& e1, const Exist& e2,
                    NameSupply& ns) {
    return Subtyper(defs, ns).exist(ctx, e1, e2);
}

TypingResult synth_reacap(const Context& ctx, const TypeDefContext& defs, const Term& t, NameSupply& ns,
                          const ReacapOptions& opts) {
    return Checker(defs, ns, opts).synth(ctx, t);
}

}  // namespace capless
