#include "capless/capless_check.hpp"

#include "capless/frontend.hpp"
#include "capless/subcapture.hpp"
#include "capless/wellformed.hpp"

namespace capless {

namespace {

constexpr int kSubtypeDepthLimit = 4000;

class Subtyper {
public:
    explicit Subtyper(NameSupply& ns) : ns_(ns) {}

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
        return shape(g, t1.shape, t2.shape) && subcapture_capless(g, t1.cs, t2.cs);
    }

    bool shape(const Context& g, Shape s1, const Shape& s2) {
        Guard guard(*this);
        if (s2->kind == ShapeKind::Top || s1->kind == ShapeKind::Never) return true;
        while (s1->kind == ShapeKind::TVar) {
            if (s2->kind == ShapeKind::TVar && s2->name == s1->name) return true;
            const Binding* b = g.find(s1->name);
            if (!b || b->kind != BindKind::Type) return false;
            s1 = b->bound;
            if (s1->kind == ShapeKind::Never) return true;
        }
        if (s1->kind != s2->kind) return false;
        switch (s1->kind) {
            case ShapeKind::Fun: {
                if (!type(g, s2->param, s1->param)) return false;
                auto [x, e1] = open_term(g, s1->name, s1->result);
                Exist e2 = x == s2->name ? s2->result : subst_term_var(s2->result, s2->name, x, ns_);
                return exist(g.extend_term(x, s2->param), e1, e2);
            }
            case ShapeKind::TFun: {
                if (!shape(g, s2->sbound, s1->sbound)) return false;
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
                return shape(g, s2->sbound, s1->sbound);
            default:
                return false;
        }
    }

private:
    std::pair<Name, Exist> open_term(const Context& g, const Name& x, const Exist& e) {
        if (!g.has(x)) return {x, e};
        Name y = ns_.fresh_like(x);
        return {y, subst_term_var(e, x, y, ns_)};
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

    NameSupply& ns_;
    int depth_ = 0;
};

// --- avoidance ---

class Avoid {
public:
    Avoid(const Name& x, CaptureSet repl) : x_(x), repl_(std::move(repl)) {}

    CaptureSet cs(const CaptureSet& c, Variance v) const {
        if (!c.contains(Capture::term(x_))) return c;
        if (v == Variance::Contravariant)
            fail(code::AvoidanceFailure, "local variable " + x_.hint +
                                             " occurs in a contravariant position of the result type and cannot be widened");
        return c.without(Capture::term(x_)).unite(repl_);
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
            case ShapeKind::Break:
                return mk_break(shape(s->sbound, flip(v)));
            case ShapeKind::Boxed:
                return mk_boxed(type(s->param, v));
            case ShapeKind::Applied: {
                std::vector<Type> args;
                for (const auto& a : s->args) args.push_back(type(a, v));
                return mk_applied(s->name, std::move(args));
            }
            default:
                return s;
        }
    }

private:
    Name x_;
    CaptureSet repl_;
};

bool mentions(const Exist& e, const Name& n) { return free_names(e).contains(n); }

// --- synthesis ---

class Checker {
public:
    explicit Checker(NameSupply& ns) : ns_(ns), sub_(ns) {}

    TypingResult synth(const Context& g, const Term& t) {
        switch (t->kind) {
            case TermKind::Var:
                return var(g, t);
            case TermKind::Lam:
                return lam(g, t);
            case TermKind::TLam:
                return tlam(g, t);
            case TermKind::CLam:
                return clam(g, t);
            case TermKind::Pack:
                return pack(g, t);
            case TermKind::App:
                return app(g, t);
            case TermKind::TApp:
                return tapp(g, t);
            case TermKind::CApp:
                return capp(g, t);
            case TermKind::Let:
                return let(g, t);
            case TermKind::LetEx:
                return letex(g, t);
            case TermKind::Boundary:
                return boundary(g, t);
            case TermKind::Scope:
                return scope(g, t);
            case TermKind::Box:
            case TermKind::Unbox:
                fail(code::IllFormed, "boxes are not part of Capless", t->span);
        }
        fail(code::Internal, "unknown term form", t->span);
    }

private:
    static TypingResult result(const char* rule, const Context& g, const Term& t, CaptureSet use, Exist ty,
                               std::vector<Derivation> premises = {}) {
        Derivation d{rule, t, g, use, ty, {}, std::move(premises)};
        return TypingResult{std::move(use), std::move(ty), std::move(d)};
    }

    static Derivation sub_node(const Context& g, const Exist& from, const Exist& to) {
        Derivation d;
        d.rule = "sub";
        d.ctx = g;
        d.from = from;
        d.type = to;
        return d;
    }

    // Declared shape of a variable or label and its var-rule type.
    Type var_type(const Context& g, const Name& x, Span sp) {
        const Binding* b = g.find(x);
        if (!b || (b->kind != BindKind::Term && b->kind != BindKind::Label))
            fail(code::UnboundVariable, "unbound variable " + x.hint, sp, "var");
        if (b->kind == BindKind::Label) return Type{mk_break(b->bound), CaptureSet::of_term(x)};
        return Type{b->type.shape, CaptureSet::of_term(x)};
    }

    Shape promote(const Context& g, Shape s) {
        while (s->kind == ShapeKind::TVar) {
            const Binding* b = g.find(s->name);
            if (!b || b->kind != BindKind::Type) break;
            s = b->bound;
        }
        return s;
    }

    void require_wf(bool ok, const std::string& what, Span sp, const char* rule) {
        if (!ok) fail(code::IllFormed, what + " is not well-formed here", sp, rule);
    }

    // Renames binder x when the context already binds it (possible after evaluation copies terms).
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

    TypingResult var(const Context& g, const Term& t) {
        Type ty = var_type(g, t->x, t->span);
        return result("var", g, t, CaptureSet::of_term(t->x), plain(ty));
    }

    TypingResult lam(const Context& g, const Term& t) {
        require_wf(wf_type_capless(g, t->ty), "parameter type " + print(t->ty, &g), t->span, "abs");
        Name x = t->x;
        Term body = open_term_binder(g, x, t->a);
        Context inner = g.extend_term(x, t->ty);
        TypingResult r = synth(inner, body);
        CaptureSet cs = r.use.without(Capture::term(x));
        Exist ty = plain(Type{mk_fun(UseAnnot::Plain, x, t->ty, r.type), cs});
        return result("abs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult tlam(const Context& g, const Term& t) {
        require_wf(wf_shape_capless(g, t->shape), "type bound " + print(t->shape, &g), t->span, "tabs");
        Name x = t->x;
        Term body = open_type_binder(g, x, t->a);
        TypingResult r = synth(g.extend_type(x, t->shape), body);
        Exist ty = plain(Type{mk_tfun(x, t->shape, r.type), r.use});
        return result("tabs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult clam(const Context& g, const Term& t) {
        require_wf(wf_bound_capless(g, t->cbound), "capture bound " + print(t->cbound, &g), t->span, "cabs");
        Name c = t->x;
        Term body = open_capt_binder(g, c, t->a);
        TypingResult r = synth(g.extend_capt(c, t->cbound), body);
        CaptureSet cs = r.use;
        if (cs.contains(Capture::capt(c))) {
            if (t->cbound.unbounded)
                fail(code::AvoidanceFailure,
                     "the body uses capture parameter " + c.hint + ", which has no bound to widen to", t->span, "cabs");
            cs = cs.without(Capture::capt(c)).unite(t->cbound.set);
        }
        Exist ty = plain(Type{mk_cfun(c, t->cbound, r.type), cs});
        return result("cabs", g, t, {}, ty, {std::move(r.derivation)});
    }

    TypingResult pack(const Context& g, const Term& t) {
        require_wf(wf_cset_capless(g, t->cs), "witness " + print(t->cs, &g), t->span, "pack");
        Type xt = var_type(g, t->x, t->span);
        Exist target;
        if (t->ann) {
            require_wf(wf_type_capless(g, *t->ann), "pack ascription " + print(*t->ann, &g), t->span, "pack");
            target = *t->ann;
        } else {
            Name c = ns_.fresh("c");
            target = exists(c, Type{xt.shape, CaptureSet::of_capt(c)});
        }
        Type inst = subst_capt_var(target.body, Capture::capt(*target.binder), t->cs, ns_);
        if (!sub_.type(g, xt, inst))
            fail(code::PackMismatch, "payload does not match the packed type", t->span, "pack", print(inst, &g),
                 print(xt, &g));
        std::vector<Derivation> prem;
        prem.push_back(result("var", g, mk_var(t->x, t->span), CaptureSet::of_term(t->x), plain(xt)).derivation);
        prem.push_back(sub_node(g, plain(xt), plain(inst)));
        return result("pack", g, t, {}, target, std::move(prem));
    }

    TypingResult app(const Context& g, const Term& t) {
        Type ft = var_type(g, t->x, t->span);
        Type yt = var_type(g, t->y, t->span);
        CaptureSet use{Capture::term(t->x), Capture::term(t->y)};
        Shape s = promote(g, ft.shape);
        std::vector<Derivation> prem;
        prem.push_back(result("var", g, mk_var(t->x, t->span), CaptureSet::of_term(t->x), plain(ft)).derivation);
        prem.push_back(result("var", g, mk_var(t->y, t->span), CaptureSet::of_term(t->y), plain(yt)).derivation);
        if (s->kind == ShapeKind::Never) return result("app", g, t, use, plain(pure(mk_never())), std::move(prem));
        if (s->kind == ShapeKind::Break) {
            Type want = pure(s->sbound);
            if (!sub_.type(g, yt, want))
                fail(code::ArgumentMismatch, "argument does not match the break payload", t->span, "invoke",
                     print(want, &g), print(yt, &g));
            prem.push_back(sub_node(g, plain(yt), plain(want)));
            return result("invoke", g, t, use, plain(pure(mk_never())), std::move(prem));
        }
        if (s->kind != ShapeKind::Fun)
            fail(code::NotAFunction, t->x.hint + " is not a function", t->span, "app", std::nullopt,
                 print(ft, &g));
        if (!sub_.type(g, yt, s->param))
            fail(code::ArgumentMismatch, "argument " + t->y.hint + " does not match the parameter type", t->span,
                 "app", print(s->param, &g), print(yt, &g));
        prem.push_back(sub_node(g, plain(yt), plain(s->param)));
        Exist res = subst_term_var(s->result, s->name, t->y, ns_);
        return result("app", g, t, use, res, std::move(prem));
    }

    TypingResult tapp(const Context& g, const Term& t) {
        require_wf(wf_shape_capless(g, t->shape), "type argument " + print(t->shape, &g), t->span, "tapp");
        Type ft = var_type(g, t->x, t->span);
        Shape s = promote(g, ft.shape);
        CaptureSet use = CaptureSet::of_term(t->x);
        if (s->kind == ShapeKind::Never) return result("tapp", g, t, use, plain(pure(mk_never())));
        if (s->kind != ShapeKind::TFun)
            fail(code::NotAFunction, t->x.hint + " is not a type function", t->span, "tapp", std::nullopt,
                 print(ft, &g));
        if (!sub_.shape(g, t->shape, s->sbound))
            fail(code::BoundViolation, "type argument violates the bound", t->span, "tapp", print(s->sbound, &g),
                 print(t->shape, &g));
        Exist res = subst_type_var(s->result, s->name, pure(t->shape), ns_);
        return result("tapp", g, t, use, res);
    }

    TypingResult capp(const Context& g, const Term& t) {
        require_wf(wf_cset_capless(g, t->cs), "capture argument " + print(t->cs, &g), t->span, "capp");
        Type ft = var_type(g, t->x, t->span);
        Shape s = promote(g, ft.shape);
        CaptureSet use = CaptureSet::of_term(t->x);
        if (s->kind == ShapeKind::Never) return result("capp", g, t, use, plain(pure(mk_never())));
        if (s->kind != ShapeKind::CFun)
            fail(code::NotAFunction, t->x.hint + " is not a capture function", t->span, "capp", std::nullopt,
                 print(ft, &g));
        if (!bound_subtype(g, CaptureBound::of(t->cs), s->cbound))
            fail(code::BoundViolation, "capture argument violates the bound", t->span, "capp",
                 print(s->cbound, &g), print(t->cs, &g));
        Exist res = subst_capt_var(s->result, Capture::capt(s->name), t->cs, ns_);
        return result("capp", g, t, use, res);
    }

    TypingResult let(const Context& g, const Term& t) {
        TypingResult r1 = synth(g, t->a);
        if (r1.type.existential())
            fail(code::ExistentialInLet,
                 "right-hand side has existential type " + print(r1.type, &g) + "; unpack it with let [c, x] = ...",
                 t->span, "let");
        Name x = t->x;
        Term body = open_term_binder(g, x, t->b);
        TypingResult r2 = synth(g.extend_term(x, r1.type.body), body);
        auto [use, ty] = avoid_let(x, r1.type.body, r1.use.unite(r2.use), r2.type);
        return result("let", g, t, use, ty, {std::move(r1.derivation), std::move(r2.derivation)});
    }

    TypingResult letex(const Context& g, const Term& t) {
        TypingResult r1 = synth(g, t->a);
        Exist e = r1.type;
        if (!e.existential()) {
            if (e.body.shape->kind != ShapeKind::Never)
                fail(code::NotExistential, "right-hand side has non-existential type " + print(e, &g), t->span,
                     "let-e");
            e = exists(ns_.fresh("c"), e.body);
        }
        Name c = t->y;
        Name x = t->x;
        Term body = open_capt_binder(g, c, t->b);
        {
            Context tmp = g.extend_capt(c);
            body = open_term_binder(tmp, x, body);
        }
        Type xt = subst_capt_var(e.body, Capture::capt(*e.binder), CaptureSet::of_capt(c), ns_);
        Context inner = g.extend_capt(c).extend_term(x, xt);
        TypingResult r2 = synth(inner, body);
        auto [use, ty] = avoid_let(x, xt, r1.use.unite(r2.use), r2.type);
        if (use.contains(Capture::capt(c)) || mentions(ty, c))
            fail(code::ExistentialEscape,
                 "existential witness " + c.hint + " escapes into the " +
                     (use.contains(Capture::capt(c)) ? std::string("use set ") + print(use, &inner)
                                                     : "result type " + print(ty, &inner)),
                 t->span, "let-e");
        return result("let-e", g, t, use, ty, {std::move(r1.derivation), std::move(r2.derivation)});
    }

    TypingResult boundary(const Context& g, const Term& t) {
        require_wf(wf_shape_capless(g, t->shape), "boundary result type " + print(t->shape, &g), t->span,
                   "boundary");
        Name c = t->y;
        Name x = t->x;
        Term body = open_capt_binder(g, c, t->a);
        {
            Context tmp = g.extend_capt(c);
            body = open_term_binder(tmp, x, body);
        }
        Context inner = g.extend_capt(c).extend_term(x, Type{mk_break(t->shape), CaptureSet::of_capt(c)});
        TypingResult r = synth(inner, body);
        Exist want = plain(pure(t->shape));
        if (!sub_.exist(inner, r.type, want)) {
            bool leak = mentions(r.type, c) || mentions(r.type, x);
            fail(leak ? code::ScopeLeak : code::BoundaryResult,
                 leak ? "boundary body returns a value that refers to its own scope"
                      : "boundary body does not produce the declared result type",
                 t->span, "boundary", print(want, &inner), print(r.type, &inner));
        }
        CaptureSet use = r.use.without(Capture::capt(c)).without(Capture::term(x));
        if (!wf_cset_capless(g, use))
            fail(code::ScopeLeak, "boundary use set " + print(use, &inner) + " refers to its own scope", t->span,
                 "boundary");
        std::vector<Derivation> prem;
        prem.push_back(std::move(r.derivation));
        prem.push_back(sub_node(inner, r.type, want));
        return result("boundary", g, t, use, want, std::move(prem));
    }

    TypingResult scope(const Context& g, const Term& t) {
        TypingResult r = synth(g, t->a);
        Exist want = plain(pure(t->shape));
        if (!sub_.exist(g, r.type, want))
            fail(code::BoundaryResult, "scope body does not produce the declared result type", t->span, "scope",
                 print(want, &g), print(r.type, &g));
        std::vector<Derivation> prem;
        prem.push_back(std::move(r.derivation));
        return result("scope", g, t, r.use, want, std::move(prem));
    }

    NameSupply& ns_;
    Subtyper sub_;
};

}  // namespace

bool subtype_capless(const Context& ctx, const Exist& e1, const Exist& e2, NameSupply& ns) {
    return Subtyper(ns).exist(ctx, e1, e2);
}

bool subtype_capless(const Context& ctx, const Type& t1, const Type& t2, NameSupply& ns) {
    return Subtyper(ns).type(ctx, t1, t2);
}

bool subshape_capless(const Context& ctx, const Shape& s1, const Shape& s2, NameSupply& ns) {
    return Subtyper(ns).shape(ctx, s1, s2);
}

std::pair<CaptureSet, Exist> avoid_let(const Name& binder, const Type& binder_type, const CaptureSet& use,
                                       const Exist& e) {
    Avoid a(binder, binder_type.cs);
    return {a.cs(use, Variance::Covariant), a.exist(e, Variance::Covariant)};
}

TypingResult synth_capless(const Context& ctx, const Term& t, NameSupply& ns) {
    return Checker(ns).synth(ctx, t);
}

}  // namespace capless
