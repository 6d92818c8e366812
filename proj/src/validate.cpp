#include "capless/capless_check.hpp"
#include "capless/frontend.hpp"
#include "capless/subcapture.hpp"
#include "capless/wellformed.hpp"

namespace capless {

namespace {

// Replays each node of a Capless derivation against the declarative rules. Only the
// recorded premises and contexts are trusted; widening is justified by explicit
// subtyping checks, so the algorithm's avoidance and promotion are re-derived here.
class Validator {
public:
    explicit Validator(NameSupply& ns) : ns_(ns) {}

    std::vector<std::string> problems;

    void node(const Derivation& d) {
        if (d.rule == "sub") return sub(d);
        if (!d.term) return bad(d, "missing subject term");
        if (!wf_cset_capless(d.ctx, d.use)) bad(d, "use set is not well-formed");
        if (!wf_type_capless(d.ctx, d.type)) bad(d, "type is not well-formed");
        if (d.rule == "var") return var(d);
        if (d.rule == "abs") return abs(d);
        if (d.rule == "tabs") return tabs(d);
        if (d.rule == "cabs") return cabs(d);
        if (d.rule == "pack") return pack(d);
        if (d.rule == "app" || d.rule == "invoke") return app(d);
        if (d.rule == "tapp") return tapp(d);
        if (d.rule == "capp") return capp(d);
        if (d.rule == "let") return let(d, false);
        if (d.rule == "let-e") return let(d, true);
        if (d.rule == "boundary") return boundary(d);
        if (d.rule == "scope") return scope(d);
        bad(d, "unknown rule");
    }

private:
    void bad(const Derivation& d, const std::string& what) {
        std::string where = d.term ? print(d.term, &d.ctx) : std::string("(sub)");
        if (where.size() > 60) where = where.substr(0, 57) + "...";
        problems.push_back(d.rule + " at " + where + ": " + what);
    }

    bool expect(bool ok, const Derivation& d, const std::string& what) {
        if (!ok) bad(d, what);
        return ok;
    }

    // inner is g followed by exactly `extra` bindings
    static bool extends(const Context& inner, const Context& g, std::size_t extra) {
        if (inner.size() != g.size() + extra) return false;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(inner.items()[i].name == g.items()[i].name)) return false;
        return true;
    }

    bool premises(const Derivation& d, std::size_t n) {
        if (!expect(d.premises.size() == n, d, "expected " + std::to_string(n) + " premises")) return false;
        for (const auto& p : d.premises) node(p);
        return true;
    }

    Shape promote(const Context& g, Shape s) {
        while (s->kind == ShapeKind::TVar) {
            const Binding* b = g.find(s->name);
            if (!b || b->kind != BindKind::Type) break;
            s = b->bound;
        }
        return s;
    }

    // x : S^{x} for a term binding x : S^C, and l : Break[S]^{l} for a label
    std::optional<Type> var_type(const Context& g, const Name& x) {
        const Binding* b = g.find(x);
        if (!b) return std::nullopt;
        if (b->kind == BindKind::Term) return Type{b->type.shape, CaptureSet::of_term(x)};
        if (b->kind == BindKind::Label) return Type{mk_break(b->bound), CaptureSet::of_term(x)};
        return std::nullopt;
    }

    void sub(const Derivation& d) {
        expect(subtype_capless(d.ctx, d.from, d.type, ns_), d, "premise type is not a subtype of the conclusion");
    }

    void var(const Derivation& d) {
        premises(d, 0);
        if (!expect(d.term->kind == TermKind::Var, d, "subject is not a variable")) return;
        auto t = var_type(d.ctx, d.term->x);
        if (!expect(t.has_value(), d, "variable is not bound to a term")) return;
        expect(d.use == CaptureSet::of_term(d.term->x), d, "use set is not {x}");
        expect(!d.type.existential() && alpha_eq(d.type.body, *t), d, "type is not the declared shape at {x}");
    }

    // The checked body in an abstraction may ask for any conclusion set covering its use.
    void closure_covers(const Derivation& d, const Derivation& body, CaptureSet allowed) {
        expect(wf_cset_capless(d.ctx, d.type.body.cs), d, "closure captures are not well-formed outside");
        expect(subcapture_capless(body.ctx, body.use, allowed), d, "body use set is not covered by the captures");
    }

    void abs(const Derivation& d) {
        if (!premises(d, 1) || !expect(d.term->kind == TermKind::Lam, d, "subject is not a lambda")) return;
        const Derivation& b = d.premises[0];
        if (!expect(extends(b.ctx, d.ctx, 1), d, "body context is not one binding longer")) return;
        const Binding& x = b.ctx.items().back();
        expect(x.kind == BindKind::Term && alpha_eq(x.type, d.term->ty), d, "parameter binding differs");
        expect(d.use.empty(), d, "a value has a non-empty use set");
        const Shape& s = d.type.body.shape;
        if (!expect(!d.type.existential() && s->kind == ShapeKind::Fun, d, "type is not a function")) return;
        expect(s->name == x.name && alpha_eq(s->param, d.term->ty) && alpha_eq(s->result, b.type), d,
               "function type does not match the body");
        closure_covers(d, b, d.type.body.cs.unite(CaptureSet::of_term(x.name)));
    }

    void tabs(const Derivation& d) {
        if (!premises(d, 1) || !expect(d.term->kind == TermKind::TLam, d, "subject is not a type lambda")) return;
        const Derivation& b = d.premises[0];
        if (!expect(extends(b.ctx, d.ctx, 1), d, "body context is not one binding longer")) return;
        const Binding& x = b.ctx.items().back();
        expect(x.kind == BindKind::Type && alpha_eq(x.bound, d.term->shape), d, "type binding differs");
        expect(d.use.empty(), d, "a value has a non-empty use set");
        const Shape& s = d.type.body.shape;
        if (!expect(!d.type.existential() && s->kind == ShapeKind::TFun, d, "type is not a type function")) return;
        expect(s->name == x.name && alpha_eq(s->sbound, d.term->shape) && alpha_eq(s->result, b.type), d,
               "type function does not match the body");
        closure_covers(d, b, d.type.body.cs);
    }

    void cabs(const Derivation& d) {
        if (!premises(d, 1) || !expect(d.term->kind == TermKind::CLam, d, "subject is not a capture lambda")) return;
        const Derivation& b = d.premises[0];
        if (!expect(extends(b.ctx, d.ctx, 1), d, "body context is not one binding longer")) return;
        const Binding& c = b.ctx.items().back();
        expect(c.kind == BindKind::Capt && c.cbound.unbounded == d.term->cbound.unbounded &&
                   c.cbound.set == d.term->cbound.set,
               d, "capture binding differs");
        expect(d.use.empty(), d, "a value has a non-empty use set");
        const Shape& s = d.type.body.shape;
        if (!expect(!d.type.existential() && s->kind == ShapeKind::CFun, d, "type is not a capture function"))
            return;
        expect(s->name == c.name && alpha_eq(s->result, b.type), d, "capture function does not match the body");
        closure_covers(d, b, d.type.body.cs);
    }

    void pack(const Derivation& d) {
        if (!premises(d, 2) || !expect(d.term->kind == TermKind::Pack, d, "subject is not a pack")) return;
        const Derivation& v = d.premises[0];
        const Derivation& s = d.premises[1];
        expect(v.rule == "var" && s.rule == "sub", d, "premises are not var then sub");
        expect(d.use.empty(), d, "a value has a non-empty use set");
        if (!expect(d.type.existential(), d, "packed type is not existential")) return;
        if (d.term->ann) expect(alpha_eq(*d.term->ann, d.type), d, "packed type differs from the ascription");
        Type inst = subst_capt_var(d.type.body, Capture::capt(*d.type.binder), d.term->cs, ns_);
        expect(alpha_eq(s.from, v.type) && alpha_eq(s.type, plain(inst)), d,
               "payload is not widened to the instantiated body");
    }

    void app(const Derivation& d) {
        if (!expect(d.term->kind == TermKind::App, d, "subject is not an application")) return;
        for (const auto& p : d.premises) node(p);
        if (!expect(d.premises.size() >= 2, d, "missing variable premises")) return;
        const Derivation& f = d.premises[0];
        const Derivation& y = d.premises[1];
        expect(f.rule == "var" && y.rule == "var", d, "operands are not typed by var");
        CaptureSet use{Capture::term(d.term->x), Capture::term(d.term->y)};
        expect(d.use == use, d, "use set is not {f, y}");
        Shape s = promote(d.ctx, f.type.body.shape);
        if (s->kind == ShapeKind::Never) {
            expect(d.type.body.shape->kind == ShapeKind::Never, d, "calling Never yields Never");
            return;
        }
        if (!expect(d.premises.size() == 3 && d.premises[2].rule == "sub", d, "missing argument subsumption"))
            return;
        const Derivation& arg = d.premises[2];
        expect(alpha_eq(arg.from, y.type), d, "argument subsumption starts elsewhere");
        if (d.rule == "invoke") {
            if (!expect(s->kind == ShapeKind::Break, d, "invoked value is not a break capability")) return;
            expect(alpha_eq(arg.type, plain(pure(s->sbound))), d, "argument not widened to the payload");
            expect(d.type.body.shape->kind == ShapeKind::Never, d, "invoke does not return");
            return;
        }
        if (!expect(s->kind == ShapeKind::Fun, d, "callee is not a function")) return;
        expect(alpha_eq(arg.type, plain(s->param)), d, "argument not widened to the parameter");
        expect(alpha_eq(d.type, subst_term_var(s->result, s->name, d.term->y, ns_)), d,
               "result is not the codomain at the argument");
    }

    void tapp(const Derivation& d) {
        if (!expect(d.term->kind == TermKind::TApp, d, "subject is not a type application")) return;
        for (const auto& p : d.premises) node(p);
        auto ft = var_type(d.ctx, d.term->x);
        if (!expect(ft.has_value(), d, "callee is not bound")) return;
        expect(d.use == CaptureSet::of_term(d.term->x), d, "use set is not {f}");
        expect(wf_shape_capless(d.ctx, d.term->shape), d, "type argument is not well-formed");
        Shape s = promote(d.ctx, ft->shape);
        if (s->kind == ShapeKind::Never) return;
        if (!expect(s->kind == ShapeKind::TFun, d, "callee is not a type function")) return;
        expect(subshape_capless(d.ctx, d.term->shape, s->sbound, ns_), d, "type argument exceeds the bound");
        expect(alpha_eq(d.type, subst_type_var(s->result, s->name, pure(d.term->shape), ns_)), d,
               "result is not the instantiated body");
    }

    void capp(const Derivation& d) {
        if (!expect(d.term->kind == TermKind::CApp, d, "subject is not a capture application")) return;
        for (const auto& p : d.premises) node(p);
        auto ft = var_type(d.ctx, d.term->x);
        if (!expect(ft.has_value(), d, "callee is not bound")) return;
        expect(d.use == CaptureSet::of_term(d.term->x), d, "use set is not {f}");
        expect(wf_cset_capless(d.ctx, d.term->cs), d, "capture argument is not well-formed");
        Shape s = promote(d.ctx, ft->shape);
        if (s->kind == ShapeKind::Never) return;
        if (!expect(s->kind == ShapeKind::CFun, d, "callee is not a capture function")) return;
        expect(bound_subtype(d.ctx, CaptureBound::of(d.term->cs), s->cbound), d, "capture argument exceeds the bound");
        expect(alpha_eq(d.type, subst_capt_var(s->result, Capture::capt(s->name), d.term->cs, ns_)), d,
               "result is not the instantiated body");
    }

    // Both premises are widened to the conclusion; the conclusion must not mention the binders.
    void let(const Derivation& d, bool unpack) {
        if (!premises(d, 2)) return;
        if (!expect(d.term->kind == (unpack ? TermKind::LetEx : TermKind::Let), d, "subject does not match the rule"))
            return;
        const Derivation& r = d.premises[0];
        const Derivation& b = d.premises[1];
        expect(extends(r.ctx, d.ctx, 0), d, "right-hand side is checked in another context");
        if (!expect(extends(b.ctx, d.ctx, unpack ? 2 : 1), d, "body context has the wrong bindings")) return;
        const Binding& x = b.ctx.items().back();
        if (unpack) {
            const Binding& c = b.ctx.items()[d.ctx.size()];
            expect(c.kind == BindKind::Capt && c.cbound.unbounded, d, "witness binding is not an unbounded capture");
            if (r.type.existential()) {
                Type opened = subst_capt_var(r.type.body, Capture::capt(*r.type.binder), CaptureSet::of_capt(c.name),
                                             ns_);
                expect(x.kind == BindKind::Term && alpha_eq(x.type, opened), d, "unpacked binding differs");
            } else {
                expect(r.type.body.shape->kind == ShapeKind::Never, d, "right-hand side is not existential");
            }
        } else {
            expect(!r.type.existential(), d, "plain let of an existential");
            expect(x.kind == BindKind::Term && alpha_eq(x.type, r.type.body), d, "let binding differs");
        }
        expect(subcapture_capless(d.ctx, r.use, d.use), d, "right-hand side use is not covered");
        expect(subcapture_capless(b.ctx, b.use, d.use), d, "body use is not covered");
        expect(subtype_capless(b.ctx, b.type, d.type, ns_), d, "body type does not widen to the conclusion");
    }

    void boundary(const Derivation& d) {
        if (!premises(d, 2) || !expect(d.term->kind == TermKind::Boundary, d, "subject is not a boundary")) return;
        const Derivation& b = d.premises[0];
        const Derivation& s = d.premises[1];
        if (!expect(extends(b.ctx, d.ctx, 2), d, "body context has the wrong bindings")) return;
        const Binding& c = b.ctx.items()[d.ctx.size()];
        const Binding& x = b.ctx.items().back();
        expect(c.kind == BindKind::Capt && c.cbound.unbounded, d, "scope capture is not unbounded");
        expect(x.kind == BindKind::Term &&
                   alpha_eq(x.type, Type{mk_break(d.term->shape), CaptureSet::of_capt(c.name)}),
               d, "break capability binding differs");
        Exist want = plain(pure(d.term->shape));
        expect(alpha_eq(d.type, want), d, "type is not the declared result");
        expect(s.rule == "sub" && alpha_eq(s.from, b.type) && alpha_eq(s.type, want), d,
               "body is not widened to the declared result");
        CaptureSet allowed = d.use.unite(CaptureSet{Capture::capt(c.name), Capture::term(x.name)});
        expect(subcapture_capless(b.ctx, b.use, allowed), d, "body use is not covered");
    }

    void scope(const Derivation& d) {
        if (!premises(d, 1) || !expect(d.term->kind == TermKind::Scope, d, "subject is not a scope")) return;
        const Derivation& b = d.premises[0];
        Exist want = plain(pure(d.term->shape));
        expect(alpha_eq(d.type, want), d, "type is not the declared result");
        expect(subtype_capless(d.ctx, b.type, want, ns_), d, "body does not produce the declared result");
        expect(subcapture_capless(d.ctx, b.use, d.use), d, "body use is not covered");
    }

    NameSupply& ns_;
};

}  // namespace

std::vector<std::string> validate_derivation(const Derivation& d, NameSupply& ns) {
    Validator v(ns);
    v.node(d);
    return v.problems;
}

}  // namespace capless
