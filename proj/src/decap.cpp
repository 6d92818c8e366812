#include "capless/decap.hpp"

#include <set>
#include <unordered_map>

#include "capless/reacap_check.hpp"
#include "capless/subcapture.hpp"
#include "capless/wellformed.hpp"

namespace capless {

namespace {

[[noreturn]] void unsupported(const std::string& what) {
    fail(code::TranslationUnsupported, what);
}

const CaptureSet& lookup(const std::map<std::uint64_t, CaptureSet>& m, const Name& x, const char* which) {
    auto it = m.find(x.serial);
    if (it == m.end())
        fail(code::UnmappedCapture, std::string("no ") + which + " entry for " + x.hint);
    return it->second;
}

// --- type encoding ---

class Encoder {
public:
    Encoder(const TypeDefContext& defs, NameSupply& ns) : defs_(defs), ns_(ns) {}

    Type type(const TranslationContext& tau, const Type& t) {
        const Shape& s = t.shape;
        CaptureSet cs = encode_cset(tau, t.cs);
        switch (s->kind) {
            case ShapeKind::TVar: {
                auto it = env_.find(s->name.serial);
                if (it == env_.end()) break;
                Type arg = it->second.encoded ? it->second.t : type(tau, it->second.t);
                return Type{arg.shape, arg.cs.unite(cs)};
            }
            case ShapeKind::Fun:
                return fun(tau, s, cs);
            case ShapeKind::Applied:
                return applied(tau, s, &cs);
            default:
                break;
        }
        return Type{shape(tau, s), cs};
    }

    // A term binding x: S^C with [[C]] = cx. A function shape carries cx on its arrow as well.
    Type binding(const TranslationContext& tau, const Shape& s, const CaptureSet& cx) {
        if (s->kind == ShapeKind::Fun) return fun(tau, s, cx);
        if (s->kind == ShapeKind::Applied) {
            Type r = applied(tau, s, &cx);
            return Type{r.shape, r.cs.unite(cx)};
        }
        Type r = type(tau, pure(s));
        return Type{r.shape, r.cs.unite(cx)};
    }

    Shape shape(const TranslationContext& tau, const Shape& s) {
        switch (s->kind) {
            case ShapeKind::Top:
            case ShapeKind::Never:
                return s;
            case ShapeKind::TVar:
                if (!env_.count(s->name.serial)) return s;
                [[fallthrough]];
            case ShapeKind::Fun:
            case ShapeKind::Applied: {
                Type r = type(tau, pure(s));
                if (!r.cs.empty()) unsupported("a capturing type argument lands in a shape-only position");
                return r.shape;
            }
            case ShapeKind::Boxed: {
                // box T  ~>  forall [X] (forall [X] T')^{C'}
                Type inner = type(tau, s->param);
                Name x1 = ns_.fresh("X");
                Name x2 = ns_.fresh("X");
                Shape in = mk_tfun(x2, mk_top(), plain(inner));
                return mk_tfun(x1, mk_top(), plain(Type{in, inner.cs}));
            }
            case ShapeKind::TFun:
                return mk_tfun(s->name, shape(tau, s->sbound), plain(type(tau, s->result.body)));
            case ShapeKind::CFun:
                return mk_cfun(s->name, CaptureBound::star(), plain(type(tau, s->result.body)));
            case ShapeKind::Break:
                return mk_break(shape(tau, s->sbound));
        }
        return s;
    }

private:
    struct EnvEntry {
        bool encoded;  // t is already a target type; otherwise a source type encoded at its use
        Type t;
    };

    Type fun(const TranslationContext& tau, const Shape& s, const CaptureSet& cf) {
        const Name& x = s->name;
        Name cx = ns_.fresh("c_" + x.hint);
        Name cxs = ns_.fresh("c_" + x.hint + "star");
        Type param = binding(tau.with_interp(CaptureSet::of_capt(cxs)), s->param.shape, CaptureSet::of_capt(cx));
        CaptureBound b = encode_bound(tau, s->param.cs);
        Name c = ns_.fresh("c");
        TranslationContext inner = tau.with_interp(CaptureSet::of_capt(c));
        inner.rho[x.serial] = CaptureSet::of_capt(cx);
        inner.rho_star[x.serial] = CaptureSet::of_capt(cxs);
        Type u = type(inner, s->result.body);
        CaptureSet cff = cf.unite(CaptureSet::of_capt(cx));
        if (s->use == UseAnnot::Use) cff = cff.unite(CaptureSet::of_capt(cxs));
        Shape f = mk_fun(UseAnnot::Plain, x, param, exists(c, u));
        Shape out = mk_cfun(cx, b, plain(pure(mk_cfun(cxs, CaptureBound::star(), plain(Type{f, cff})))));
        // C'_f also stays on the outside: a variable of this type is S^{x}, never pure.
        return Type{out, cf};
    }

    Type applied(const TranslationContext& tau, const Shape& s, const CaptureSet* bind_cs = nullptr) {
        const TypeDef* d = defs_.find(s->name);
        if (!d) fail(code::UnknownTypeDef, "unknown type definition " + s->name.hint);
        if (d->params.size() != s->args.size()) fail(code::Arity, "wrong number of arguments for " + s->name.hint);
        std::vector<std::pair<std::uint64_t, std::optional<EnvEntry>>> saved;
        std::vector<EnvEntry> entries;
        for (std::size_t i = 0; i < d->params.size(); ++i) {
            if (d->params[i].second == Variance::Covariant)
                entries.push_back({true, type(tau, s->args[i])});
            else
                entries.push_back({false, s->args[i]});
        }
        for (std::size_t i = 0; i < d->params.size(); ++i) {
            std::uint64_t k = d->params[i].first.serial;
            auto it = env_.find(k);
            saved.emplace_back(k, it == env_.end() ? std::nullopt : std::optional<EnvEntry>(it->second));
            env_.insert_or_assign(k, entries[i]);
        }
        Type r = bind_cs ? binding(tau, d->body, *bind_cs) : type(tau, pure(d->body));
        for (auto& [k, v] : saved) {
            if (v)
                env_.insert_or_assign(k, *v);
            else
                env_.erase(k);
        }
        return r;
    }

    const TypeDefContext& defs_;
    NameSupply& ns_;
    std::unordered_map<std::uint64_t, EnvEntry> env_;
};

// --- let chains in the target ---

class Chain {
public:
    Chain(Context delta, NameSupply& ns) : delta_(std::move(delta)), ns_(ns) {}

    Name bind(const Term& rhs, const std::string& hint) {
        if (rhs->kind == TermKind::Var) return rhs->x;
        TypingResult r = synth_capless(delta_, rhs, ns_);
        if (r.type.existential()) fail(code::Internal, "translation bound an existential with a plain let");
        Name z = ns_.fresh(hint);
        steps_.push_back({false, {}, z, rhs});
        delta_ = delta_.extend_term(z, r.type.body);
        return z;
    }

    std::pair<Name, Name> unpack(const Term& rhs, const std::string& hint) {
        TypingResult r = synth_capless(delta_, rhs, ns_);
        if (!r.type.existential()) fail(code::Internal, "translation unpacked a non-existential");
        Name c = ns_.fresh("c");
        Name z = ns_.fresh(hint);
        Type zt = subst_capt_var(r.type.body, Capture::capt(*r.type.binder), CaptureSet::of_capt(c), ns_);
        steps_.push_back({true, c, z, rhs});
        delta_ = delta_.extend_capt(c).extend_term(z, zt);
        return {c, z};
    }

    Term wrap(Term body) const {
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it)
            body = it->ex ? mk_letex(it->c, it->x, it->rhs, body) : mk_let(it->x, it->rhs, body);
        return body;
    }

    const Context& delta() const { return delta_; }

private:
    struct Step {
        bool ex;
        Name c;
        Name x;
        Term rhs;
    };
    Context delta_;
    NameSupply& ns_;
    std::vector<Step> steps_;
};

Shape expose_source(const Context& gamma, const TypeDefContext& defs, Shape s, NameSupply& ns) {
    for (;;) {
        while (s->kind == ShapeKind::TVar) {
            const Binding* b = gamma.find(s->name);
            if (!b || b->kind != BindKind::Type) return s;
            s = b->bound;
        }
        if (s->kind != ShapeKind::Applied) return s;
        try {
            s = dealias(gamma, defs, s, ns).shape;
        } catch (const CheckError&) {
            return s;
        }
    }
}

// Capture sets of s at positions interpreted by D (not under an arrow).
void interp_sets(const Shape& s, const TypeDefContext& defs, CaptureSet& out) {
    switch (s->kind) {
        case ShapeKind::Boxed:
            out = out.unite(s->param.cs);
            interp_sets(s->param.shape, defs, out);
            break;
        case ShapeKind::TFun:
        case ShapeKind::CFun: {
            CaptureSet in = s->result.body.cs;
            interp_sets(s->result.body.shape, defs, in);
            if (s->kind == ShapeKind::CFun) in = in.without(Capture::capt(s->name));
            out = out.unite(in);
            break;
        }
        case ShapeKind::Applied: {
            const TypeDef* d = defs.find(s->name);
            if (!d) break;
            for (std::size_t i = 0; i < s->args.size() && i < d->params.size(); ++i) {
                if (d->params[i].second != Variance::Covariant) continue;
                out = out.unite(s->args[i].cs);
                interp_sets(s->args[i].shape, defs, out);
            }
            break;
        }
        default:
            break;
    }
}

// Encodes what it can of c, keeping only captures that make sense in delta.
CaptureSet encode_visible(const TranslationContext& tau, const Context& delta, const CaptureSet& c) {
    CaptureSet out;
    for (const auto& x : c) {
        CaptureSet e;
        try {
            e = encode_cset(tau, CaptureSet{x});
        } catch (const CheckError&) {
            continue;
        }
        for (const auto& y : e)
            if (y.kind == CaptureKind::Cap || delta.has(y.name)) out.insert(y);
    }
    return out;
}

CaptureSet visible(const Context& delta, const CaptureSet& c) {
    CaptureSet out;
    for (const auto& y : c)
        if (y.kind == CaptureKind::Cap || delta.has(y.name)) out.insert(y);
    return out;
}

class Translator {
public:
    Translator(const TypeDefContext& defs, NameSupply& ns) : defs_(defs), ns_(ns) {}

    Type enc(const TranslationContext& tau, const Type& t) { return Encoder(defs_, ns_).type(tau, t); }

    Type enc_shape(const TranslationContext& tau, const Shape& s, const CaptureSet& target_cs) {
        return Encoder(defs_, ns_).binding(tau, s, target_cs);
    }

    Exist packed_type(const TranslationContext& tau, const Type& t) {
        Name c = ns_.fresh("c");
        return exists(c, enc(tau.with_interp(CaptureSet::of_capt(c)), t));
    }

    Adapted adapt(const TranslationContext& tau, const Context& gamma, const Context& delta, const Term& a,
                  const Shape& s1, const Shape& s2, const CaptureSet& c1, const CaptureSet& c2,
                  const CaptureSet& d1) {
        Exist actual = synth_capless(delta, a, ns_).type;
        // Candidates for the new interpretation: d1, the sets d1 stood for in S1, then both.
        CaptureSet src = c1.contains_cap() ? c1 : CaptureSet{};
        interp_sets(s1, defs_, src);
        CaptureSet exact = encode_visible(tau.with_interp(d1), delta, src);
        CaptureSet held = actual.existential() ? CaptureSet{} : visible(delta, actual.body.cs);
        for (const CaptureSet& d : {d1, exact, d1.unite(exact), exact.unite(held), d1.unite(exact).unite(held)}) {
            TranslationContext td = tau.with_interp(d);
            Type target = enc_shape(td, s2, encode_cset(td, c2));
            if (subtype_capless(delta, actual, plain(target), ns_)) return {a, d};
        }
        if (s1->kind == ShapeKind::TVar && s2->kind == ShapeKind::TVar && s1->name == s2->name)
            unsupported("no adapter between two occurrences of " + s1->name.hint);
        Shape e1 = expose_source(gamma, defs_, s1, ns_);
        Shape e2 = expose_source(gamma, defs_, s2, ns_);
        if (e1 != s1 || e2 != s2) return adapt(tau, gamma, delta, a, e1, e2, c1, c2, d1);
        if (e1->kind != e2->kind)
            unsupported("no adapter from " + print(e1, &gamma) + " to " + print(e2, &gamma));
        switch (e1->kind) {
            case ShapeKind::Boxed:
                return adapt_box(tau, gamma, delta, a, e1, e2, d1);
            case ShapeKind::Fun:
                return adapt_fun(tau, gamma, delta, a, e1, e2, d1);
            case ShapeKind::TFun: {
                Name x = ns_.fresh_like(e1->name);
                Context g2 = gamma.extend_type(x, mk_top());
                Context d2 = delta.extend_type(x, mk_top());
                Chain ch(d2, ns_);
                Name fa = ch.bind(a, "f");
                Name z1 = ch.bind(mk_tapp(fa, mk_tvar(x)), "z");
                Type r1 = subst_type_var(e1->result.body, e1->name, pure(mk_tvar(x)), ns_);
                Type r2 = subst_type_var(e2->result.body, e2->name, pure(mk_tvar(x)), ns_);
                Adapted in = adapt(tau, g2, ch.delta(), mk_var(z1), r1.shape, r2.shape, r1.cs, r2.cs, d1);
                return {mk_tlam(x, mk_top(), ch.wrap(in.term)), in.interp};
            }
            case ShapeKind::CFun: {
                Name c = ns_.fresh_like(e1->name);
                Context g2 = gamma.extend_capt(c);
                Context d2 = delta.extend_capt(c);
                Chain ch(d2, ns_);
                Name fa = ch.bind(a, "f");
                Name z1 = ch.bind(mk_capp(fa, CaptureSet::of_capt(c)), "z");
                Type r1 = subst_capt_var(e1->result.body, Capture::capt(e1->name), CaptureSet::of_capt(c), ns_);
                Type r2 = subst_capt_var(e2->result.body, Capture::capt(e2->name), CaptureSet::of_capt(c), ns_);
                Adapted in = adapt(tau, g2, ch.delta(), mk_var(z1), r1.shape, r2.shape, r1.cs, r2.cs, d1);
                return {mk_clam(c, CaptureBound::star(), ch.wrap(in.term)), visible(delta, in.interp)};
            }
            default:
                unsupported("no adapter from " + print(e1, &gamma) + " to " + print(e2, &gamma));
        }
    }

    Translated translate(const TranslationContext& tau, const Context& delta, const Derivation& d) {
        const Term& t = d.term;
        if (d.rule == "var") return {mk_var(t->x), rho_star(tau, t->x), false};
        if (d.rule == "box") {
            Name x1 = ns_.fresh("X");
            Name x2 = ns_.fresh("X");
            return {mk_tlam(x1, mk_top(), mk_tlam(x2, mk_top(), mk_var(t->x))), rho_star(tau, t->x), false};
        }
        if (d.rule == "unbox") {
            const Derivation& sub = d.premises.at(1);
            const Type& from = sub.from.body;
            const Type& to = sub.type.body;
            Adapted a = adapt(tau, d.ctx, delta, mk_var(t->x), from.shape, to.shape, from.cs, from.cs,
                              rho_star(tau, t->x));
            Chain ch(delta, ns_);
            Name z0 = ch.bind(a.term, "b");
            Name z1 = ch.bind(mk_tapp(z0, mk_top()), "b");
            return {ch.wrap(mk_tapp(z1, mk_top())), a.interp, false};
        }
        if (d.rule == "abs") return abs(tau, delta, d);
        if (d.rule == "tabs" || d.rule == "cabs") {
            const Derivation& p = d.premises.at(0);
            const Binding& b = p.ctx.items().back();
            Context d2 = d.rule == "tabs" ? delta.extend_type(b.name, mk_top()) : delta.extend_capt(b.name);
            Translated body = translate(tau, d2, p);
            if (body.packed)
                unsupported("the body of a type or capture abstraction has an existential translation");
            Term out = d.rule == "tabs" ? mk_tlam(b.name, mk_top(), body.term)
                                        : mk_clam(b.name, CaptureBound::star(), body.term);
            CaptureSet use = synth_capless(d2, body.term, ns_).use;
            CaptureSet interp = visible(delta, body.interp);
            if (d.type.body.cs.contains_cap()) interp = interp.unite(visible(delta, use));
            return {out, interp, false};
        }
        if (d.rule == "app") return app(tau, delta, d);
        if (d.rule == "tapp") {
            Type s = enc(tau.with_interp({}), pure(t->shape));
            if (!s.cs.empty()) unsupported("type argument encodes to a capturing type");
            return {mk_tapp(t->x, s.shape), rho_star(tau, t->x), false};
        }
        if (d.rule == "capp") {
            if (t->cs.contains_cap()) unsupported("capture argument containing cap");
            return {mk_capp(t->x, encode_cset(tau, t->cs)), rho_star(tau, t->x), false};
        }
        if (d.rule == "let") return let(tau, delta, d);
        unsupported("no translation for rule " + d.rule);
    }

private:
    CaptureSet rho_star(const TranslationContext& tau, const Name& x) { return lookup(tau.rho_star, x, "rho*"); }

    Term packify(const Translated& r, const TranslationContext& tau, const Context& delta, const Type& src_type) {
        if (r.packed) return r.term;
        Chain ch(delta, ns_);
        Name z = ch.bind(r.term, "r");
        return ch.wrap(mk_pack(r.interp, z, packed_type(tau, src_type)));
    }

    Translated abs(const TranslationContext& tau, const Context& delta, const Derivation& d) {
        const Derivation& p = d.premises.at(0);
        const Binding& b = p.ctx.items().back();
        const Name& x = b.name;
        Name cx = ns_.fresh("c_" + x.hint);
        Name cxs = ns_.fresh("c_" + x.hint + "star");
        CaptureBound bound = encode_bound(tau, b.type.cs);
        Type param = enc_shape(tau.with_interp(CaptureSet::of_capt(cxs)), b.type.shape, CaptureSet::of_capt(cx));
        TranslationContext t2 = tau;
        t2.rho[x.serial] = CaptureSet::of_capt(cx);
        t2.rho_star[x.serial] = CaptureSet::of_capt(cxs);
        Context d2 = delta.extend_capt(cx, bound).extend_capt(cxs).extend_term(x, param);
        Translated body = translate(t2, d2, p);
        Term bt = packify(body, t2, d2, p.type.body);
        CaptureSet use = synth_capless(d2, bt, ns_).use;
        Term lam = mk_lam(UseAnnot::Plain, x, param, bt);
        Term out = mk_clam(cx, bound, mk_clam(cxs, CaptureBound::star(), lam));
        // cap can only reach the outer capture set of a function type
        return {out, d.type.body.cs.contains_cap() ? visible(delta, use) : CaptureSet{}, false};
    }

    Translated app(const TranslationContext& tau, const Context& delta, const Derivation& d) {
        const Term& t = d.term;
        const Derivation& sub = d.premises.at(2);
        const Type& yt = sub.from.body;
        const Type& param = sub.type.body;
        CaptureSet ycs = CaptureSet::of_term(t->y);
        Adapted a = adapt(tau, d.ctx, delta, mk_var(t->y), yt.shape, param.shape, ycs, ycs, rho_star(tau, t->y));
        Chain ch(delta, ns_);
        Name za = ch.bind(a.term, "a");
        Name z1 = ch.bind(mk_capp(t->x, lookup(tau.rho, t->y, "rho")), "f");
        Name z2 = ch.bind(mk_capp(z1, a.interp), "f");
        return {ch.wrap(mk_app(z2, za)), a.interp, true};
    }

    Translated let(const TranslationContext& tau, const Context& delta, const Derivation& d) {
        const Derivation& p1 = d.premises.at(0);
        const Derivation& p2 = d.premises.at(1);
        const Name& z = p2.ctx.items().back().name;
        const Type& t1 = p1.type.body;
        Translated r1 = translate(tau, delta, p1);
        TranslationContext t2 = tau;
        if (!r1.packed) {
            // z stands for what its value captures, so arrow sets of closures bound here line up
            t2.rho[z.serial] = encode_cset(tau.with_interp(r1.interp), t1.cs);
            t2.rho_star[z.serial] = r1.interp;
            Context d2 = delta.extend_term(z, enc(tau.with_interp(r1.interp), t1));
            Translated r2 = translate(t2, d2, p2);
            Term body = packify(r2, t2, d2, p2.type.body);
            return {mk_let(z, r1.term, body), r1.interp.unite(visible(delta, r2.interp)), true};
        }
        Name cz = ns_.fresh("c_" + z.hint);
        t2.rho[z.serial] = encode_cset(tau.with_interp(CaptureSet::of_capt(cz)), t1.cs);
        t2.rho_star[z.serial] = CaptureSet::of_capt(cz);
        Context d2 = delta.extend_capt(cz).extend_term(z, enc(tau.with_interp(CaptureSet::of_capt(cz)), t1));
        Translated r2 = translate(t2, d2, p2);
        Term body = packify(r2, t2, d2, p2.type.body);
        return {mk_letex(cz, z, r1.term, body), visible(delta, r2.interp), true};
    }

    Adapted adapt_box(const TranslationContext& tau, const Context& gamma, const Context& delta, const Term& a,
                      const Shape& s1, const Shape& s2, const CaptureSet& d1) {
        Name x1 = ns_.fresh("X");
        Name x2 = ns_.fresh("X");
        Context d2 = delta.extend_type(x1, mk_top()).extend_type(x2, mk_top());
        Chain ch(d2, ns_);
        Name fa = ch.bind(a, "b");
        Name z1 = ch.bind(mk_tapp(fa, mk_top()), "b");
        Name z2 = ch.bind(mk_tapp(z1, mk_top()), "b");
        const Type& in1 = s1->param;
        const Type& in2 = s2->param;
        Adapted in = adapt(tau, gamma, ch.delta(), mk_var(z2), in1.shape, in2.shape, in1.cs, in2.cs, d1);
        Term body = ch.wrap(in.term);
        return {mk_tlam(x1, mk_top(), mk_tlam(x2, mk_top(), body)), visible(delta, in.interp)};
    }

    // lambda[c_z] lambda[c_z*] lambda(z). let f = a, z_a = adapt(z), f1 = f[c_z], f2 = f1[D0],
    // <c3, z3> = f2 z_a, z_o = adapt(z3) in <D0', z_o>
    Adapted adapt_fun(const TranslationContext& tau, const Context& gamma, const Context& delta, const Term& a,
                      const Shape& s1, const Shape& s2, const CaptureSet& d1) {
        Name z = ns_.fresh_like(s2->name);
        Name cz = ns_.fresh("c_" + z.hint);
        Name czs = ns_.fresh("c_" + z.hint + "star");
        const Type& p1 = s1->param;
        const Type p2 = s2->param;
        Type u1 = subst_term_var(s1->result.body, s1->name, z, ns_);
        Type u2 = subst_term_var(s2->result.body, s2->name, z, ns_);
        CaptureBound bound = encode_bound(tau, p2.cs);
        Type param = enc_shape(tau.with_interp(CaptureSet::of_capt(czs)), p2.shape, CaptureSet::of_capt(cz));
        TranslationContext t2 = tau;
        t2.rho[z.serial] = CaptureSet::of_capt(cz);
        t2.rho_star[z.serial] = CaptureSet::of_capt(czs);
        Context g2 = gamma.extend_term(z, p2);
        Context d2 = delta.extend_capt(cz, bound).extend_capt(czs).extend_term(z, param);
        Chain ch(d2, ns_);
        Name fa = ch.bind(a, "f");
        CaptureSet zcs = CaptureSet::of_term(z);
        Shape zshape = reach_refine(defs_, CaptureSet{Capture::reach(z)}, p2.shape);
        Adapted za = adapt(t2, g2, ch.delta(), mk_var(z), zshape, p1.shape, zcs, zcs, CaptureSet::of_capt(czs));
        Name zav = ch.bind(za.term, "a");
        Name f1 = ch.bind(mk_capp(fa, CaptureSet::of_capt(cz)), "f");
        Name f2 = ch.bind(mk_capp(f1, za.interp), "f");
        auto [c3, z3] = ch.unpack(mk_app(f2, zav), "r");
        Adapted out = adapt(t2, g2, ch.delta(), mk_var(z3), u1.shape, u2.shape, u1.cs, u2.cs, CaptureSet::of_capt(c3));
        Name zo = ch.bind(out.term, "r");
        Term body = ch.wrap(mk_pack(out.interp, zo, packed_type(t2, u2)));
        Term lam = mk_lam(UseAnnot::Plain, z, param, body);
        return {mk_clam(cz, bound, mk_clam(czs, CaptureBound::star(), lam)), d1};
    }

    const TypeDefContext& defs_;
    NameSupply& ns_;
};

}  // namespace

CaptureSet encode_cset(const TranslationContext& tau, const CaptureSet& c) {
    CaptureSet out;
    for (const auto& x : c) {
        switch (x.kind) {
            case CaptureKind::Cap:
                out = out.unite(tau.interp);
                break;
            case CaptureKind::Term:
                out = out.unite(lookup(tau.rho, x.name, "rho"));
                break;
            case CaptureKind::Reach:
                out = out.unite(lookup(tau.rho_star, x.name, "rho*"));
                break;
            case CaptureKind::Capt:
                out.insert(x);
                break;
        }
    }
    return out;
}

CaptureBound encode_bound(const TranslationContext& tau, const CaptureSet& c) {
    if (c.contains_cap()) return CaptureBound::star();
    return CaptureBound::of(encode_cset(tau, c));
}

Type encode_type(const TranslationContext& tau, const TypeDefContext& defs, const Type& t, NameSupply& ns) {
    return Encoder(defs, ns).type(tau, t);
}

Shape encode_shape(const TranslationContext& tau, const TypeDefContext& defs, const Shape& s, NameSupply& ns) {
    return Encoder(defs, ns).shape(tau, s);
}

Type encode_binding(const TranslationContext& tau, const TypeDefContext& defs, const Shape& s, const CaptureSet& cx,
                    NameSupply& ns) {
    return Encoder(defs, ns).binding(tau, s, cx);
}

Exist encode_packed(const TranslationContext& tau, const TypeDefContext& defs, const Type& t, NameSupply& ns) {
    Name c = ns.fresh("c");
    return exists(c, encode_type(tau.with_interp(CaptureSet::of_capt(c)), defs, t, ns));
}

std::vector<std::string> proper_violations(const TranslationContext& tau, const Context& gamma,
                                           const Context& delta, const TypeDefContext& defs, NameSupply& ns) {
    std::vector<std::string> out;
    if (!wf_cset_capless(delta, tau.interp)) out.push_back("interpretation is not well-formed in the target");
    std::set<std::uint64_t> seen_star;
    for (const auto& b : gamma.items()) {
        if (b.kind == BindKind::Type) {
            const Binding* t = delta.find(b.name);
            if (!t || t->kind != BindKind::Type) out.push_back("type variable " + b.name.hint + " missing from target");
            continue;
        }
        if (b.kind != BindKind::Term) continue;
        const std::string& x = b.name.hint;
        auto r = tau.rho.find(b.name.serial);
        auto rs = tau.rho_star.find(b.name.serial);
        if (r == tau.rho.end() || rs == tau.rho_star.end()) {
            out.push_back(x + " is not mapped by rho and rho*");
            continue;
        }
        if (!wf_cset_capless(delta, r->second) || !wf_cset_capless(delta, rs->second))
            out.push_back("images of " + x + " are not well-formed in the target");
        if (rs->second.size() != 1) {
            out.push_back("rho*(" + x + ") is not a singleton");
        } else {
            const Capture& c = *rs->second.begin();
            if (!seen_star.insert(c.name.serial).second) out.push_back("rho* is not injective at " + x);
        }
        try {
            CaptureSet upper = encode_cset(tau.with_interp(r->second), b.type.cs);
            if (!subcapture_capless(delta, r->second, upper)) out.push_back("rho(" + x + ") exceeds its declared captures");
            Type want = encode_binding(tau.with_interp(rs->second), defs, b.type.shape, r->second, ns);
            const Binding* t = delta.find(b.name);
            if (!t || t->kind != BindKind::Term || !alpha_eq(t->type, want))
                out.push_back("target type of " + x + " is not its encoding");
        } catch (const CheckError& e) {
            out.push_back(e.diag().message);
        }
    }
    return out;
}

Adapted adapt_subtype(const TranslationContext& tau, const Context& gamma, const Context& delta,
                      const TypeDefContext& defs, const Term& a, const Shape& s1, const Shape& s2,
                      const CaptureSet& c, const CaptureSet& d1, NameSupply& ns) {
    return Translator(defs, ns).adapt(tau, gamma, delta, a, s1, s2, c, c, d1);
}

Translated translate(const TranslationContext& tau, const Context& delta, const TypeDefContext& defs,
                     const Derivation& d, NameSupply& ns) {
    return Translator(defs, ns).translate(tau, delta, d);
}

std::pair<TranslationContext, Context> initial_translation_context(const Program& src, NameSupply& ns) {
    TranslationContext tau;
    Context delta;
    for (const auto& b : src.ctx.items()) {
        switch (b.kind) {
            case BindKind::Type:
                delta = delta.extend_type(b.name, b.bound ? b.bound : mk_top());
                break;
            case BindKind::Capt:
                delta = delta.extend_capt(b.name, b.cbound);
                break;
            case BindKind::Term: {
                Name cx = ns.fresh("c_" + b.name.hint);
                Name cxs = ns.fresh("c_" + b.name.hint + "star");
                CaptureBound bound = encode_bound(tau, b.type.cs);
                Type t = encode_binding(tau.with_interp(CaptureSet::of_capt(cxs)), src.defs, b.type.shape,
                                        CaptureSet::of_capt(cx), ns);
                tau.rho[b.name.serial] = CaptureSet::of_capt(cx);
                tau.rho_star[b.name.serial] = CaptureSet::of_capt(cxs);
                delta = delta.extend_capt(cx, bound).extend_capt(cxs).extend_term(b.name, t);
                break;
            }
            case BindKind::Label:
                break;
        }
    }
    return {tau, delta};
}

TranslationReport verify_translation(const Program& src, NameSupply& ns) {
    TranslationReport rep;
    TypingResult r = synth_reacap(src.ctx, src.defs, src.term, ns);
    rep.source_type = print(r.type, &src.ctx);
    rep.source_use = print(r.use, &src.ctx);
    auto [tau, delta] = initial_translation_context(src, ns);
    rep.tau = tau;
    rep.output.dialect = Dialect::Capless;
    rep.output.ctx = delta;
    auto set_error = [&](const Diagnostic& d) { rep.error = d; };
    std::vector<std::string> bad = proper_violations(tau, src.ctx, delta, src.defs, ns);
    if (!bad.empty()) {
        Diagnostic d;
        d.code = code::NotProper;
        d.message = "initial translation context is not proper: " + bad.front();
        set_error(d);
        return rep;
    }
    Translated t;
    try {
        t = translate(tau, delta, src.defs, r.derivation, ns);
    } catch (const CheckError& e) {
        set_error(e.diag());
        return rep;
    }
    rep.output.term = t.term;
    Exist expected = t.packed ? encode_packed(tau, src.defs, r.type.body, ns)
                              : plain(encode_type(tau.with_interp(t.interp), src.defs, r.type.body, ns));
    rep.expected_type = print(expected, &delta);
    TypingResult out;
    try {
        out = synth_capless(delta, t.term, ns);
    } catch (const CheckError& e) {
        Diagnostic d = e.diag();
        d.message = "translated program does not type-check in Capless: " + d.message;
        set_error(d);
        return rep;
    }
    rep.output_type = print(out.type, &delta);
    rep.output_use = print(out.use, &delta);
    rep.alpha_equal = alpha_eq(out.type, expected);
    bool type_ok = subtype_capless(delta, out.type, expected, ns);
    bool use_ok = true;
    if (!r.use.contains_cap()) use_ok = subcapture_capless(delta, out.use, encode_cset(tau, r.use));
    rep.verified = type_ok && use_ok;
    if (!rep.verified) {
        Diagnostic d;
        d.code = code::TranslationMismatch;
        d.message = type_ok ? "translated use set " + rep.output_use + " exceeds the encoded source use set"
                            : "translated type does not match the encoding of the source type";
        d.expected = type_ok ? print(encode_cset(tau, r.use), &delta) : rep.expected_type;
        d.actual = type_ok ? rep.output_use : rep.output_type;
        set_error(d);
    }
    return rep;
}

}  // namespace capless
