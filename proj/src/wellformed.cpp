#include "capless/wellformed.hpp"

#include <string>

namespace capless {

// --- capless ---

bool wf_cset_capless(const Context& ctx, const CaptureSet& c) {
    for (const auto& x : c) {
        if (x.kind == CaptureKind::Cap || x.kind == CaptureKind::Reach) return false;
        const Binding* b = ctx.find(x.name);
        if (!b) return false;
        if (x.kind == CaptureKind::Term && b->kind != BindKind::Term && b->kind != BindKind::Label)
            return false;
        if (x.kind == CaptureKind::Capt && b->kind != BindKind::Capt) return false;
    }
    return true;
}

bool wf_bound_capless(const Context& ctx, const CaptureBound& b) {
    return b.unbounded || wf_cset_capless(ctx, b.set);
}

bool wf_shape_capless(const Context& ctx, const Shape& s) {
    if (!s) return false;
    switch (s->kind) {
        case ShapeKind::Top:
        case ShapeKind::Never:
            return true;
        case ShapeKind::TVar: {
            const Binding* b = ctx.find(s->name);
            return b && b->kind == BindKind::Type;
        }
        case ShapeKind::Fun:
            return wf_type_capless(ctx, s->param) &&
                   wf_type_capless(ctx.extend_term(s->name, s->param), s->result);
        case ShapeKind::TFun:
            return wf_shape_capless(ctx, s->sbound) &&
                   wf_type_capless(ctx.extend_type(s->name, s->sbound), s->result);
        case ShapeKind::CFun:
            return wf_bound_capless(ctx, s->cbound) &&
                   wf_type_capless(ctx.extend_capt(s->name, s->cbound), s->result);
        case ShapeKind::Break:
            return wf_shape_capless(ctx, s->sbound);
        case ShapeKind::Boxed:
        case ShapeKind::Applied:
            return false;
    }
    return false;
}

bool wf_type_capless(const Context& ctx, const Type& t) {
    return wf_shape_capless(ctx, t.shape) && wf_cset_capless(ctx, t.cs);
}

bool wf_type_capless(const Context& ctx, const Exist& e) {
    if (!e.binder) return wf_type_capless(ctx, e.body);
    return wf_type_capless(ctx.extend_capt(*e.binder), e.body);
}

bool wf_context_capless(const Context& ctx) {
    Context pre;
    for (const auto& b : ctx.items()) {
        if (pre.has(b.name)) return false;
        switch (b.kind) {
            case BindKind::Term:
                if (!wf_type_capless(pre, b.type)) return false;
                break;
            case BindKind::Type:
                if (!wf_shape_capless(pre, b.bound)) return false;
                break;
            case BindKind::Capt:
                if (!wf_bound_capless(pre, b.cbound)) return false;
                break;
            case BindKind::Label:
                if (!wf_shape_capless(pre, b.bound)) return false;
                break;
        }
        pre = pre.extend(b);
    }
    return true;
}

// --- reacap ---

bool wf_cset_reacap(const Context& ctx, const CaptureSet& c) {
    for (const auto& x : c) {
        if (x.kind == CaptureKind::Cap) continue;
        const Binding* b = ctx.find(x.name);
        if (!b) return false;
        if ((x.kind == CaptureKind::Term || x.kind == CaptureKind::Reach) && b->kind != BindKind::Term)
            return false;
        if (x.kind == CaptureKind::Capt && b->kind != BindKind::Capt) return false;
    }
    return true;
}

bool wf_shape_reacap(const Context& ctx, const TypeDefContext& defs, const Shape& s) {
    if (!s) return false;
    switch (s->kind) {
        case ShapeKind::Top:
            return true;
        case ShapeKind::TVar: {
            const Binding* b = ctx.find(s->name);
            return b && b->kind == BindKind::Type;
        }
        case ShapeKind::Fun:
            if (s->result.existential()) return false;
            return wf_type_reacap(ctx, defs, s->param) &&
                   wf_type_reacap(ctx.extend_term(s->name, s->param), defs, s->result.body);
        case ShapeKind::TFun:
            if (s->result.existential() || !s->sbound || s->sbound->kind != ShapeKind::Top) return false;
            return wf_type_reacap(ctx.extend_type(s->name, mk_top()), defs, s->result.body);
        case ShapeKind::CFun:
            if (s->result.existential() || !s->cbound.unbounded) return false;
            return wf_type_reacap(ctx.extend_capt(s->name), defs, s->result.body);
        case ShapeKind::Boxed:
            return wf_type_reacap(ctx, defs, s->param);
        case ShapeKind::Applied: {
            const TypeDef* d = defs.find(s->name);
            if (!d || d->params.size() != s->args.size()) return false;
            for (const auto& a : s->args)
                if (!wf_type_reacap(ctx, defs, a)) return false;
            return true;
        }
        case ShapeKind::Never:
        case ShapeKind::Break:
            return false;
    }
    return false;
}

bool wf_type_reacap(const Context& ctx, const TypeDefContext& defs, const Type& t) {
    return wf_shape_reacap(ctx, defs, t.shape) && wf_cset_reacap(ctx, t.cs);
}

bool wf_context_reacap(const Context& ctx, const TypeDefContext& defs) {
    Context pre;
    for (const auto& b : ctx.items()) {
        if (pre.has(b.name)) return false;
        switch (b.kind) {
            case BindKind::Term:
                if (!wf_type_reacap(pre, defs, b.type)) return false;
                break;
            case BindKind::Type:
                if (!b.bound || b.bound->kind != ShapeKind::Top) return false;
                break;
            case BindKind::Capt:
                if (!b.cbound.unbounded) return false;
                break;
            case BindKind::Label:
                return false;
        }
        pre = pre.extend(b);
    }
    return true;
}

// --- type definitions ---

namespace {

struct VarianceCheck {
    const TypeDefContext& earlier;
    const TypeDef& def;
    std::string problem;

    const Variance* param_variance(const Name& x) const {
        for (const auto& [n, v] : def.params)
            if (n == x) return &v;
        return nullptr;
    }

    static const char* sign(Variance v) { return v == Variance::Covariant ? "+" : "-"; }

    bool type(const Context& g, const Type& t, Variance v) {
        if (!wf_cset_reacap(g, t.cs)) {
            problem = "capture set is not well-formed";
            return false;
        }
        if (v == Variance::Covariant && t.cs.contains_cap()) {
            problem = "cap occurs in a covariant position";
            return false;
        }
        return shape(g, t.shape, v);
    }

    bool shape(const Context& g, const Shape& s, Variance v) {
        switch (s->kind) {
            case ShapeKind::Top:
                return true;
            case ShapeKind::TVar: {
                if (const Variance* pv = param_variance(s->name)) {
                    if (*pv != v) {
                        problem = std::string("parameter ") + s->name.hint + " (declared " + sign(*pv) +
                                  ") occurs in a " + sign(v) + " position";
                        return false;
                    }
                    return true;
                }
                const Binding* b = g.find(s->name);
                if (!b || b->kind != BindKind::Type) {
                    problem = "type variable " + s->name.hint + " is not in scope";
                    return false;
                }
                return true;
            }
            case ShapeKind::Fun:
                if (s->result.existential()) {
                    problem = "existential in a type definition";
                    return false;
                }
                return type(g, s->param, flip(v)) &&
                       type(g.extend_term(s->name, s->param), s->result.body, v);
            case ShapeKind::TFun:
                if (!s->sbound || s->sbound->kind != ShapeKind::Top) {
                    problem = "type parameters must be bounded by Top";
                    return false;
                }
                return type(g.extend_type(s->name, mk_top()), s->result.body, v);
            case ShapeKind::CFun:
                return type(g.extend_capt(s->name), s->result.body, v);
            case ShapeKind::Boxed:
                return type(g, s->param, v);
            case ShapeKind::Applied: {
                const TypeDef* d = earlier.find(s->name);
                if (!d) {
                    problem = "refers to " + s->name.hint + ", which is not defined earlier";
                    return false;
                }
                if (d->params.size() != s->args.size()) {
                    problem = "arity mismatch applying " + s->name.hint;
                    return false;
                }
                for (std::size_t i = 0; i < s->args.size(); ++i) {
                    Variance av = d->params[i].second == Variance::Covariant ? v : flip(v);
                    if (!type(g, s->args[i], av)) return false;
                }
                return true;
            }
            case ShapeKind::Never:
            case ShapeKind::Break:
                problem = "shape not available in type definitions";
                return false;
        }
        return false;
    }
};

}  // namespace

std::vector<Diagnostic> wf_typedef_context(const TypeDefContext& defs) {
    std::vector<Diagnostic> out;
    TypeDefContext earlier;
    for (const auto& d : defs.defs()) {
        VarianceCheck vc{earlier, d, {}};
        if (!vc.shape(Context{}, d.body, Variance::Covariant)) {
            Diagnostic diag;
            diag.code = vc.problem.find("cap occurs") != std::string::npos ? code::TypeDefCap
                                                                           : code::TypeDefVariance;
            diag.message = "type definition " + d.name.hint + ": " + vc.problem;
            diag.rule = "ds-cons";
            out.push_back(diag);
            return out;
        }
        earlier.add(d);
    }
    return out;
}

}  // namespace capless
