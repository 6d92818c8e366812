#include "capless/capless_eval.hpp"

#include <algorithm>

#include "capless/frontend.hpp"

namespace capless {

const Term* Machine::lookup(const Name& x) const {
    auto it = index.find(x.serial);
    return it == index.end() ? nullptr : &store[it->second].value;
}

bool Machine::is_label(const Name& x) const {
    return std::any_of(labels.begin(), labels.end(), [&](const auto& l) { return l.first == x; });
}

Machine initial_machine(const Term& t) {
    Machine m;
    m.focus = t;
    return m;
}

namespace {

Term plug_frame(const Frame& f, const Term& t) {
    switch (f.kind) {
        case Frame::Kind::Let:
            return mk_let(f.x, t, f.body);
        case Frame::Kind::LetEx:
            return mk_letex(f.c, f.x, t, f.body);
        case Frame::Kind::Scope:
            return mk_scope(f.x, f.shape, t);
    }
    return t;
}

std::string one_line(std::string s) {
    std::string out;
    bool space = false;
    for (char ch : s) {
        if (ch == '\n' || ch == ' ') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += ch;
    }
    return out;
}

std::string show(const Term& t) { return one_line(print(t)); }

StepResult stepped(const char* rule, std::string redex) {
    StepResult r;
    r.rule = rule;
    r.redex = std::move(redex);
    return r;
}

StepResult stuck(StuckReason why, std::string detail, std::string redex) {
    StepResult r;
    r.status = StepResult::Status::Stuck;
    r.reason = why;
    r.detail = std::move(detail);
    r.redex = std::move(redex);
    return r;
}

}  // namespace

Term plug(const Machine& m) {
    Term t = m.focus;
    for (auto it = m.frames.rbegin(); it != m.frames.rend(); ++it) t = plug_frame(*it, t);
    return t;
}

const char* stuck_reason_name(StuckReason r) {
    switch (r) {
        case StuckReason::None:
            return "none";
        case StuckReason::NoValue:
            return "no-value";
        case StuckReason::NotAFunction:
            return "not-a-function";
        case StuckReason::ScopeExtrusion:
            return "scope-extrusion";
        case StuckReason::BadUnpack:
            return "bad-unpack";
    }
    return "?";
}

StepResult step(Machine& m, NameSupply& ns) {
    for (;;) {
        const Term f = m.focus;
        switch (f->kind) {
            case TermKind::Let: {
                if (!is_answer(f->a)) {
                    m.frames.push_back(Frame{Frame::Kind::Let, f->x, {}, f->b, {}});
                    m.focus = f->a;
                    continue;
                }
                std::string redex = "let " + f->x.hint + " = " + show(f->a) + " in ...";
                if (f->a->kind == TermKind::Var) {
                    m.focus = subst_term_var(f->b, f->x, f->a->x, ns);
                    return stepped("rename", redex);
                }
                Name x = f->x;
                if (m.index.count(x.serial)) x = ns.fresh_like(x);
                m.index[x.serial] = m.store.size();
                m.store.push_back(StoreEntry{x, f->a});
                m.focus = x == f->x ? f->b : subst_term_var(f->b, f->x, x, ns);
                return stepped("lift", redex);
            }
            case TermKind::LetEx: {
                if (f->a->kind == TermKind::Pack) {
                    Term body = subst_capt_var(f->b, Capture::capt(f->y), f->a->cs, ns);
                    m.focus = subst_term_var(body, f->x, f->a->x, ns);
                    return stepped("rename-e", "let [" + f->y.hint + ", " + f->x.hint + "] = " + show(f->a) + " in ...");
                }
                if (is_answer(f->a))
                    return stuck(StuckReason::BadUnpack, "existential let of a non-pack answer", show(f->a));
                m.frames.push_back(Frame{Frame::Kind::LetEx, f->x, f->y, f->b, {}});
                m.focus = f->a;
                continue;
            }
            case TermKind::Scope: {
                if (is_answer(f->a)) {
                    m.focus = f->a;
                    return stepped("leave", show(f));
                }
                m.frames.push_back(Frame{Frame::Kind::Scope, f->x, {}, {}, f->shape});
                m.focus = f->a;
                continue;
            }
            case TermKind::Boundary: {
                Name l = ns.fresh("l");
                m.labels.push_back({l, f->shape});
                Term body = subst_capt_var(f->a, Capture::capt(f->y), CaptureSet::of_term(l), ns);
                body = subst_term_var(body, f->x, l, ns);
                std::string redex = "boundary [" + one_line(print(f->shape)) + "] as [" + f->y.hint + ", " +
                                    f->x.hint + "] in ...";
                m.focus = mk_scope(l, f->shape, body);
                return stepped("enter", redex);
            }
            case TermKind::App: {
                std::string redex = show(f);
                if (m.is_label(f->x)) {
                    for (std::size_t i = m.frames.size(); i-- > 0;) {
                        const Frame& fr = m.frames[i];
                        if (fr.kind == Frame::Kind::Scope && fr.x == f->x) {
                            m.frames.resize(i);
                            m.focus = mk_var(f->y);
                            return stepped("breakout", redex);
                        }
                    }
                    return stuck(StuckReason::ScopeExtrusion, "break " + f->x.hint + " invoked outside its scope",
                                 redex);
                }
                const Term* v = m.lookup(f->x);
                if (!v) return stuck(StuckReason::NoValue, f->x.hint + " has no value in the store", redex);
                if ((*v)->kind != TermKind::Lam)
                    return stuck(StuckReason::NotAFunction, f->x.hint + " is not a function value", redex);
                m.focus = subst_term_var((*v)->a, (*v)->x, f->y, ns);
                return stepped("apply", redex);
            }
            case TermKind::TApp: {
                std::string redex = show(f);
                const Term* v = m.lookup(f->x);
                if (!v) return stuck(StuckReason::NoValue, f->x.hint + " has no value in the store", redex);
                if ((*v)->kind != TermKind::TLam)
                    return stuck(StuckReason::NotAFunction, f->x.hint + " is not a type function value", redex);
                m.focus = subst_type_var((*v)->a, (*v)->x, f->shape, ns);
                return stepped("tapply", redex);
            }
            case TermKind::CApp: {
                std::string redex = show(f);
                const Term* v = m.lookup(f->x);
                if (!v) return stuck(StuckReason::NoValue, f->x.hint + " has no value in the store", redex);
                if ((*v)->kind != TermKind::CLam)
                    return stuck(StuckReason::NotAFunction, f->x.hint + " is not a capture function value", redex);
                m.focus = subst_capt_var((*v)->a, Capture::capt((*v)->x), f->cs, ns);
                return stepped("capply", redex);
            }
            case TermKind::Box:
            case TermKind::Unbox:
                return stuck(StuckReason::NotAFunction, "boxes are not part of Capless", show(f));
            default: {
                // answer
                if (m.frames.empty()) {
                    StepResult r;
                    r.status = StepResult::Status::AtAnswer;
                    return r;
                }
                Frame top = m.frames.back();
                m.frames.pop_back();
                m.focus = plug_frame(top, f);
                continue;
            }
        }
    }
}

EvalResult eval(Machine m, long fuel, NameSupply& ns, bool trace) {
    EvalResult out;
    for (;;) {
        if (out.steps >= fuel) {
            // One more look: an answer needs no fuel.
            Machine probe = m;
            NameSupply scratch(ns.peek());
            if (step(probe, scratch).status == StepResult::Status::AtAnswer) {
                out.outcome = EvalResult::Outcome::Answer;
            } else {
                out.outcome = EvalResult::Outcome::OutOfFuel;
            }
            out.machine = std::move(m);
            return out;
        }
        StepResult r = step(m, ns);
        if (r.status == StepResult::Status::AtAnswer) {
            out.outcome = EvalResult::Outcome::Answer;
            out.machine = std::move(m);
            return out;
        }
        if (r.status == StepResult::Status::Stuck) {
            out.outcome = EvalResult::Outcome::Stuck;
            out.reason = r.reason;
            out.detail = r.detail;
            out.machine = std::move(m);
            return out;
        }
        ++out.steps;
        if (trace) out.trace.push_back("step " + std::to_string(out.steps) + ": " + r.rule + " | " + r.redex);
    }
}

Context store_typing(const Context& base, const Machine& m, NameSupply& ns) {
    Context g = base;
    for (const auto& [l, s] : m.labels) g = g.extend_label(l, s);
    for (const auto& e : m.store) {
        TypingResult r;
        try {
            r = synth_capless(g, e.value, ns);
        } catch (const CheckError& err) {
            fail(code::IllTypedStore, "store value for " + e.name.hint + " is ill-typed: " + err.diag().message);
        }
        if (r.type.existential())
            fail(code::IllTypedStore, "store value for " + e.name.hint + " has an existential type");
        g = g.extend_term(e.name, r.type.body);
    }
    return g;
}

SoundnessReport check_soundness(const Context& ctx, const Term& t, long fuel, NameSupply& ns,
                                const SoundnessOptions& opts) {
    SoundnessReport rep;
    Exist original = synth_capless(ctx, t, ns).type;
    Machine m = initial_machine(t);
    auto violation = [&](int& counter, const std::string& what) {
        ++counter;
        if (rep.first_violation.empty()) rep.first_violation = what;
    };
    for (;;) {
        if (opts.tamper) opts.tamper(m, rep.steps);
        bool typed = false;
        if (opts.preservation || opts.progress) {
            try {
                Context delta = store_typing(ctx, m, ns);
                TypingResult r = synth_capless(delta, plug(m), ns);
                typed = subtype_capless(delta, r.type, original, ns);
                if (!typed && opts.preservation)
                    violation(rep.preservation_violations,
                              "step " + std::to_string(rep.steps) + ": type " + print(r.type, &delta) +
                                  " is not a subtype of " + print(original, &delta));
            } catch (const CheckError& e) {
                if (opts.preservation)
                    violation(rep.preservation_violations,
                              "step " + std::to_string(rep.steps) + ": " + e.diag().code + " " + e.diag().message);
            }
        }
        if (rep.steps >= fuel) {
            rep.out_of_fuel = true;
            return rep;
        }
        StepResult r = step(m, ns);
        if (r.status == StepResult::Status::AtAnswer) {
            rep.reached_answer = true;
            return rep;
        }
        if (r.status == StepResult::Status::Stuck) {
            rep.final_reason = r.reason;
            bool open = r.reason == StuckReason::NoValue && m.focus->kind != TermKind::Var &&
                        ctx.has(m.focus->x);
            rep.open_redex = open;
            if (opts.progress && !open && typed)
                violation(rep.progress_violations, "step " + std::to_string(rep.steps) + ": stuck (" +
                                                       stuck_reason_name(r.reason) + ") at " + r.redex);
            return rep;
        }
        ++rep.steps;
    }
}

SoundnessReport check_preservation(const Context& ctx, const Term& t, long fuel, NameSupply& ns) {
    SoundnessOptions o;
    o.progress = false;
    return check_soundness(ctx, t, fuel, ns, o);
}

SoundnessReport check_progress(const Context& ctx, const Term& t, long fuel, NameSupply& ns) {
    SoundnessOptions o;
    o.preservation = false;
    return check_soundness(ctx, t, fuel, ns, o);
}

}  // namespace capless
