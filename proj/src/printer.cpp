#include <set>
#include <sstream>
#include <unordered_map>

#include "capless/frontend.hpp"

namespace capless {

namespace {

class Printer {
public:
    explicit Printer(const Context* ctx) {
        if (!ctx) return;
        for (const auto& b : ctx->items()) bind(b.name);
    }

    // Free names of the printed node take their spelling before any binder does.
    template <class T>
    void reserve_free(const T& node) {
        for (const auto& n : free_names(node).names)
            if (!names_.count(n.serial)) bind(n);
    }

    void reserve_defs(const TypeDefContext& defs) {
        for (const auto& d : defs.defs()) bind(d.name);
    }

    std::string ref(const Name& n) {
        auto it = names_.find(n.serial);
        if (it != names_.end()) return it->second;
        return bind(n);
    }

    std::string bind(const Name& n) {
        std::string s = n.hint.empty() ? "v" : n.hint;
        if (used_.count(s) || reserved(s)) {
            std::string base = s + "_" + std::to_string(n.serial);
            s = base;
            for (int k = 1; used_.count(s); ++k) s = base + "_" + std::to_string(k);
        }
        names_[n.serial] = s;
        used_.insert(s);
        return s;
    }

    void unbind(const Name& n) {
        auto it = names_.find(n.serial);
        if (it == names_.end()) return;
        used_.erase(used_.find(it->second));
        names_.erase(it);
    }

    // --- capture sets ---

    std::string cset(const CaptureSet& c) {
        std::vector<std::string> parts;
        for (const auto& x : c) {
            switch (x.kind) {
                case CaptureKind::Cap:
                    parts.push_back("cap");
                    break;
                case CaptureKind::Reach:
                    parts.push_back(ref(x.name) + "*");
                    break;
                default:
                    parts.push_back(ref(x.name));
            }
        }
        std::string out = "{";
        for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
        return out + "}";
    }

    std::string bound(const CaptureBound& b) { return b.unbounded ? "*" : cset(b.set); }

    // --- types ---
    // Levels: 0 anywhere, 1 arrow operand or box content, 2 before '^'.

    std::string exist(const Exist& e, int level = 0) {
        if (!e.existential()) return type(e.body, level);
        std::string c = bind(*e.binder);
        std::string s = "exists " + c + ". " + type(e.body, 0);
        unbind(*e.binder);
        return level > 0 ? "(" + s + ")" : s;
    }

    std::string type(const Type& t, int level = 0) {
        if (t.cs.empty()) return shape(t.shape, level);
        std::string s = shape(t.shape, 2) + "^" + cset(t.cs);
        return s;
    }

    static bool open_ended(const Shape& s) {
        return s->kind == ShapeKind::Fun || s->kind == ShapeKind::TFun || s->kind == ShapeKind::CFun;
    }

    std::string shape(const Shape& s, int level = 0) {
        std::string out;
        switch (s->kind) {
            case ShapeKind::Top:
                return "Top";
            case ShapeKind::Never:
                return "Never";
            case ShapeKind::TVar:
                return ref(s->name);
            case ShapeKind::Break:
                return "Break[" + shape(s->sbound) + "]";
            case ShapeKind::Applied: {
                out = ref(s->name);
                if (s->args.empty()) return out;
                out += "[";
                for (std::size_t i = 0; i < s->args.size(); ++i) out += (i ? ", " : "") + type(s->args[i]);
                return out + "]";
            }
            case ShapeKind::Boxed:
                out = "box " + type(s->param, 1);
                return level >= 2 ? "(" + out + ")" : out;
            case ShapeKind::Fun: {
                bool sugar = s->use == UseAnnot::Plain && !mentions(s->result, s->name);
                if (sugar) {
                    out = type(s->param, 1) + " => " + exist(s->result, 0);
                } else {
                    std::string param = type(s->param, 0);
                    std::string x = bind(s->name);
                    out = std::string("forall ") + (s->use == UseAnnot::Use ? "@use " : "") + "(" + x + ": " +
                          param + ") " + exist(s->result, 0);
                    unbind(s->name);
                }
                break;
            }
            case ShapeKind::TFun: {
                std::string b = shape(s->sbound);
                std::string x = bind(s->name);
                out = "forall [" + x + " <: " + b + "] " + exist(s->result, 0);
                unbind(s->name);
                break;
            }
            case ShapeKind::CFun: {
                std::string b = s->cbound.unbounded ? "" : " <: " + bound(s->cbound);
                std::string c = bind(s->name);
                out = "forall [" + c + b + "] " + exist(s->result, 0);
                unbind(s->name);
                break;
            }
        }
        return level >= 1 ? "(" + out + ")" : out;
    }

    // --- terms ---

    std::string term(const Term& t, int indent) {
        std::string pad(indent, ' ');
        switch (t->kind) {
            case TermKind::Var:
                return ref(t->x);
            case TermKind::App:
                return ref(t->x) + " " + ref(t->y);
            case TermKind::TApp:
                return ref(t->x) + " [" + shape(t->shape) + "]";
            case TermKind::CApp:
                return ref(t->x) + " [" + cset(t->cs) + "]";
            case TermKind::Box:
                return "box " + ref(t->x);
            case TermKind::Unbox:
                return "unbox " + cset(t->cs) + " " + ref(t->x);
            case TermKind::Pack: {
                std::string s = "pack " + cset(t->cs) + " " + ref(t->x);
                if (t->ann) s += " as " + exist(*t->ann);
                return s;
            }
            case TermKind::Lam: {
                std::string ty = type(t->ty);
                std::string x = bind(t->x);
                std::string s = std::string("fun ") + (t->use == UseAnnot::Use ? "@use " : "") + "(" + x + ": " +
                                ty + ") =>" + body(t->a, indent);
                unbind(t->x);
                return s;
            }
            case TermKind::TLam: {
                std::string b = shape(t->shape);
                std::string x = bind(t->x);
                std::string s = "tfun [" + x + " <: " + b + "] =>" + body(t->a, indent);
                unbind(t->x);
                return s;
            }
            case TermKind::CLam: {
                std::string b = t->cbound.unbounded ? "" : " <: " + bound(t->cbound);
                std::string c = bind(t->x);
                std::string s = "cfun [" + c + b + "] =>" + body(t->a, indent);
                unbind(t->x);
                return s;
            }
            case TermKind::Let: {
                std::string rhs = term(t->a, indent + 2);
                std::string x = bind(t->x);
                std::string s = "let " + x + " = " + rhs + " in\n" + pad + term(t->b, indent);
                unbind(t->x);
                return s;
            }
            case TermKind::LetEx: {
                std::string rhs = term(t->a, indent + 2);
                std::string c = bind(t->y);
                std::string x = bind(t->x);
                std::string s = "let [" + c + ", " + x + "] = " + rhs + " in\n" + pad + term(t->b, indent);
                unbind(t->x);
                unbind(t->y);
                return s;
            }
            case TermKind::Boundary: {
                std::string sh = shape(t->shape);
                std::string c = bind(t->y);
                std::string x = bind(t->x);
                std::string s = "boundary [" + sh + "] as [" + c + ", " + x + "] in\n" + pad + "  " +
                                term(t->a, indent + 2);
                unbind(t->x);
                unbind(t->y);
                return s;
            }
            case TermKind::Scope: {
                std::string sh = shape(t->shape);
                return "scope " + ref(t->x) + " [" + sh + "] in\n" + pad + "  " + term(t->a, indent + 2);
            }
        }
        return "?";
    }

    static bool reserved(const std::string& s) {
        static const std::set<std::string> k = {
            "let", "in", "fun", "tfun", "cfun", "pack", "as", "box", "unbox", "boundary", "scope",
            "forall", "exists", "Top", "Never", "Break", "type", "assume", "cap", "use"};
        return k.count(s) > 0;
    }

private:
    std::string body(const Term& t, int indent) {
        if (t->kind == TermKind::Let || t->kind == TermKind::LetEx || t->kind == TermKind::Boundary)
            return "\n" + std::string(indent + 2, ' ') + term(t, indent + 2);
        return " " + term(t, indent);
    }

    static bool mentions(const Exist& e, const Name& x) {
        for (const auto& n : free_names(e).names)
            if (n == x) return true;
        return false;
    }

    std::unordered_map<std::uint64_t, std::string> names_;
    std::multiset<std::string> used_;
};

}  // namespace

std::string print(const Shape& s, const Context* ctx) {
    Printer p(ctx);
    p.reserve_free(s);
    return p.shape(s);
}

std::string print(const Type& t, const Context* ctx) {
    Printer p(ctx);
    p.reserve_free(t);
    return p.type(t);
}

std::string print(const Exist& e, const Context* ctx) {
    Printer p(ctx);
    p.reserve_free(e);
    return p.exist(e);
}

std::string print(const CaptureSet& c, const Context* ctx) {
    Printer p(ctx);
    return p.cset(c);
}

std::string print(const CaptureBound& b, const Context* ctx) {
    Printer p(ctx);
    return p.bound(b);
}

std::string print(const Term& t, const Context* ctx) {
    Printer p(ctx);
    p.reserve_free(t);
    return p.term(t, 0);
}

std::string print_program(const Program& prog) {
    Printer p(nullptr);
    std::ostringstream out;
    p.reserve_defs(prog.defs);
    for (const auto& d : prog.defs.defs()) {
        out << "type " << p.ref(d.name);
        if (!d.params.empty()) {
            out << "[";
            for (std::size_t i = 0; i < d.params.size(); ++i)
                out << (i ? ", " : "") << (d.params[i].second == Variance::Covariant ? "+" : "-")
                    << p.bind(d.params[i].first);
            out << "]";
        }
        out << " = " << p.shape(d.body) << ";\n";
        for (const auto& [n, v] : d.params) p.unbind(n);
    }
    for (const auto& b : prog.ctx.items()) {
        switch (b.kind) {
            case BindKind::Term: {
                std::string ty = p.type(b.type);
                out << "assume " << p.bind(b.name) << " : " << ty << ";\n";
                break;
            }
            case BindKind::Type: {
                std::string bd = p.shape(b.bound);
                out << "assume [" << p.bind(b.name) << " <: " << bd << "];\n";
                break;
            }
            case BindKind::Capt: {
                std::string bd = b.cbound.unbounded ? "" : " <: " + p.bound(b.cbound);
                out << "assume [" << p.bind(b.name) << bd << "];\n";
                break;
            }
            case BindKind::Label:
                break;
        }
    }
    if (!prog.defs.empty() || prog.ctx.size() > 0) out << "\n";
    out << p.term(prog.term, 0) << "\n";
    return out.str();
}

}  // namespace capless
