#include <cctype>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "capless/frontend.hpp"

namespace capless {

namespace {

enum class Tok { Ident, Keyword, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
};

const std::unordered_set<std::string>& keywords() {
    static const std::unordered_set<std::string> k = {
        "let", "in", "fun", "tfun", "cfun", "pack", "as", "box", "unbox", "boundary", "scope",
        "forall", "exists", "Top", "Never", "Break", "type", "assume", "cap"};
    return k;
}

[[noreturn]] void parse_error(const char* code, const std::string& msg, int line, int col,
                              const std::string& file) {
    Diagnostic d;
    d.code = code;
    d.file = file;
    d.span = Span{line, col, col};
    d.message = msg;
    throw CheckError(std::move(d));
}

std::vector<Token> lex(std::string_view src, const std::string& file) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char ch = src[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            advance(1);
            continue;
        }
        if (ch == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.text = std::string(src.substr(i, j - i));
            t.kind = keywords().count(t.text) ? Tok::Keyword : Tok::Ident;
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        static const char* two[] = {"=>", "<:"};
        bool matched = false;
        for (const char* s : two) {
            if (src.substr(i, 2) == s) {
                t.kind = Tok::Sym;
                t.text = s;
                advance(2);
                matched = true;
                break;
            }
        }
        if (!matched) {
            if (std::string_view("()[]{}:,.;=^*@+-").find(ch) == std::string_view::npos)
                parse_error(code::Parse, std::string("unexpected character '") + ch + "'", line, col, file);
            t.kind = Tok::Sym;
            t.text = std::string(1, ch);
            advance(1);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

enum class Sort { Term, Type, Capt, Label };

class Parser {
public:
    Parser(std::string_view text, Dialect d, NameSupply& ns, std::string file)
        : toks_(lex(text, file)), ns_(ns), file_(std::move(file)) {
        prog_.dialect = d;
    }

    Program file() {
        while (is_kw("type") || is_kw("assume")) {
            if (is_kw("type"))
                typedef_decl();
            else
                assume_decl();
        }
        prog_.term = term();
        expect_end();
        return std::move(prog_);
    }

    // Seed scopes from a parsed program so fragments can refer to its names.
    void load(const Program& p) {
        prog_.dialect = p.dialect;
        prog_.defs = p.defs;
        prog_.ctx = p.ctx;
        for (const auto& b : p.ctx.items()) {
            Sort s = b.kind == BindKind::Term    ? Sort::Term
                     : b.kind == BindKind::Type  ? Sort::Type
                     : b.kind == BindKind::Capt  ? Sort::Capt
                                                 : Sort::Label;
            push(b.name.hint, b.name, s);
        }
    }

    Exist exist_fragment() {
        Exist e = exist();
        expect_end();
        return e;
    }
    Type type_fragment() {
        Type t = type_req();
        expect_end();
        return t;
    }
    CaptureSet cset_fragment() {
        CaptureSet c = cset();
        expect_end();
        return c;
    }

private:
    // --- token helpers ---

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool is_kw(const char* s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Keyword && peek(k).text == s;
    }
    bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void error(const std::string& msg, const char* code = code::Parse) const {
        parse_error(code, msg, peek().line, peek().col, file_);
    }
    [[noreturn]] void error_at(const Token& t, const std::string& msg, const char* code = code::Parse) const {
        parse_error(code, msg, t.line, t.col, file_);
    }
    static std::string describe(const Token& t) {
        return t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'";
    }
    void expect_sym(const char* s) {
        if (!is_sym(s)) error(std::string("expected '") + s + "', found " + describe(peek()));
        next();
    }
    void expect_kw(const char* s) {
        if (!is_kw(s)) error(std::string("expected '") + s + "', found " + describe(peek()));
        next();
    }
    void expect_end() {
        if (peek().kind != Tok::End) error("unexpected " + describe(peek()));
    }
    Token ident() {
        if (peek().kind != Tok::Ident) error("expected an identifier, found " + describe(peek()));
        return next();
    }
    Span span_of(const Token& t) const { return Span{t.line, t.col, t.col + static_cast<int>(t.text.size())}; }

    bool reacap() const { return prog_.dialect == Dialect::Reacap; }
    void require(Dialect d, const Token& at, const std::string& what) const {
        if (prog_.dialect != d)
            error_at(at, what + " is not available in " + (reacap() ? "Reacap" : "Capless"));
    }

    // --- scopes ---

    struct Entry {
        Name name;
        Sort sort;
    };
    void push(const std::string& text, const Name& n, Sort s) { scope_[text].push_back({n, s}); }
    void pop(const std::string& text) {
        auto it = scope_.find(text);
        it->second.pop_back();
        if (it->second.empty()) scope_.erase(it);
    }
    const Entry* lookup(const std::string& text) const {
        auto it = scope_.find(text);
        return it == scope_.end() ? nullptr : &it->second.back();
    }
    Name bind(const Token& t, Sort s) {
        Name n = ns_.fresh(t.text);
        push(t.text, n, s);
        return n;
    }
    Name term_ref(const Token& t) {
        const Entry* e = lookup(t.text);
        if (!e || (e->sort != Sort::Term && e->sort != Sort::Label))
            error_at(t, "unbound variable " + t.text, code::UnboundVariable);
        return e->name;
    }

    // --- declarations ---

    void typedef_decl() {
        Token kw = next();
        require(Dialect::Reacap, kw, "a type definition");
        Token name = ident();
        if (prog_.defs.find(name.text)) error_at(name, "type " + name.text + " is already defined");
        TypeDef d;
        d.name = ns_.fresh(name.text);
        std::vector<std::string> pushed;
        if (is_sym("[")) {
            next();
            while (!is_sym("]")) {
                Variance v;
                if (is_sym("+"))
                    v = Variance::Covariant;
                else if (is_sym("-"))
                    v = Variance::Contravariant;
                else
                    error("expected a variance '+' or '-'");
                next();
                Token p = ident();
                d.params.push_back({bind(p, Sort::Type), v});
                pushed.push_back(p.text);
                if (!is_sym("]")) expect_sym(",");
            }
            next();
        }
        expect_sym("=");
        d.body = shape();
        for (const auto& p : pushed) pop(p);
        expect_sym(";");
        prog_.defs.add(std::move(d));
    }

    void assume_decl() {
        next();
        if (is_sym("[")) {
            next();
            Token x = ident();
            if (is_sym("<:")) {
                next();
                if (is_sym("*") || is_sym("{")) {
                    CaptureBound b = bound();
                    if (reacap() && !b.unbounded) error_at(x, "capture variables are unbounded in Reacap");
                    prog_.ctx = prog_.ctx.extend_capt(bind(x, Sort::Capt), b);
                } else {
                    Shape s = shape();
                    if (reacap() && s->kind != ShapeKind::Top) error_at(x, "type variables are bounded by Top in Reacap");
                    prog_.ctx = prog_.ctx.extend_type(bind(x, Sort::Type), s);
                }
            } else {
                prog_.ctx = prog_.ctx.extend_capt(bind(x, Sort::Capt));
            }
            expect_sym("]");
        } else {
            Token x = ident();
            expect_sym(":");
            Type t = type_req();
            prog_.ctx = prog_.ctx.extend_term(bind(x, Sort::Term), t);
        }
        if (is_sym(";")) next();
    }

    // --- terms ---

    bool starts_operand() const {
        const Token& t = peek();
        if (t.kind == Tok::Ident) return true;
        if (t.kind == Tok::Sym) return t.text == "(" || t.text == "[";
        if (t.kind == Tok::Keyword)
            return t.text == "fun" || t.text == "tfun" || t.text == "cfun" || t.text == "let" ||
                   t.text == "pack" || t.text == "box" || t.text == "unbox" || t.text == "boundary";
        return false;
    }

    [[noreturn]] void non_mnf() const {
        error("operands must be variables; let-bind the compound term first", code::NonMnfOperand);
    }

    Term term() {
        const Token& t = peek();
        Span sp = span_of(t);
        if (t.kind == Tok::Keyword) {
            if (t.text == "let") return let_term();
            if (t.text == "fun") {
                next();
                UseAnnot use = UseAnnot::Plain;
                if (is_sym("@")) {
                    Token at = next();
                    require(Dialect::Reacap, at, "@use");
                    Token u = ident();
                    if (u.text != "use") error_at(u, "expected 'use' after '@'");
                    use = UseAnnot::Use;
                }
                expect_sym("(");
                Token x = ident();
                expect_sym(":");
                Type ty = type_req();
                expect_sym(")");
                expect_sym("=>");
                Name n = bind(x, Sort::Term);
                Term body = term();
                pop(x.text);
                return mk_lam(use, n, ty, body, sp);
            }
            if (t.text == "tfun") {
                next();
                expect_sym("[");
                Token x = ident();
                Shape b = mk_top();
                if (is_sym("<:")) {
                    next();
                    b = shape();
                }
                if (reacap() && b->kind != ShapeKind::Top) error_at(x, "type parameters are bounded by Top in Reacap");
                expect_sym("]");
                expect_sym("=>");
                Name n = bind(x, Sort::Type);
                Term body = term();
                pop(x.text);
                return mk_tlam(n, b, body, sp);
            }
            if (t.text == "cfun") {
                next();
                expect_sym("[");
                Token c = ident();
                CaptureBound b;
                if (is_sym("<:")) {
                    next();
                    b = bound();
                }
                if (reacap() && !b.unbounded) error_at(c, "capture parameters are unbounded in Reacap");
                expect_sym("]");
                expect_sym("=>");
                Name n = bind(c, Sort::Capt);
                Term body = term();
                pop(c.text);
                return mk_clam(n, b, body, sp);
            }
            if (t.text == "pack") {
                Token kw = next();
                require(Dialect::Capless, kw, "pack");
                CaptureSet w = cset();
                Name x = term_ref(ident());
                std::optional<Exist> ann;
                if (is_kw("as")) {
                    next();
                    ann = exist();
                    if (!ann->existential()) error("a pack ascription must be an existential type");
                }
                return mk_pack(w, x, ann, sp);
            }
            if (t.text == "box") {
                Token kw = next();
                require(Dialect::Reacap, kw, "box");
                Name x = term_ref(ident());
                return mk_box(x, sp);
            }
            if (t.text == "unbox") {
                Token kw = next();
                require(Dialect::Reacap, kw, "unbox");
                CaptureSet c = cset();
                Name x = term_ref(ident());
                return mk_unbox(c, x, sp);
            }
            if (t.text == "boundary") {
                Token kw = next();
                require(Dialect::Capless, kw, "boundary");
                expect_sym("[");
                Shape s = shape();
                expect_sym("]");
                expect_kw("as");
                expect_sym("[");
                Token c = ident();
                expect_sym(",");
                Token x = ident();
                expect_sym("]");
                expect_kw("in");
                Name cn = bind(c, Sort::Capt);
                Name xn = bind(x, Sort::Term);
                Term body = term();
                pop(x.text);
                pop(c.text);
                return mk_boundary(s, cn, xn, body, sp);
            }
            if (t.text == "scope") error("scope forms only exist at run time", code::RuntimeForm);
        }
        if (is_sym("(")) {
            next();
            Term inner = term();
            expect_sym(")");
            if (starts_operand()) non_mnf();
            return inner;
        }
        if (t.kind != Tok::Ident) error("expected a term, found " + describe(t));
        Token head = next();
        Name f = term_ref(head);
        if (peek().kind == Tok::Ident) {
            Name y = term_ref(next());
            if (starts_operand()) non_mnf();
            return mk_app(f, y, sp);
        }
        if (is_sym("[")) {
            next();
            Term r;
            if (is_sym("{")) {
                CaptureSet c = cset();
                r = mk_capp(f, c, sp);
            } else {
                r = mk_tapp(f, shape(), sp);
            }
            expect_sym("]");
            if (starts_operand()) non_mnf();
            return r;
        }
        if (starts_operand()) non_mnf();
        return mk_var(f, sp);
    }

    Term let_term() {
        Span sp = span_of(next());
        if (is_sym("[")) {
            Token at = next();
            require(Dialect::Capless, at, "existential let");
            Token c = ident();
            expect_sym(",");
            Token x = ident();
            expect_sym("]");
            expect_sym("=");
            Term rhs = term();
            expect_kw("in");
            Name cn = bind(c, Sort::Capt);
            Name xn = bind(x, Sort::Term);
            Term body = term();
            pop(x.text);
            pop(c.text);
            return mk_letex(cn, xn, rhs, body, sp);
        }
        Token x = ident();
        expect_sym("=");
        Term rhs = term();
        expect_kw("in");
        Name xn = bind(x, Sort::Term);
        Term body = term();
        pop(x.text);
        return mk_let(xn, rhs, body, sp);
    }

    // --- capture sets ---

    CaptureSet cset() {
        expect_sym("{");
        std::vector<Capture> xs;
        while (!is_sym("}")) {
            if (is_kw("cap")) {
                Token t = next();
                require(Dialect::Reacap, t, "cap");
                xs.push_back(Capture::cap());
            } else {
                Token t = ident();
                const Entry* e = lookup(t.text);
                if (!e || e->sort == Sort::Type) error_at(t, "unbound capture " + t.text, code::UnboundVariable);
                if (is_sym("*")) {
                    next();
                    require(Dialect::Reacap, t, "a reach capability");
                    if (e->sort != Sort::Term) error_at(t, "only term variables have reach capabilities");
                    xs.push_back(Capture::reach(e->name));
                } else if (e->sort == Sort::Capt) {
                    xs.push_back(Capture::capt(e->name));
                } else {
                    xs.push_back(Capture::term(e->name));
                }
            }
            if (!is_sym("}")) expect_sym(",");
        }
        next();
        return CaptureSet(std::move(xs));
    }

    CaptureBound bound() {
        if (is_sym("*")) {
            next();
            return CaptureBound::star();
        }
        return CaptureBound::of(cset());
    }

    // --- types ---

    Exist exist() {
        if (is_kw("exists")) {
            Token kw = next();
            require(Dialect::Capless, kw, "exists");
            Token c = ident();
            expect_sym(".");
            Name n = bind(c, Sort::Capt);
            Type body = type_req();
            pop(c.text);
            return exists(n, body);
        }
        return arrow();
    }

    Type type_req() {
        Token at = peek();
        Exist e = exist();
        if (e.existential()) error_at(at, "an existential type is not allowed here");
        return e.body;
    }

    Shape shape() {
        Token at = peek();
        Type t = type_req();
        if (!t.cs.empty()) error_at(at, "expected a shape type without a capture set");
        return t.shape;
    }

    Exist arrow() {
        Token at = peek();
        Exist lhs = ctype();
        if (!is_sym("=>")) return lhs;
        next();
        if (lhs.existential()) error_at(at, "function parameters cannot be existential");
        Name z = ns_.fresh("z");
        Exist rhs = exist();
        if (reacap() && rhs.existential()) error_at(at, "existential results are not available in Reacap");
        return plain(pure(mk_fun(UseAnnot::Plain, z, lhs.body, rhs)));
    }

    Exist ctype() {
        if (is_kw("box")) {
            Token kw = next();
            require(Dialect::Reacap, kw, "box");
            Token at = peek();
            Exist inner = ctype();
            if (inner.existential()) error_at(at, "a box cannot hold an existential type");
            return plain(pure(mk_boxed(inner.body)));
        }
        return captured();
    }

    Exist captured() {
        Token at = peek();
        bool paren = is_sym("(");
        Exist a = atom();
        if (!is_sym("^")) return a;
        next();
        if (a.existential()) error_at(at, "cannot attach a capture set to an existential type");
        if (paren && !a.body.cs.empty()) error_at(at, "a type can carry only one capture set");
        if (!a.body.cs.empty()) error_at(at, "a type can carry only one capture set");
        return plain(Type{a.body.shape, cset()});
    }

    Exist atom() {
        const Token& t = peek();
        if (t.kind == Tok::Keyword) {
            if (t.text == "Top") {
                next();
                return plain(pure(mk_top()));
            }
            if (t.text == "Never") {
                next();
                return plain(pure(mk_never()));
            }
            if (t.text == "Break") {
                Token kw = next();
                require(Dialect::Capless, kw, "Break");
                expect_sym("[");
                Shape s = shape();
                expect_sym("]");
                return plain(pure(mk_break(s)));
            }
            if (t.text == "forall") return forall();
        }
        if (is_sym("(")) {
            next();
            Exist e = exist();
            expect_sym(")");
            return e;
        }
        if (t.kind != Tok::Ident) error("expected a type, found " + describe(t));
        Token x = next();
        if (const Entry* e = lookup(x.text)) {
            if (e->sort != Sort::Type) error_at(x, x.text + " is not a type");
            return plain(pure(mk_tvar(e->name)));
        }
        const TypeDef* d = prog_.defs.find(x.text);
        if (!d) {
            if (is_sym("[")) error_at(x, "unknown type definition " + x.text, code::UnknownTypeDef);
            error_at(x, "unbound type variable " + x.text, code::UnboundVariable);
        }
        std::vector<Type> args;
        if (is_sym("[")) {
            next();
            while (!is_sym("]")) {
                args.push_back(type_req());
                if (!is_sym("]")) expect_sym(",");
            }
            next();
        }
        if (args.size() != d->params.size())
            error_at(x, x.text + " expects " + std::to_string(d->params.size()) + " type arguments, got " +
                            std::to_string(args.size()),
                     code::Arity);
        return plain(pure(mk_applied(d->name, std::move(args))));
    }

    Exist forall() {
        Token kw = next();
        if (is_sym("(") || is_sym("@")) {
            UseAnnot use = UseAnnot::Plain;
            if (is_sym("@")) {
                Token at = next();
                require(Dialect::Reacap, at, "@use");
                Token u = ident();
                if (u.text != "use") error_at(u, "expected 'use' after '@'");
                use = UseAnnot::Use;
            }
            expect_sym("(");
            Token x = ident();
            expect_sym(":");
            Type param = type_req();
            expect_sym(")");
            Name n = bind(x, Sort::Term);
            Token at = peek();
            Exist res = exist();
            pop(x.text);
            if (reacap() && res.existential()) error_at(at, "existential results are not available in Reacap");
            return plain(pure(mk_fun(use, n, param, res)));
        }
        expect_sym("[");
        Token x = ident();
        bool capture = true;
        Shape sb;
        CaptureBound cb;
        if (is_sym("<:")) {
            next();
            if (is_sym("*") || is_sym("{")) {
                cb = bound();
            } else {
                capture = false;
                sb = shape();
            }
        }
        expect_sym("]");
        if (reacap()) {
            if (capture && !cb.unbounded) error_at(x, "capture parameters are unbounded in Reacap");
            if (!capture && sb->kind != ShapeKind::Top) error_at(x, "type parameters are bounded by Top in Reacap");
        }
        Name n = bind(x, capture ? Sort::Capt : Sort::Type);
        Token at = peek();
        Exist res = exist();
        pop(x.text);
        if (reacap() && res.existential()) error_at(at, "existential results are not available in Reacap");
        (void)kw;
        return plain(pure(capture ? mk_cfun(n, cb, res) : mk_tfun(n, sb, res)));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    NameSupply& ns_;
    std::string file_;
    Program prog_;
    std::unordered_map<std::string, std::vector<Entry>> scope_;
};

}  // namespace

Program parse_program(std::string_view text, Dialect dialect, NameSupply& ns, const std::string& file) {
    return Parser(text, dialect, ns, file).file();
}

Exist parse_exist_in(const Program& p, std::string_view text, NameSupply& ns) {
    Parser ps(text, p.dialect, ns, "");
    ps.load(p);
    return ps.exist_fragment();
}

Type parse_type_in(const Program& p, std::string_view text, NameSupply& ns) {
    Parser ps(text, p.dialect, ns, "");
    ps.load(p);
    return ps.type_fragment();
}

CaptureSet parse_cset_in(const Program& p, std::string_view text, NameSupply& ns) {
    Parser ps(text, p.dialect, ns, "");
    ps.load(p);
    return ps.cset_fragment();
}

Dialect dialect_for_path(const std::string& path, Dialect fallback) {
    auto ends = [&](const char* ext) {
        std::string e(ext);
        return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
    };
    if (ends(".cls")) return Dialect::Capless;
    if (ends(".rcp")) return Dialect::Reacap;
    return fallback;
}

}  // namespace capless
