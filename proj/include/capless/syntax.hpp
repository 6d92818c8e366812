#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace capless {

// --- names ---

struct Name {
    std::string hint;
    std::uint64_t serial = 0;

    bool operator==(const Name& o) const { return serial == o.serial; }
    std::strong_ordering operator<=>(const Name& o) const { return serial <=> o.serial; }
    bool valid() const { return serial != 0; }
};

// One supply per session; serials are never reused within it.
class NameSupply {
public:
    explicit NameSupply(std::uint64_t start = 1) : next_(start) {}
    Name fresh(std::string hint) { return Name{std::move(hint), next_++}; }
    Name fresh_like(const Name& n) { return fresh(n.hint); }
    std::uint64_t peek() const { return next_; }

private:
    std::uint64_t next_;
};

enum class Variance { Covariant, Contravariant };
inline Variance flip(Variance v) {
    return v == Variance::Covariant ? Variance::Contravariant : Variance::Covariant;
}

enum class UseAnnot { Plain, Use };
// eps <= use, alpha <= alpha
inline bool use_leq(UseAnnot a, UseAnnot b) { return a == UseAnnot::Plain || b == UseAnnot::Use; }

enum class Dialect { Capless, Reacap };

// --- captures ---

// Term covers term variables and runtime labels; Capt covers capture variables.
enum class CaptureKind : std::uint8_t { Term = 0, Capt = 1, Reach = 2, Cap = 3 };

struct Capture {
    CaptureKind kind = CaptureKind::Term;
    Name name;

    static Capture term(Name n) { return {CaptureKind::Term, std::move(n)}; }
    static Capture capt(Name n) { return {CaptureKind::Capt, std::move(n)}; }
    static Capture reach(Name n) { return {CaptureKind::Reach, std::move(n)}; }
    static Capture cap() { return {CaptureKind::Cap, Name{"cap", 0}}; }

    bool operator==(const Capture& o) const { return kind == o.kind && name == o.name; }
    std::strong_ordering operator<=>(const Capture& o) const {
        if (auto c = kind <=> o.kind; c != 0) return c;
        return name.serial <=> o.name.serial;
    }
};

// Sorted by (kind, serial), no duplicates.
class CaptureSet {
public:
    CaptureSet() = default;
    CaptureSet(std::initializer_list<Capture> xs);
    explicit CaptureSet(std::vector<Capture> xs);

    static CaptureSet of_term(const Name& n) { return CaptureSet{Capture::term(n)}; }
    static CaptureSet of_capt(const Name& n) { return CaptureSet{Capture::capt(n)}; }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    bool contains(const Capture& c) const;
    bool contains_cap() const { return contains(Capture::cap()); }
    bool mentions(const Name& n) const;  // any kind
    void insert(const Capture& c);
    CaptureSet unite(const CaptureSet& o) const;
    CaptureSet minus(const CaptureSet& o) const;
    CaptureSet without(const Capture& c) const;
    bool subset_of(const CaptureSet& o) const;

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<Capture>& items() const { return items_; }

    bool operator==(const CaptureSet& o) const { return items_ == o.items_; }

private:
    std::vector<Capture> items_;
};

struct CaptureBound {
    bool unbounded = true;
    CaptureSet set;

    static CaptureBound star() { return {}; }
    static CaptureBound of(CaptureSet s) { return {false, std::move(s)}; }
    bool operator==(const CaptureBound& o) const {
        return unbounded == o.unbounded && (unbounded || set == o.set);
    }
};

// --- types ---

enum class ShapeKind { Top, TVar, Fun, TFun, CFun, Boxed, Applied, Break, Never };

struct ShapeNode;
using Shape = std::shared_ptr<const ShapeNode>;

// An empty capture set is the pure type.
struct Type {
    Shape shape;
    CaptureSet cs;

    bool pure() const { return cs.empty(); }
};

// binder absent: non-existential.
struct Exist {
    std::optional<Name> binder;
    Type body;

    bool existential() const { return binder.has_value(); }
};

struct ShapeNode {
    ShapeKind kind = ShapeKind::Top;
    Name name;                    // TVar, Fun param, TFun/CFun binder, Applied head
    UseAnnot use = UseAnnot::Plain;
    Type param;                   // Fun parameter, Boxed content
    Exist result;                 // Fun/TFun/CFun result
    Shape sbound;                 // TFun bound, Break payload
    CaptureBound cbound;          // CFun bound
    std::vector<Type> args;       // Applied arguments
};

Shape mk_top();
Shape mk_never();
Shape mk_tvar(Name x);
Shape mk_fun(UseAnnot use, Name x, Type param, Exist result);
Shape mk_tfun(Name x, Shape bound, Exist result);
Shape mk_cfun(Name c, CaptureBound bound, Exist result);
Shape mk_boxed(Type t);
Shape mk_applied(Name head, std::vector<Type> args);
Shape mk_break(Shape s);

inline Type pure(Shape s) { return Type{std::move(s), {}}; }
inline Type capt(Shape s, CaptureSet c) { return Type{std::move(s), std::move(c)}; }
inline Exist plain(Type t) { return Exist{std::nullopt, std::move(t)}; }
inline Exist exists(Name c, Type t) { return Exist{std::move(c), std::move(t)}; }

// --- terms ---

enum class TermKind {
    Var, Lam, TLam, CLam, Pack, Box, App, TApp, CApp, Let, LetEx, Unbox, Boundary, Scope
};

struct Span {
    int line = 0;
    int col = 0;
    int end_col = 0;
};

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
    TermKind kind = TermKind::Var;
    Name x;                  // Var, Lam/TLam/CLam binder, Pack payload, Box/Unbox target,
                             // App/TApp/CApp head, Let binder, LetEx term binder,
                             // Boundary term binder, Scope label
    Name y;                  // App argument, LetEx and Boundary capture binder
    UseAnnot use = UseAnnot::Plain;
    Type ty;                 // Lam parameter type
    Shape shape;             // TLam bound, TApp argument, Boundary and Scope result shape
    CaptureBound cbound;     // CLam bound
    CaptureSet cs;           // Pack witness, CApp argument, Unbox set
    std::optional<Exist> ann;  // Pack ascription
    Term a;                  // body / let right-hand side
    Term b;                  // let body
    Span span;
    bool runtime = false;    // Scope only
};

Term mk_var(Name x, Span sp = {});
Term mk_lam(UseAnnot use, Name x, Type t, Term body, Span sp = {});
Term mk_tlam(Name x, Shape bound, Term body, Span sp = {});
Term mk_clam(Name c, CaptureBound bound, Term body, Span sp = {});
Term mk_pack(CaptureSet witness, Name payload, std::optional<Exist> ann = std::nullopt, Span sp = {});
Term mk_box(Name x, Span sp = {});
Term mk_app(Name f, Name a, Span sp = {});
Term mk_tapp(Name f, Shape s, Span sp = {});
Term mk_capp(Name f, CaptureSet c, Span sp = {});
Term mk_let(Name x, Term rhs, Term body, Span sp = {});
Term mk_letex(Name c, Name x, Term rhs, Term body, Span sp = {});
Term mk_unbox(CaptureSet c, Name x, Span sp = {});
Term mk_boundary(Shape s, Name c, Name x, Term body, Span sp = {});
Term mk_scope(Name label, Shape s, Term body);

bool is_value(const Term& t);
bool is_answer(const Term& t);

// --- type definitions ---

struct TypeDef {
    Name name;
    std::vector<std::pair<Name, Variance>> params;
    Shape body;
};

// Ordered; later definitions may only refer to earlier ones.
class TypeDefContext {
public:
    const TypeDef* find(const Name& n) const;
    const TypeDef* find(const std::string& text) const;
    void add(TypeDef d) { defs_.push_back(std::move(d)); }
    const std::vector<TypeDef>& defs() const { return defs_; }
    bool empty() const { return defs_.empty(); }

private:
    std::vector<TypeDef> defs_;
};

// --- binding-aware operations ---

struct FreeNames {
    std::vector<Name> names;  // any sort, sorted by serial, unique
    bool contains(const Name& n) const;
};

FreeNames free_names(const Type& t);
FreeNames free_names(const Exist& e);
FreeNames free_names(const Shape& s);
FreeNames free_names(const Term& t);
FreeNames free_names(const CaptureSet& c);

// [from := to] for a term variable; captures {from} and from* are renamed too.
Term subst_term_var(const Term& t, const Name& from, const Name& to, NameSupply& ns);
Type subst_term_var(const Type& t, const Name& from, const Name& to, NameSupply& ns);
Exist subst_term_var(const Exist& e, const Name& from, const Name& to, NameSupply& ns);

// [c := D]; also used for term variables inside capture sets (avoidance).
CaptureSet subst_capt(const CaptureSet& cs, const Capture& from, const CaptureSet& to);
Type subst_capt_var(const Type& t, const Capture& from, const CaptureSet& to, NameSupply& ns);
Exist subst_capt_var(const Exist& e, const Capture& from, const CaptureSet& to, NameSupply& ns);
Shape subst_capt_var(const Shape& s, const Capture& from, const CaptureSet& to, NameSupply& ns);
Term subst_capt_var(const Term& t, const Capture& from, const CaptureSet& to, NameSupply& ns);

// [X := repl]. A pure occurrence X becomes repl; X^{D} becomes repl with D added.
// Throws std::logic_error if a capturing repl lands where only a shape is grammatical.
Type subst_type_var(const Type& t, const Name& from, const Type& repl, NameSupply& ns);
Exist subst_type_var(const Exist& e, const Name& from, const Type& repl, NameSupply& ns);
Shape subst_type_var(const Shape& s, const Name& from, const Type& repl, NameSupply& ns);
Term subst_type_var(const Term& t, const Name& from, const Shape& repl, NameSupply& ns);

// [x* :=_v C]: covariant occurrences become C, contravariant ones become {}.
// Variances of applied arguments come from defs when given; otherwise arguments are covariant.
Type subst_reach_variant(const Type& t, const Name& x, const CaptureSet& repl, Variance v,
                         const TypeDefContext* defs = nullptr);

// Alpha-renames every binder to a fresh name.
Term freshen(const Term& t, NameSupply& ns);

bool alpha_eq(const Type& a, const Type& b);
bool alpha_eq(const Exist& a, const Exist& b);
bool alpha_eq(const Shape& a, const Shape& b);
bool alpha_eq(const Term& a, const Term& b);

// Size metric used by fuzzers and enumerators.
int depth(const Shape& s);
int depth(const Type& t);

}  // namespace capless
