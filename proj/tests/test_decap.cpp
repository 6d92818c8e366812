#include <doctest.h>

#include <filesystem>
#include <set>

#include "capless/conformance.hpp"
#include "capless/decap.hpp"
#include "helpers.hpp"

using namespace capless;

namespace {

// forall [c_x] forall [c_xstar] (param => result): the arrow inside an encoded function shape
const ShapeNode& encoded_arrow(const Shape& s) {
    REQUIRE(s->kind == ShapeKind::CFun);
    const Shape& inner = s->result.body.shape;
    REQUIRE(inner->kind == ShapeKind::CFun);
    const Shape& arrow = inner->result.body.shape;
    REQUIRE(arrow->kind == ShapeKind::Fun);
    return *arrow;
}

TranslationReport verify_file(const std::string& rel, NameSupply& ns) {
    Program p = parse_program(testing::slurp(testing::source_path(rel)), Dialect::Reacap, ns, rel);
    return verify_translation(p, ns);
}

}  // namespace

TEST_CASE("capture sets encode through rho, rho* and the interpretation") {
    NameSupply ns;
    Name x = ns.fresh("x"), y = ns.fresh("y"), c1 = ns.fresh("c1"), c2 = ns.fresh("c2"), d = ns.fresh("d");
    TranslationContext tau;
    tau.interp = CaptureSet::of_capt(d);
    tau.rho[x.serial] = CaptureSet::of_capt(c1);
    tau.rho_star[y.serial] = CaptureSet::of_capt(c2);
    CHECK(encode_cset(tau, CaptureSet{Capture::cap()}) == CaptureSet::of_capt(d));
    CHECK(encode_cset(tau, {}) == CaptureSet{});
    CaptureSet mixed{Capture::term(x), Capture::reach(y)};
    CHECK(encode_cset(tau, mixed) == CaptureSet{Capture::capt(c1), Capture::capt(c2)});
    // capture variables map to themselves
    CHECK(encode_cset(tau, CaptureSet::of_capt(c1)) == CaptureSet::of_capt(c1));
    CHECK_THROWS_AS(encode_cset(tau, CaptureSet::of_term(y)), CheckError);
    CHECK(encode_bound(tau, CaptureSet{Capture::cap()}).unbounded);
}

TEST_CASE("top encodes to top") {
    NameSupply ns;
    TranslationContext tau;
    TypeDefContext defs;
    Type t = encode_type(tau, defs, pure(mk_top()), ns);
    CHECK(alpha_eq(t, pure(mk_top())));
}

TEST_CASE("a dependent result and a cap result encode differently") {
    NameSupply ns;
    Program p = testing::decls("assume [File <: Top];", Dialect::Reacap, ns);
    TranslationContext tau;
    tau.interp = {};
    Type dep = parse_type_in(p, "forall (x: File^{cap}) File^{x}", ns);
    Type fresh = parse_type_in(p, "forall (x: File^{cap}) File^{cap}", ns);
    Type e_dep = encode_type(tau, p.defs, dep, ns);
    Type e_fresh = encode_type(tau, p.defs, fresh, ns);
    CHECK_FALSE(alpha_eq(e_dep, e_fresh));

    const ShapeNode& a1 = encoded_arrow(e_dep.shape);
    const ShapeNode& a2 = encoded_arrow(e_fresh.shape);
    const Name& cx = e_dep.shape->name;
    // x's capture becomes the parameter's capture variable
    CHECK(a1.param.cs == CaptureSet::of_capt(cx));
    CHECK(a1.result.body.cs == CaptureSet::of_capt(cx));
    // cap in the result is a fresh existential
    REQUIRE(a2.result.binder.has_value());
    CHECK(a2.result.body.cs == CaptureSet::of_capt(*a2.result.binder));
}

TEST_CASE("box and unbox become a double type abstraction and application") {
    NameSupply ns;
    TranslationReport r = verify_file("corpus/reacap/box-encoding.rcp", ns);
    REQUIRE(r.verified);
    CHECK(r.alpha_equal);
    const Term& t = r.output.term;
    REQUIRE(t->kind == TermKind::Let);
    REQUIRE(t->a->kind == TermKind::TLam);
    CHECK(t->a->a->kind == TermKind::TLam);
    std::string out = print(t);
    CHECK(out.find("[Top] in") != std::string::npos);
}

TEST_CASE("widening to cap eta-expands and packs the result") {
    NameSupply ns;
    TranslationReport r = verify_file("corpus/reacap/file-eta.rcp", ns);
    REQUIRE(r.verified);
    CHECK(r.alpha_equal);
    // the argument to g is a new abstraction, not f itself
    const Term* t = &r.output.term;
    int lets = 0;
    bool eta = false;
    while ((*t)->kind == TermKind::Let) {
        const Term& rhs = (*t)->a;
        if (rhs->kind == TermKind::CLam && rhs->a->kind == TermKind::CLam && rhs->a->a->kind == TermKind::Lam) {
            std::string body = print(rhs->a->a->a);
            eta = eta || (body.find("let [") != std::string::npos && body.find("pack") != std::string::npos);
        }
        t = &(*t)->b;
        ++lets;
    }
    CHECK(lets >= 2);
    CHECK(eta);
}

TEST_CASE("interpretations are irrelevant for cap-free types") {
    CrossCheckBounds b;
    b.max_bindings = 2;
    b.type_depth = 2;
    CrossCheckReport r = crosscheck_encode(b);
    CHECK(r.encode_redundant > 0);
    CHECK(r.encode_monotone > 0);
    for (const auto& w : r.witnesses) INFO(w);
    CHECK(r.disagreements == 0);
}

TEST_CASE("top-level translation context is proper") {
    NameSupply ns;
    Program p = parse_program(testing::slurp(testing::source_path("corpus/reacap/dcs-console.rcp")), Dialect::Reacap,
                              ns);
    auto [tau, delta] = initial_translation_context(p, ns);
    CHECK(proper_violations(tau, p.ctx, delta, p.defs, ns).empty());
    TranslationContext broken = tau;
    broken.rho.clear();
    CHECK_FALSE(proper_violations(broken, p.ctx, delta, p.defs, ns).empty());
}

TEST_CASE("every well-typed reacap corpus program translates and re-checks") {
    namespace fs = std::filesystem;
    const std::set<std::string> rejected = {"make-file-pure.rcp", "tapp-cap-leak.rcp", "use-missing.rcp",
                                            "mkiterator-no-use.rcp"};
    int n = 0;
    for (const auto& e : fs::directory_iterator(testing::source_path("corpus/reacap"))) {
        std::string file = e.path().filename().string();
        if (rejected.count(file)) continue;
        NameSupply ns;
        TranslationReport r = verify_file("corpus/reacap/" + file, ns);
        INFO(file << ": " << r.output_type << " vs " << r.expected_type);
        CHECK_FALSE(r.error.has_value());
        CHECK(r.verified);
        ++n;
    }
    CHECK(n >= 8);
}
