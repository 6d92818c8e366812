#include <doctest.h>

#include <filesystem>

#include "capless/frontend.hpp"
#include "gen.hpp"
#include "helpers.hpp"

using namespace capless;

TEST_CASE("let and application parse to the expected tree") {
    NameSupply ns;
    Program p = parse_program("let x = fun (y: Top) => y in x x", Dialect::Capless, ns);
    REQUIRE(p.term->kind == TermKind::Let);
    const Term& rhs = p.term->a;
    REQUIRE(rhs->kind == TermKind::Lam);
    CHECK(rhs->a->kind == TermKind::Var);
    CHECK(rhs->a->x == rhs->x);
    const Term& body = p.term->b;
    REQUIRE(body->kind == TermKind::App);
    CHECK(body->x == p.term->x);
    CHECK(body->y == p.term->x);
}

TEST_CASE("church pair definition registers with its variances") {
    NameSupply ns;
    Program p = parse_program("type Pair[+X1, +X2] = forall [XR <: Top] forall (z: X1 => X2 => XR) XR;\n"
                              "fun (q: Top) => q",
                              Dialect::Reacap, ns);
    const TypeDef* d = p.defs.find("Pair");
    REQUIRE(d != nullptr);
    REQUIRE(d->params.size() == 2);
    CHECK(d->params[0].second == Variance::Covariant);
    CHECK(d->params[1].second == Variance::Covariant);
    CHECK(d->body->kind == ShapeKind::TFun);
}

TEST_CASE("compound operands are rejected") {
    NameSupply ns;
    try {
        parse_program("assume x : Top;\n(fun (y: Top) => y) x", Dialect::Capless, ns);
        FAIL("expected a parse error");
    } catch (const CheckError& e) {
        CHECK(e.diag().code == std::string(code::NonMnfOperand));
    }
}

TEST_CASE("empty capture set is the pure type") {
    NameSupply ns;
    Program p = testing::decls("assume [IO <: Top];", Dialect::Capless, ns);
    CHECK(alpha_eq(parse_type_in(p, "IO^{}", ns), parse_type_in(p, "IO", ns)));
    CHECK(print(parse_type_in(p, "IO^{}", ns), &p.ctx) == "IO");
}

TEST_CASE("box binds looser than the capture postfix") {
    NameSupply ns;
    Program p = testing::decls("assume [IO <: Top]; assume f : IO^{cap};", Dialect::Reacap, ns);
    Type t = parse_type_in(p, "box IO^{f}", ns);
    REQUIRE(t.shape->kind == ShapeKind::Boxed);
    CHECK(t.cs.empty());
    CHECK(t.shape->param.cs.size() == 1);
}

namespace {

void round_trip_program(const std::string& text, Dialect d, const std::string& what) {
    NameSupply ns, ns2;
    Program p = parse_program(text, d, ns);
    std::string once = print_program(p);
    Program q = parse_program(once, d, ns2);
    INFO(what);
    // Declarations are free in the term; parsing from equal supplies numbers them alike.
    REQUIRE(p.ctx.size() == q.ctx.size());
    for (std::size_t i = 0; i < p.ctx.size(); ++i) REQUIRE(p.ctx.items()[i].name == q.ctx.items()[i].name);
    CHECK(alpha_eq(p.term, q.term));
    CHECK(print_program(q) == once);
}

}  // namespace

TEST_CASE("corpus programs round-trip through print and parse") {
    namespace fs = std::filesystem;
    int n = 0;
    for (const char* dir : {"corpus/capless", "corpus/reacap"})
        for (const auto& e : fs::directory_iterator(testing::source_path(dir))) {
            std::string path = e.path().string();
            round_trip_program(testing::slurp(path), dialect_for_path(path, Dialect::Capless), path);
            ++n;
        }
    CHECK(n >= 40);
}

TEST_CASE("fuzzed trees round-trip through print and parse") {
    int checked = 0;
    for (Dialect d : {Dialect::Capless, Dialect::Reacap}) {
        testing::Gen g(d, d == Dialect::Capless ? 7u : 11u);
        for (int i = 0; i < 1000; ++i) {
            Term t = g.term(4);
            std::string text = print(t);
            NameSupply ns;
            Program p;
            try {
                p = parse_program(text, d, ns);
            } catch (const CheckError& e) {
                FAIL_CHECK("does not parse: " << e.diag().message << "\n" << text);
                continue;
            }
            INFO(text);
            CHECK(alpha_eq(t, p.term));
            CHECK(print(p.term) == text);
            ++checked;
        }
    }
    CHECK(checked == 2000);
}
