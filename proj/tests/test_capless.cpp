#include <doctest.h>

#include <filesystem>

#include "capless/capless_check.hpp"
#include "capless/subcapture.hpp"
#include "helpers.hpp"

using namespace capless;

namespace {

struct Checked {
    NameSupply ns;
    Program p;
    TypingResult r;
    explicit Checked(const std::string& rel) {
        p = parse_program(testing::slurp(testing::source_path(rel)), Dialect::Capless, ns, rel);
        r = synth_capless(p.ctx, p.term, ns);
    }
    CaptureSet cs(const std::string& s) { return parse_cset_in(p, s, ns); }
    Exist ty(const std::string& s) { return parse_exist_in(p, s, ns); }
};

}  // namespace

TEST_CASE("curried logger: console on the inner arrow only") {
    Checked c("corpus/capless/curried-logger.cls");
    Exist want = c.ty("(forall (x1: Unit) (forall (x2: Unit) Int)^{console})^{logger}");
    CHECK(alpha_eq(c.r.type, want));
    // the older reading with console on the outside too is strictly weaker
    Exist older = c.ty("(forall (x1: Unit) (forall (x2: Unit) Int)^{console})^{console, logger}");
    CHECK_FALSE(alpha_eq(c.r.type, older));
    CHECK(subtype_capless(c.p.ctx, c.r.type, older, c.ns));
    CHECK(c.r.use.empty());
}

TEST_CASE("let keeps a used binder in the use set until avoidance") {
    Checked c("corpus/capless/let-use-applied.cls");
    CHECK(subcapture_capless(c.p.ctx, c.r.use, c.cs("{console, logger}")));
    CHECK_FALSE(subcapture_capless(c.p.ctx, c.r.use, c.cs("{logger}")));
}

TEST_CASE("a discarded result does not charge its captures") {
    Checked c("corpus/capless/let-use-discarded.cls");
    CHECK(subcapture_capless(c.p.ctx, c.r.use, c.cs("{logger}")));
    CHECK_FALSE(c.r.use.mentions(testing::name_of(c.p, "console")));
}

TEST_CASE("values have empty use sets") {
    NameSupply ns;
    Program p = parse_program("assume [io]; assume f : Top^{io};\nfun (x: Top) => f", Dialect::Capless, ns);
    TypingResult r = synth_capless(p.ctx, p.term, ns);
    CHECK(r.use.empty());
    CHECK(print(r.type, &p.ctx) == "(Top => Top^{f})^{f}");
}

TEST_CASE("break capabilities are contravariant") {
    NameSupply ns;
    Program p = testing::decls("assume [A <: Top]; assume [B <: A];", Dialect::Capless, ns);
    Type ba = parse_type_in(p, "Break[A]", ns), bb = parse_type_in(p, "Break[B]", ns);
    CHECK(subtype_capless(p.ctx, ba, bb, ns));
    CHECK_FALSE(subtype_capless(p.ctx, bb, ba, ns));
}

TEST_CASE("existential bodies compare under a shared binder") {
    NameSupply ns;
    Program p = testing::decls("assume [File <: Top]; assume [io]; assume f : File^{io};", Dialect::Capless, ns);
    Exist e1 = parse_exist_in(p, "exists c. File^{c}", ns);
    Exist e2 = parse_exist_in(p, "exists d. File^{d}", ns);
    Exist e3 = parse_exist_in(p, "exists d. File^{d, f}", ns);
    CHECK(subtype_capless(p.ctx, e1, e2, ns));
    CHECK(subtype_capless(p.ctx, e1, e3, ns));
    CHECK_FALSE(subtype_capless(p.ctx, e3, e1, ns));
}

TEST_CASE("rejections carry stable codes") {
    auto code_of = [](const std::string& src) {
        NameSupply ns;
        try {
            Program p = parse_program(src, Dialect::Capless, ns);
            synth_capless(p.ctx, p.term, ns);
        } catch (const CheckError& e) {
            return e.diag().code;
        }
        return std::string("accepted");
    };
    CHECK(code_of(testing::slurp(testing::source_path("corpus/capless/boundary-leak.cls"))) == code::ScopeLeak);
    CHECK(code_of(testing::slurp(testing::source_path("corpus/capless/existential-in-let.cls"))) ==
          code::ExistentialInLet);
    CHECK(code_of(testing::slurp(testing::source_path("corpus/capless/unpacked-escape.cls"))) ==
          code::ExistentialEscape);
    CHECK(code_of("assume [io];\nlet f = cfun [c <: {}] => fun (x: Top) => x in f [{io}]") == code::BoundViolation);
    CHECK(code_of("assume x : Top;\nx x") == code::NotAFunction);
}

TEST_CASE("every corpus derivation replays against the declarative rules") {
    namespace fs = std::filesystem;
    int n = 0;
    for (const auto& e : fs::directory_iterator(testing::source_path("corpus/capless"))) {
        NameSupply ns;
        Program p = parse_program(testing::slurp(e.path().string()), Dialect::Capless, ns);
        TypingResult r;
        try {
            r = synth_capless(p.ctx, p.term, ns);
        } catch (const CheckError&) {
            continue;
        }
        auto problems = validate_derivation(r.derivation, ns);
        INFO(e.path().string());
        for (const auto& s : problems) INFO(s);
        CHECK(problems.empty());
        ++n;
    }
    CHECK(n >= 25);
}

TEST_CASE("the validator notices tampered derivations") {
    Checked c("corpus/capless/let-use-applied.cls");
    REQUIRE(validate_derivation(c.r.derivation, c.ns).empty());

    Derivation narrowed = c.r.derivation;
    REQUIRE(narrowed.rule == "let");
    narrowed.use = {};
    CHECK_FALSE(validate_derivation(narrowed, c.ns).empty());

    Derivation retyped = c.r.derivation;
    retyped.premises[0].type = plain(pure(mk_top()));
    CHECK_FALSE(validate_derivation(retyped, c.ns).empty());

    Derivation dropped = c.r.derivation;
    dropped.premises.pop_back();
    CHECK_FALSE(validate_derivation(dropped, c.ns).empty());
}
