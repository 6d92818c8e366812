#include <doctest.h>

#include "capless/cli.hpp"
#include "capless/reacap_check.hpp"
#include "helpers.hpp"

using namespace capless;
using testing::decls;
using testing::name_of;

namespace {

struct Fixture {
    NameSupply ns;
    Program p;
    Fixture()
        : p(decls("type List[+A] = forall [R <: Top] (A => R => R) => R => R;"
                  "type K[+A, -B] = forall (k: B) A;"
                  "assume [IO <: Top]; assume [Unit <: Top]; assume [Int <: Top];"
                  "assume a : IO^{cap}; assume b : IO^{cap}; assume console : Top^{cap};",
                  Dialect::Reacap, ns)) {}

    Type ty(const std::string& s) { return parse_type_in(p, s, ns); }
    CaptureSet cs(const std::string& s) { return parse_cset_in(p, s, ns); }
    CaptureSet dcs_of(const std::string& s) { return dcs(p.ctx, p.defs, ty(s)); }
};

}  // namespace

TEST_SUITE("deep capture sets") {
    TEST_CASE("top") {
        Fixture f;
        CHECK(f.dcs_of("Top") == CaptureSet{});
    }
    TEST_CASE("type variable goes through its bound") {
        Fixture f;
        CHECK(f.dcs_of("forall [X <: Top] forall (x: X) X") == CaptureSet{});
        CHECK(dcs(f.p.ctx.extend_type(f.ns.fresh("X"), mk_top()), f.p.defs, mk_top()) == CaptureSet{});
    }
    TEST_CASE("function drops its parameter and its reach") {
        Fixture f;
        CHECK(f.dcs_of("forall (z: IO^{cap}) IO^{z, a}") == f.cs("{a}"));
        CHECK(f.dcs_of("forall @use (z: box IO^{cap}) IO^{z*, a}") == f.cs("{a}"));
        // the domain does not count
        CHECK(f.dcs_of("forall (z: IO^{b}) IO^{a}") == f.cs("{a}"));
    }
    TEST_CASE("capturing type adds its set") {
        Fixture f;
        CHECK(f.dcs_of("(box IO^{a})^{b}") == f.cs("{a, b}"));
        CHECK(f.dcs_of("IO^{cap}") == CaptureSet{Capture::cap()});
    }
    TEST_CASE("type abstraction") {
        Fixture f;
        CHECK(f.dcs_of("forall [X <: Top] IO^{a}") == f.cs("{a}"));
    }
    TEST_CASE("box") {
        Fixture f;
        CHECK(f.dcs_of("box IO^{a}") == f.cs("{a}"));
    }
    TEST_CASE("capture abstraction drops its variable") {
        Fixture f;
        CHECK(f.dcs_of("forall [c] Top^{c, a}") == f.cs("{a}"));
    }
    TEST_CASE("applied type keeps covariant arguments only") {
        Fixture f;
        CHECK(f.dcs_of("K[IO^{a}, IO^{b}]") == f.cs("{a}"));
        CHECK(f.dcs_of("K[box IO^{a}, box IO^{b}]") == f.cs("{a}"));
    }
    TEST_CASE("a list of console operations yields {console}") {
        Fixture f;
        CHECK(f.dcs_of("List[box (Unit => Int)^{console}]") == f.cs("{console}"));
    }
    TEST_CASE("capturing layer distributes over every shape in a small family") {
        Fixture f;
        for (const char* shape : {"Top", "box IO^{a}", "forall (z: Top) IO^{b}", "K[IO^{a}, IO^{b}]"}) {
            Type t = f.ty(shape);
            for (const char* c : {"{}", "{a}", "{a, b}", "{cap}"}) {
                CaptureSet set = f.cs(c);
                CHECK(dcs(f.p.ctx, f.p.defs, capt(t.shape, set)) == dcs(f.p.ctx, f.p.defs, t.shape).unite(set));
            }
        }
    }
}

TEST_SUITE("reach refinement") {
    TEST_CASE("function domain and codomain stay untouched") {
        Fixture f;
        CaptureSet xs{Capture::reach(name_of(f.p, "a"))};
        Type fun = f.ty("forall (z: IO^{cap}) IO^{cap}");
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, fun), fun));
        Type fun_cap = f.ty("(forall (z: IO^{cap}) IO^{cap})^{cap}");
        Type want = capt(fun_cap.shape, xs);
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, fun_cap), want));
    }
    TEST_CASE("boxes, type and capture abstractions are refined") {
        Fixture f;
        CaptureSet xs{Capture::reach(name_of(f.p, "a"))};
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, f.ty("box IO^{cap}")), f.ty("box IO^{a*}")));
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, f.ty("forall [X <: Top] IO^{cap}")),
                       f.ty("forall [X <: Top] IO^{a*}")));
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, f.ty("forall [c] IO^{cap, c}")), f.ty("forall [c] IO^{a*, c}")));
    }
    TEST_CASE("applied types refine covariant arguments only") {
        Fixture f;
        CaptureSet xs{Capture::reach(name_of(f.p, "a"))};
        CHECK(alpha_eq(reach_refine(f.p.defs, xs, f.ty("K[box IO^{cap}, box IO^{cap}]")),
                       f.ty("K[box IO^{a*}, box IO^{cap}]")));
    }
    TEST_CASE("refinement is idempotent") {
        Fixture f;
        CaptureSet xs{Capture::reach(name_of(f.p, "a"))};
        for (const char* s : {"box IO^{cap}", "(forall (z: IO^{cap}) IO^{cap})^{cap}", "K[box IO^{cap}, Top]",
                              "List[box (Unit => Int)^{cap}]"}) {
            Type once = reach_refine(f.p.defs, xs, f.ty(s));
            CHECK(alpha_eq(reach_refine(f.p.defs, xs, once), once));
        }
    }
}

TEST_SUITE("rejections") {
    CliResult check_file(const std::string& rel) {
        CliOptions o;
        o.command = "check";
        o.path = testing::source_path(rel);
        return run_cli(o);
    }
    TEST_CASE("makeFilePure-shaped program is rejected") {
        CliResult r = check_file("corpus/reacap/make-file-pure.rcp");
        CHECK(r.exit == exit_code::TypeError);
        CHECK(r.err.find("E-ARGUMENT-MISMATCH") != std::string::npos);
    }
    TEST_CASE("type argument reaching cap is rejected") {
        CliResult r = check_file("corpus/reacap/tapp-cap-leak.rcp");
        CHECK(r.exit == exit_code::TypeError);
        CHECK(r.err.find("E-CAP-IN-TYPE-ARG") != std::string::npos);
    }
    TEST_CASE("unboxing cap is accepted by default and rejected by the lint") {
        NameSupply ns;
        const char* src = "assume [IO <: Top]; assume io : IO^{cap};\nlet b = box io in unbox {cap} b";
        Program p = parse_program(src, Dialect::Reacap, ns);
        CHECK_NOTHROW(synth_reacap(p.ctx, p.defs, p.term, ns));
        ReacapOptions lint;
        lint.forbid_cap_unbox = true;
        CHECK_THROWS_AS(synth_reacap(p.ctx, p.defs, p.term, ns, lint), CheckError);
    }
}
