#include <doctest.h>

#include "capless/conformance.hpp"
#include "capless/subcapture.hpp"
#include "helpers.hpp"

using namespace capless;
using testing::decls;
using testing::name_of;

TEST_CASE("logger derives from f and console") {
    NameSupply ns;
    // c0 stands in for cap, which Capless does not have
    Program p = decls(
        "assume [File <: Top]; assume [Console <: Top]; assume [Logger <: Top]; assume [c0];"
        "assume f : File^{c0}; assume console : Console^{c0}; assume logger : Logger^{f, console};",
        Dialect::Capless, ns);
    CaptureSet logger = CaptureSet::of_term(name_of(p, "logger"));
    CaptureSet fc{Capture::term(name_of(p, "f")), Capture::term(name_of(p, "console"))};
    CHECK(subcapture_capless(p.ctx, {}, logger));
    CHECK(subcapture_capless(p.ctx, logger, fc));
    CHECK_FALSE(subcapture_capless(p.ctx, fc, logger));
}

TEST_CASE("reacap chain up to cap") {
    NameSupply ns;
    Program p = decls("assume [File <: Top]; assume f : File^{cap};", Dialect::Reacap, ns);
    CaptureSet f = CaptureSet::of_term(name_of(p, "f"));
    CHECK(subcapture_reacap(p.ctx, {}, f));
    CHECK(subcapture_reacap(p.ctx, f, CaptureSet{Capture::cap()}));
    CHECK(subcapture_reacap(p.ctx, CaptureSet{Capture::cap()}, CaptureSet{Capture::cap()}));
    CHECK_FALSE(subcapture_reacap(p.ctx, CaptureSet{Capture::cap()}, f));
}

TEST_CASE("sc-bound needs a bounded capture variable") {
    NameSupply ns;
    Name x = ns.fresh("x"), c = ns.fresh("c"), d = ns.fresh("d");
    Context ctx = Context{}.extend_term(x, pure(mk_top())).extend_capt(c, CaptureBound::of(CaptureSet::of_term(x)))
                      .extend_capt(d);
    std::vector<Capture> atoms = {Capture::term(x), Capture::capt(c), Capture::capt(d)};
    auto oracle = [&](const CaptureSet& a, const CaptureSet& b) {
        return subcapture_by_saturation(ctx, atoms, 3, true, a, b);
    };
    CaptureSet sc = CaptureSet::of_capt(c), sx = CaptureSet::of_term(x), sd = CaptureSet::of_capt(d);
    CHECK(subcapture_capless(ctx, sc, sx) == oracle(sc, sx));
    CHECK(subcapture_capless(ctx, sc, sx));
    // x is pure, so {c} <: {x} <: {}
    CHECK(subcapture_capless(ctx, sc, {}) == oracle(sc, {}));
    CHECK(subcapture_capless(ctx, sd, sx) == oracle(sd, sx));
    CHECK_FALSE(subcapture_capless(ctx, sd, sx));
    // Reacap has no sc-bound
    CHECK(subcapture_reacap(ctx, sc, sx) == subcapture_by_saturation(ctx, atoms, 3, false, sc, sx));
    CHECK_FALSE(subcapture_reacap(ctx, sc, sx));
}

TEST_CASE("reach captures compare by membership only") {
    NameSupply ns;
    Name x = ns.fresh("x"), y = ns.fresh("y");
    Context ctx = Context{}.extend_term(y, pure(mk_top())).extend_term(x, capt(mk_top(), CaptureSet::of_term(y)));
    CaptureSet xs{Capture::reach(x)};
    std::vector<Capture> atoms = {Capture::term(x), Capture::reach(x), Capture::term(y), Capture::cap()};
    CaptureSet xs_y{Capture::reach(x), Capture::term(y)};
    CaptureSet sx = CaptureSet::of_term(x);
    CHECK(subcapture_reacap(ctx, xs, xs_y) == subcapture_by_saturation(ctx, atoms, 3, false, xs, xs_y));
    CHECK(subcapture_reacap(ctx, xs, xs_y));
    CHECK(subcapture_reacap(ctx, xs, sx) == subcapture_by_saturation(ctx, atoms, 3, false, xs, sx));
    CHECK_FALSE(subcapture_reacap(ctx, xs, sx));
    CHECK(subcapture_reacap(ctx, sx, CaptureSet::of_term(y)));
}

TEST_CASE("bound subtyping") {
    NameSupply ns;
    Name x = ns.fresh("x"), y = ns.fresh("y");
    Context ctx = Context{}.extend_capt(y).extend_term(x, capt(mk_top(), CaptureSet::of_capt(y)));
    CaptureBound bx = CaptureBound::of(CaptureSet::of_term(x)), by = CaptureBound::of(CaptureSet::of_capt(y));
    CHECK(bound_subtype(ctx, bx, CaptureBound::star()));
    CHECK_FALSE(bound_subtype(ctx, CaptureBound::star(), bx));
    CHECK(bound_subtype(ctx, bx, by) == subcapture_capless(ctx, bx.set, by.set));
    CHECK(bound_subtype(ctx, bx, by));
}

TEST_CASE("union is the least upper bound") {
    NameSupply ns;
    Name a = ns.fresh("a"), b = ns.fresh("b"), c = ns.fresh("c");
    Context ctx = Context{}.extend_capt(a).extend_term(b, capt(mk_top(), CaptureSet::of_capt(a)))
                      .extend_term(c, capt(mk_top(), CaptureSet::of_term(b)));
    std::vector<CaptureSet> sets;
    for (int m = 0; m < 8; ++m) {
        CaptureSet s;
        if (m & 1) s.insert(Capture::capt(a));
        if (m & 2) s.insert(Capture::term(b));
        if (m & 4) s.insert(Capture::term(c));
        sets.push_back(s);
    }
    for (const auto& c1 : sets)
        for (const auto& c2 : sets) {
            CHECK(subcapture_capless(ctx, c1, c1.unite(c2)));
            for (const auto& d : sets)
                if (subcapture_capless(ctx, c1, d) && subcapture_capless(ctx, c2, d))
                    CHECK(subcapture_capless(ctx, c1.unite(c2), d));
        }
}

TEST_CASE("algorithmic subcapturing agrees with saturation on small contexts") {
    CrossCheckBounds b;
    b.max_bindings = 3;
    CrossCheckReport capless = crosscheck_subcapture(b, Dialect::Capless);
    CrossCheckReport reacap = crosscheck_subcapture(b, Dialect::Reacap);
    CHECK(capless.subcapture_capless > 1000);
    CHECK(reacap.subcapture_reacap > 1000);
    for (const auto& w : capless.witnesses) INFO(w);
    for (const auto& w : reacap.witnesses) INFO(w);
    CHECK(capless.disagreements == 0);
    CHECK(reacap.disagreements == 0);
}
