#include <doctest.h>

#include <filesystem>

#include "capless/capless_eval.hpp"
#include "helpers.hpp"

using namespace capless;

namespace {

EvalResult run(const std::string& src, long fuel = kDefaultFuel, bool trace = true) {
    NameSupply ns;
    Program p = parse_program(src, Dialect::Capless, ns);
    return eval(initial_machine(p.term), fuel, ns, trace);
}

}  // namespace

TEST_CASE("traces are byte-identical across runs") {
    namespace fs = std::filesystem;
    for (const auto& e : fs::directory_iterator(testing::source_path("corpus/capless"))) {
        std::string src = testing::slurp(e.path().string());
        EvalResult a = run(src), b = run(src);
        INFO(e.path().string());
        CHECK(a.trace == b.trace);
        CHECK(a.steps == b.steps);
        CHECK(print(plug(a.machine)) == print(plug(b.machine)));
    }
}

TEST_CASE("breaking out of a boundary") {
    EvalResult r = run(testing::slurp(testing::source_path("corpus/capless/boundary-ok.cls")));
    REQUIRE(r.outcome == EvalResult::Outcome::Answer);
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[1].rfind("step 2: enter |", 0) == 0);
    CHECK(r.trace[2].rfind("step 3: breakout |", 0) == 0);
}

TEST_CASE("leaving a boundary with an answer") {
    EvalResult r = run(testing::slurp(testing::source_path("corpus/capless/boundary-leave.cls")));
    REQUIRE(r.outcome == EvalResult::Outcome::Answer);
    bool left = false;
    for (const auto& l : r.trace) left |= l.find(": leave |") != std::string::npos;
    CHECK(left);
}

TEST_CASE("fuel") {
    const char* two = "let f = fun (x: Top) => x in let g = f f in g";
    CHECK(run(two, 1).outcome == EvalResult::Outcome::OutOfFuel);
    EvalResult full = run(two);
    CHECK(full.outcome == EvalResult::Outcome::Answer);
    // an answer needs no further fuel
    CHECK(run(two, full.steps).outcome == EvalResult::Outcome::Answer);
}

TEST_CASE("a break outside its scope is stuck") {
    NameSupply ns;
    Name l = ns.fresh("l"), v = ns.fresh("v");
    Machine m = initial_machine(mk_app(l, v));
    m.labels.push_back({l, mk_top()});
    m.index[v.serial] = 0;
    m.store.push_back({v, mk_lam(UseAnnot::Plain, ns.fresh("y"), pure(mk_top()), mk_var(v))});
    StepResult s = step(m, ns);
    CHECK(s.status == StepResult::Status::Stuck);
    CHECK(s.reason == StuckReason::ScopeExtrusion);
}

TEST_CASE("the leaked closure from an ill-typed program gets stuck when run unchecked") {
    const char* src =
        "let id = fun (v: Top) => v in\n"
        "let g = boundary [Top] as [c, br] in fun (w: Top) => br w in\n"
        "g id";
    NameSupply ns;
    Program p = parse_program(src, Dialect::Capless, ns);
    CHECK_THROWS_AS(synth_capless(p.ctx, p.term, ns), CheckError);
    EvalResult r = eval(initial_machine(p.term), kDefaultFuel, ns);
    CHECK(r.outcome == EvalResult::Outcome::Stuck);
    CHECK(r.reason == StuckReason::ScopeExtrusion);
}

TEST_CASE("soundness harness is clean on a program and flags a tampered state") {
    NameSupply ns;
    Program p = parse_program(testing::slurp(testing::source_path("corpus/capless/identity-chain.cls")),
                              Dialect::Capless, ns);
    SoundnessReport clean = check_soundness(p.ctx, p.term, kDefaultFuel, ns);
    CHECK(clean.ok());
    CHECK(clean.reached_answer);
    CHECK(clean.steps > 0);

    SoundnessOptions o;
    o.tamper = [&](Machine& m, long n) {
        if (n == 1) m.focus = mk_var(ns.fresh("ghost"));
    };
    SoundnessReport bad = check_soundness(p.ctx, p.term, kDefaultFuel, ns, o);
    CHECK_FALSE(bad.ok());
    CHECK(bad.preservation_violations + bad.progress_violations > 0);
    CHECK_FALSE(bad.first_violation.empty());
}

TEST_CASE("store typing gives one binding per stored value") {
    NameSupply ns;
    Program p = parse_program("let f = fun (x: Top) => x in let g = fun (y: Top) => f y in g", Dialect::Capless, ns);
    EvalResult r = eval(initial_machine(p.term), kDefaultFuel, ns);
    REQUIRE(r.outcome == EvalResult::Outcome::Answer);
    Context g = store_typing(p.ctx, r.machine, ns);
    CHECK(g.size() == p.ctx.size() + r.machine.store.size());
}
