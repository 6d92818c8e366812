#include <doctest.h>

#include <json.hpp>

#include "capless/cli.hpp"
#include "helpers.hpp"

using namespace capless;

namespace {

CliResult run(const std::string& command, const std::string& rel, bool json = false) {
    CliOptions o;
    o.command = command;
    o.path = testing::source_path(rel);
    o.json = json;
    o.write_files = false;
    return run_cli(o);
}

CliResult run_text(const std::string& command, const std::string& text, Dialect d, long fuel = kDefaultFuel) {
    CliOptions o;
    o.command = command;
    o.path = d == Dialect::Capless ? "inline.cls" : "inline.rcp";
    o.fuel = fuel;
    o.write_files = false;
    return run_cli_source(o, text);
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run("check", "corpus/capless/does-not-exist.cls").exit == exit_code::ParseOrIO);
    CHECK(run("check", "corpus/capless/curried-logger.cls").exit == exit_code::Ok);
    CHECK(run("check", "corpus/capless/boundary-leak.cls").exit == exit_code::TypeError);
    CHECK(run_text("check", "let x = in x", Dialect::Capless).exit == exit_code::ParseOrIO);
    CHECK(run_text("eval", "let f = fun (x: Top) => x in let g = f f in g", Dialect::Capless, 1).exit ==
          exit_code::OutOfFuel);
    CHECK(run("translate", "corpus/reacap/box-encoding.rcp").exit == exit_code::Ok);
    CHECK(run("translate", "corpus/reacap/make-file-pure.rcp").exit == exit_code::TypeError);
}

TEST_CASE("diagnostics name the code and the location") {
    CliResult r = run("check", "corpus/reacap/use-missing.rcp");
    CHECK(r.exit == exit_code::TypeError);
    CHECK(r.err.find("error[E-REACH-ESCAPE]") != std::string::npos);
    CHECK(r.err.find("use-missing.rcp:") != std::string::npos);
}

TEST_CASE("json output") {
    CliResult ok = run("check", "corpus/capless/curried-logger.cls", true);
    auto j = nlohmann::json::parse(ok.out);
    CHECK(j["ok"] == true);
    CHECK(j["use"] == "{}");
    CHECK(j["type"] == "(Unit => (Unit => Int)^{console})^{logger}");

    CliResult bad = run("check", "corpus/capless/boundary-leak.cls", true);
    auto k = nlohmann::json::parse(bad.out);
    CHECK(k["ok"] == false);
    REQUIRE(k["diagnostics"].size() >= 1);
    CHECK(k["diagnostics"][0]["code"] == "E-SCOPE-LEAK");
}

TEST_CASE("eval prints the answer and the trace") {
    CliOptions o;
    o.command = "eval";
    o.path = testing::source_path("corpus/capless/boundary-ok.cls");
    o.trace = true;
    CliResult r = run_cli(o);
    CHECK(r.exit == exit_code::Ok);
    CHECK(r.out.find("step 3: breakout |") != std::string::npos);
    CHECK(r.out.find("answer: ") != std::string::npos);
}

TEST_CASE("translate reports a verified round trip and a sidecar") {
    CliResult r = run("translate", "corpus/reacap/file-eta.rcp");
    REQUIRE(r.exit == exit_code::Ok);
    CHECK(r.out.find("verified: yes") != std::string::npos);
    CHECK_FALSE(r.translated.empty());
    auto side = nlohmann::json::parse(r.sidecar);
    CHECK(side["verified"] == true);
    // the emitted program checks on its own
    CHECK(run_text("check", r.translated, Dialect::Capless).exit == exit_code::Ok);
}

TEST_CASE("soundness mode") {
    CliOptions o;
    o.command = "eval";
    o.path = testing::source_path("corpus/capless/church-pair.cls");
    o.check_soundness = true;
    CliResult r = run_cli(o);
    CHECK(r.exit == exit_code::Ok);
    CHECK(r.out.find("soundness: ok") != std::string::npos);
}
