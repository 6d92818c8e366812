// Acceptance driver: one PASS/FAIL line per criterion. Criteria 5 to 8 reuse the unit
// test cases through doctest filters; the rest measure the corpus and oracles directly.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "capless/capless_check.hpp"
#include "capless/capless_eval.hpp"
#include "capless/conformance.hpp"
#include "capless/decap.hpp"
#include "helpers.hpp"

using namespace capless;
namespace fs = std::filesystem;

namespace {

struct Tally {
    int cases = 0;
    int failed_cases = 0;
    int asserts_failed = 0;
};
Tally g_tally;

struct TallyListener : doctest::IReporter {
    explicit TallyListener(const doctest::ContextOptions&) {}
    void report_query(const doctest::QueryData&) override {}
    void test_run_start() override {}
    void test_run_end(const doctest::TestRunStats&) override {}
    void test_case_start(const doctest::TestCaseData&) override { ++g_tally.cases; }
    void test_case_reenter(const doctest::TestCaseData&) override {}
    void test_case_end(const doctest::CurrentTestCaseStats& s) override {
        if (s.failure_flags) ++g_tally.failed_cases;
        g_tally.asserts_failed += s.numAssertsFailedCurrentTest;
    }
    void test_case_exception(const doctest::TestCaseException&) override {}
    void subcase_start(const doctest::SubcaseSignature&) override {}
    void subcase_end() override {}
    void log_assert(const doctest::AssertData&) override {}
    void log_message(const doctest::MessageData&) override {}
    void test_case_skipped(const doctest::TestCaseData&) override {}
};
REGISTER_LISTENER("tally", 1, TallyListener);

struct Unit {
    Tally tally;
    std::string log;
    bool ok() const { return tally.cases > 0 && tally.failed_cases == 0; }
    std::string summary() const {
        return std::to_string(tally.cases - tally.failed_cases) + "/" + std::to_string(tally.cases) + " test cases";
    }
};

Unit run_tests(const std::string& suites, const std::string& cases) {
    g_tally = {};
    std::ostringstream out;
    doctest::Context ctx;
    ctx.setOption("no-intro", true);
    ctx.setOption("no-version", true);
    if (!suites.empty()) ctx.setOption("test-suite", suites.c_str());
    if (!cases.empty()) ctx.setOption("test-case", cases.c_str());
    ctx.setCout(&out);
    ctx.run();
    return {g_tally, out.str()};
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s) {
    std::ostringstream o;
    o.precision(2);
    o << std::fixed << s << "s";
    return o.str();
}

struct Verdict {
    int number;
    std::string title;
    bool pass = false;
    std::string summary;
    std::vector<std::string> notes;
};

void report(const Verdict& v, bool verbose) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << v.number << "] " << v.title << ": " << v.summary << "\n";
    if (!v.pass || verbose)
        for (const auto& n : v.notes) std::cout << "       " << n << "\n";
}

std::vector<std::string> sorted_files(const std::string& dir, const std::string& ext) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ext) out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

// Parses and checks a Capless file; nullopt if it is rejected.
std::optional<Program> well_typed(const std::string& path, NameSupply& ns) {
    try {
        Program p = parse_program(testing::slurp(path), Dialect::Capless, ns, path);
        synth_capless(p.ctx, p.term, ns);
        return p;
    } catch (const CheckError&) {
        return std::nullopt;
    }
}

Verdict corpus_completeness(const std::string& root) {
    Verdict v{1, "corpus completeness"};
    CorpusReport r = run_corpus(root);
    auto entries = load_manifest(root + "/manifest.json");
    int anchored = 0, anchored_pass = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].anchored) continue;
        ++anchored;
        if (r.entries[i].pass) ++anchored_pass;
    }
    for (const auto& e : r.entries)
        if (!e.pass) v.notes.push_back(e.id + ": " + e.detail.substr(0, e.detail.find('\n')));
    v.pass = r.all_pass() && anchored >= 12 && anchored_pass == anchored && r.seconds < 10.0;
    v.summary = std::to_string(static_cast<int>(r.entries.size()) - r.failures()) + "/" +
                std::to_string(r.entries.size()) + " entries, " + std::to_string(anchored_pass) + "/" +
                std::to_string(anchored) + " anchored, " + secs(r.seconds) + " (limit 10s)";
    return v;
}

Verdict soundness(const std::string& root) {
    Verdict v{2, "soundness harness"};
    int programs = 0, boundary = 0, clean = 0;
    long steps = 0;
    for (const auto& path : sorted_files(root + "/capless", ".cls")) {
        NameSupply ns;
        auto p = well_typed(path, ns);
        if (!p) continue;
        ++programs;
        if (print(p->term).find("boundary") != std::string::npos) ++boundary;
        SoundnessReport s = check_soundness(p->ctx, p->term, 100000, ns);
        steps += s.steps;
        if (s.ok())
            ++clean;
        else
            v.notes.push_back(fs::path(path).filename().string() + ": " + s.first_violation);
    }
    v.pass = programs >= 25 && boundary >= 1 && clean == programs;
    v.summary = std::to_string(clean) + "/" + std::to_string(programs) + " well-typed programs clean (" +
                std::to_string(boundary) + " with boundaries), " + std::to_string(steps) + " steps checked";
    return v;
}

// The displayed translation of mkIterator's signature, in the printer's ASCII notation.
constexpr const char* kDisplayedMkIterator =
    "forall [X <: Top] forall [c_x <: {}] forall [c_xstar] "
    "(List[box (Unit => X)^{c_xstar}]^{c_x} => Iterator[X]^{c_xstar})^{c_xstar}";

Verdict translation(const std::string& root) {
    Verdict v{3, "translation verification"};
    int programs = 0, verified = 0, alpha = 0;
    std::string mk_expected;
    for (const auto& path : sorted_files(root + "/reacap", ".rcp")) {
        NameSupply ns;
        Program p = parse_program(testing::slurp(path), Dialect::Reacap, ns, path);
        TranslationReport r;
        try {
            r = verify_translation(p, ns);
        } catch (const CheckError&) {
            continue;  // ill-typed source
        }
        ++programs;
        std::string file = fs::path(path).filename().string();
        if (r.verified) ++verified;
        if (r.verified && r.alpha_equal) ++alpha;
        if (!r.verified)
            v.notes.push_back(file + ": output does not re-check at the encoded type" +
                              (r.error ? " (" + r.error->code + ")" : std::string()));
        else if (!r.alpha_equal)
            v.notes.push_back(file + ": verified by subsumption only; output " + r.output_type + " is a strict subtype");
        if (file == "mkiterator.rcp") mk_expected = r.expected_type;
    }
    if (alpha < verified)
        v.notes.push_back("Capless types a variable x, and closures over it, with {x} where the encoding has "
                          "{c_x}; {x} <: {c_x} holds but the two are not alpha-equal");
    bool mk_match = mk_expected == kDisplayedMkIterator;
    if (!mk_match) {
        v.notes.push_back("mkIterator displayed type: " + std::string(kDisplayedMkIterator));
        v.notes.push_back("mkIterator encoded type:   " + mk_expected);
        v.notes.push_back("the display keeps List and Iterator folded; the encoding expands them and encodes "
                          "each arrow inside with its own capture parameters");
        v.notes.push_back("the display has no existential on the result and {c_xstar} on the arrow; the binding "
                          "encoding gives exists c. ... and {c_x, c_xstar}, plus the outer {c_mkIterator}");
    }
    v.pass = programs > 0 && verified == programs && alpha == programs && mk_match;
    v.summary = std::to_string(verified) + "/" + std::to_string(programs) + " verify, " + std::to_string(alpha) +
                "/" + std::to_string(programs) + " alpha-equal, mkIterator display " +
                (mk_match ? "matches" : "differs");
    return v;
}

Verdict oracles() {
    Verdict v{4, "oracle equivalence"};
    CrossCheckReport r = enumerate_and_crosscheck();
    v.notes = r.witnesses;
    v.pass = r.ok() && r.subcapture_capless > 0 && r.subcapture_reacap > 0 && r.subtype_capless > 0 &&
             r.subtype_reacap > 0 && r.seconds < 60.0;
    std::ostringstream s;
    s << "subcapture " << r.subcapture_capless << "+" << r.subcapture_reacap << ", subtype " << r.subtype_capless
      << "+" << r.subtype_reacap << ", encode " << r.encode_monotone << "+" << r.encode_redundant << " queries, "
      << r.disagreements << " disagreements, " << secs(r.seconds) << " (limit 60s)";
    v.summary = s.str();
    return v;
}

Verdict from_tests(int n, const std::string& title, const std::string& suites, const std::string& cases) {
    Verdict v{n, title};
    Unit u = run_tests(suites, cases);
    v.pass = u.ok();
    v.summary = u.summary();
    if (!u.ok()) {
        std::istringstream in(u.log);
        for (std::string line; std::getline(in, line);)
            if (!line.empty()) v.notes.push_back(line);
    }
    return v;
}

Verdict scope_safety(const std::string& root) {
    Verdict v = from_tests(8, "scope safety", "",
                           "a break outside its scope is stuck,"
                           "the leaked closure from an ill-typed program gets stuck when run unchecked");
    int programs = 0, extruded = 0;
    for (const auto& path : sorted_files(root + "/capless", ".cls")) {
        NameSupply ns;
        auto p = well_typed(path, ns);
        if (!p) continue;
        ++programs;
        EvalResult r = eval(initial_machine(p->term), 100000, ns);
        if (r.outcome == EvalResult::Outcome::Stuck && r.reason == StuckReason::ScopeExtrusion) {
            ++extruded;
            v.notes.push_back(fs::path(path).filename().string() + " reached a scope extrusion");
        }
    }
    v.pass = v.pass && extruded == 0 && programs > 0;
    v.summary = std::to_string(programs - extruded) + "/" + std::to_string(programs) +
                " well-typed programs never extrude; detector " + v.summary;
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria for the Capless/Reacap toolchain"};
    std::string root = testing::source_path("corpus");
    bool strict = false, verbose = false;
    app.add_option("--root", root, "corpus directory");
    app.add_flag("--strict", strict, "exit 1 when any criterion fails");
    app.add_flag("-v,--verbose", verbose, "print notes for passing criteria too");
    CLI11_PARSE(app, argc, argv);

    auto t0 = std::chrono::steady_clock::now();
    std::vector<Verdict> verdicts;
    auto emit = [&](Verdict v) {
        report(v, verbose);
        verdicts.push_back(std::move(v));
    };
    emit(corpus_completeness(root));
    emit(soundness(root));
    emit(translation(root));
    emit(oracles());
    emit(from_tests(5, "refinement soundness regression", "reach refinement,rejections", ""));
    emit(from_tests(6, "dcs unit table", "deep capture sets", ""));
    emit(from_tests(7, "determinism and round-trip", "",
                    "corpus programs round-trip through print and parse,"
                    "fuzzed trees round-trip through print and parse,"
                    "traces are byte-identical across runs"));
    emit(scope_safety(root));

    int passed = 0;
    for (const auto& v : verdicts) passed += v.pass;
    std::cout << passed << "/" << verdicts.size() << " criteria pass (" << secs(since(t0)) << ")\n";
    return strict && passed != static_cast<int>(verdicts.size()) ? 1 : 0;
}
