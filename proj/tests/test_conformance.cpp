#include <doctest.h>

#include <set>

#include "capless/conformance.hpp"
#include "helpers.hpp"

using namespace capless;

namespace {

std::string corpus_root() { return testing::source_path("corpus"); }

std::vector<CorpusEntry> manifest() { return load_manifest(corpus_root() + "/manifest.json"); }

// Whitespace runs collapse to one space so anchors can cross line breaks.
std::string squeeze(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

}  // namespace

TEST_CASE("manifest loads with unique ids") {
    auto entries = manifest();
    CHECK(entries.size() >= 100);
    std::set<std::string> ids;
    for (const auto& e : entries) CHECK(ids.insert(e.id).second);
    for (const char* id : {"curried-logger", "let-use-applied", "let-use-discarded", "make-file-pure", "tapp-cap-leak",
                           "dcs-console", "use-propagation", "mkiterator-translate", "boundary-ok", "boundary-leak",
                           "file-eta-translate", "box-encoding-translate"})
        CHECK_MESSAGE(ids.count(id) == 1, id);
}

TEST_CASE("anchors are verbatim quotes") {
    std::string text = squeeze(testing::slurp(testing::source_path("paper.md")));
    REQUIRE_FALSE(text.empty());
    int anchored = 0;
    for (const auto& e : manifest()) {
        if (!e.anchored) continue;
        ++anchored;
        INFO(e.id << ": " << e.anchor);
        CHECK(text.find(squeeze(e.anchor)) != std::string::npos);
    }
    CHECK(anchored >= 12);
}

TEST_CASE("malformed manifests are reported") {
    CHECK_THROWS_AS(load_manifest(testing::source_path("corpus/no-such-manifest.json")), std::runtime_error);
}

TEST_CASE("every corpus entry passes") {
    CorpusReport r = run_corpus(corpus_root());
    for (const auto& e : r.entries)
        if (!e.pass) FAIL_CHECK(e.id << ": " << e.detail);
    CHECK(r.all_pass());
    CHECK(r.entries.size() == manifest().size());
}

TEST_CASE("a wrong expectation fails the entry") {
    auto entries = manifest();
    CorpusEntry e;
    for (const auto& x : entries)
        if (x.id == "curried-logger") e = x;
    REQUIRE(e.id == "curried-logger");
    e.expect.value = "(Unit => (Unit => Int)^{console})^{console, logger}";
    e.golden.clear();
    EntryResult r = run_entry(corpus_root(), e);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.detail.empty());
}

TEST_CASE("saturation oracle rejects sets outside its family") {
    NameSupply ns;
    Name a = ns.fresh("a"), b = ns.fresh("b");
    Context ctx = Context{}.extend_capt(a).extend_capt(b);
    std::vector<Capture> atoms = {Capture::capt(a)};
    CHECK_THROWS_AS(subcapture_by_saturation(ctx, atoms, 3, true, CaptureSet::of_capt(b), {}),
                    std::invalid_argument);
}
