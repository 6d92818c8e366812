#pragma once

#include <string>
#include <vector>

#include "capless/cli.hpp"

namespace capless {

// kind: type | error | answer | soundness | translate | use-bound
struct Expectation {
    std::string kind;
    std::string value;                 // type: printed type; error: code; answer: answer line
    std::vector<std::string> within;   // use-bound: every use-set name is one of these
    std::vector<std::string> not_within;
    bool alpha_equal = false;          // translate: also require alpha-equality
};

struct CorpusEntry {
    std::string id;
    std::string file;     // relative to the corpus root
    std::string dialect;  // capless | reacap
    std::string command;  // check | eval | soundness | translate
    std::vector<std::string> flags;
    Expectation expect;
    std::string golden;   // relative to the corpus root
    std::string anchor;   // verbatim quote the entry encodes
    bool anchored = false;
};

// Throws std::runtime_error on a malformed manifest.
std::vector<CorpusEntry> load_manifest(const std::string& path);

// The options an entry runs under, with files left unwritten.
CliOptions entry_options(const CorpusEntry& e);
// exit code, stdout, stderr and translated text, in that order
std::string transcript(const CliResult& r);

struct EntryResult {
    std::string id;
    bool pass = false;
    std::string detail;  // first failed check, or a diff against the golden
    CliResult result;
};

struct CorpusReport {
    std::vector<EntryResult> entries;
    double seconds = 0;
    bool all_pass() const;
    int failures() const;
};

// root holds manifest.json. An empty filter runs every entry; otherwise ids containing it.
// With update, goldens are rewritten from the current output instead of compared.
CorpusReport run_corpus(const std::string& root, const std::string& filter = "", bool update = false);
EntryResult run_entry(const std::string& root, const CorpusEntry& e, bool update = false);

struct CrossCheckBounds {
    int max_bindings = 4;
    int max_set_atoms = 3;        // query sets and Capless binding sets
    int reacap_binding_atoms = 2; // Reacap binding sets; the atom pool grows twice as fast there
    int type_depth = 3;
};

struct CrossCheckReport {
    long subcapture_capless = 0;  // queries compared
    long subcapture_reacap = 0;
    long subtype_capless = 0;
    long subtype_reacap = 0;
    long encode_monotone = 0;
    long encode_redundant = 0;
    long disagreements = 0;
    std::vector<std::string> witnesses;  // the first few, smallest context first
    double seconds = 0;
    bool ok() const { return disagreements == 0; }
};

// Compares the algorithmic relations against saturated declarative rule sets
// over an enumerated family, and checks encode_cset monotonicity.
CrossCheckReport enumerate_and_crosscheck(const CrossCheckBounds& b = {});

// Pieces of the above, exposed for unit tests.
CrossCheckReport crosscheck_subcapture(const CrossCheckBounds& b, Dialect d);
CrossCheckReport crosscheck_subtype(const CrossCheckBounds& b, Dialect d);
CrossCheckReport crosscheck_encode(const CrossCheckBounds& b);

// Declarative subcapturing by saturation of sc-elem/sc-var/sc-bound/sc-set/sc-trans
// over the sets of at most max_atoms atoms drawn from `atoms`.
bool subcapture_by_saturation(const Context& ctx, const std::vector<Capture>& atoms, int max_atoms,
                              bool with_bound, const CaptureSet& c1, const CaptureSet& c2);

}  // namespace capless
