#include <iostream>

#include <CLI11.hpp>

#include "capless/conformance.hpp"

int main(int argc, char** argv) {
    using namespace capless;
    CLI::App app{"capless-corpus: run the conformance corpus"};
    std::string root = "corpus";
    std::string filter;
    bool update = false;
    bool verbose = false;
    app.add_option("--root", root, "directory holding manifest.json");
    app.add_option("--filter", filter, "only entries whose id contains this text");
    app.add_flag("--update", update, "rewrite goldens from the current output");
    app.add_flag("-v,--verbose", verbose, "print every entry, not only failures");
    CLI11_PARSE(app, argc, argv);

    CorpusReport rep;
    try {
        rep = run_corpus(root, filter, update);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    for (const auto& e : rep.entries) {
        if (e.pass && !verbose) continue;
        std::cout << (e.pass ? "ok   " : "FAIL ") << e.id << "\n";
        if (!e.pass) std::cout << "  " << e.detail << "\n";
    }
    std::cout << rep.entries.size() - rep.failures() << "/" << rep.entries.size() << " entries pass ("
              << rep.seconds << " s)" << (update ? ", goldens rewritten" : "") << "\n";
    return rep.all_pass() ? 0 : 1;
}
