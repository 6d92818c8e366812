#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "capless/cli.hpp"

int main(int argc, char** argv) {
    using namespace capless;
    CliOptions opts;
    if (const char* c = std::getenv("CAPLESS_COLOR")) opts.color = std::string(c) == "1";

    CLI::App app{"capless: checker, evaluator and translator for Capless and Reacap"};
    app.require_subcommand(1);
    std::string dialect;
    app.add_flag("--json", opts.json, "machine-readable output");
    app.add_option("--dialect", dialect, "capless or reacap (default: from the file extension)")
        ->check(CLI::IsMember({"capless", "reacap"}));

    auto* check = app.add_subcommand("check", "type-check a program and print its use set and type");
    check->add_option("path", opts.path)->required();
    check->add_flag("--forbid-cap-unbox", opts.forbid_cap_unbox, "reject unbox {cap} x");

    auto* eval = app.add_subcommand("eval", "type-check and run a Capless program");
    eval->add_option("path", opts.path)->required();
    eval->add_option("--fuel", opts.fuel, "step budget")->check(CLI::NonNegativeNumber);
    eval->add_flag("--trace", opts.trace, "print one line per step");
    eval->add_flag("--unsafe", opts.unsafe, "run without type-checking first");
    eval->add_flag("--check-soundness", opts.check_soundness, "re-type every reached state");

    auto* tr = app.add_subcommand("translate", "translate a Reacap program to Capless");
    tr->add_option("path", opts.path)->required();
    tr->add_option("-o,--output", opts.output, "output .cls path");
    tr->add_flag("--verify,!--no-verify", opts.verify, "re-check the output against the encoded type (default on)");

    // Global flags are accepted after the subcommand as well.
    for (auto* sub : {check, eval, tr}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code::ParseOrIO;
    }
    if (!dialect.empty()) opts.dialect = dialect == "reacap" ? Dialect::Reacap : Dialect::Capless;
    opts.command = app.get_subcommands().front()->get_name();

    CliResult r = run_cli(opts);
    std::cout << r.out;
    std::cerr << r.err;
    return r.exit;
}
