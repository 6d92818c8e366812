#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "capless/capless_eval.hpp"
#include "capless/syntax.hpp"

namespace capless {

namespace exit_code {
inline constexpr int Ok = 0;
inline constexpr int TypeError = 1;  // also: stuck well-typed program, soundness violation
inline constexpr int ParseOrIO = 2;
inline constexpr int OutOfFuel = 3;
inline constexpr int VerifyMismatch = 4;
}  // namespace exit_code

struct CliOptions {
    std::string command;  // check | eval | translate
    std::string path;
    bool json = false;
    std::optional<Dialect> dialect;
    bool color = false;

    bool forbid_cap_unbox = false;

    long fuel = kDefaultFuel;
    bool trace = false;
    bool unsafe = false;
    bool check_soundness = false;

    std::string output;  // translate: defaults to the input path with .cls
    bool verify = true;
    bool write_files = true;  // translate: off when run from the corpus runner
};

struct CliResult {
    int exit = exit_code::Ok;
    std::string out;
    std::string err;
    std::string translated;  // translate: the emitted program text
    std::string sidecar;     // translate: the report as JSON text
};

// Reads opts.path and runs the command.
CliResult run_cli(const CliOptions& opts);
// Runs the command on in-memory source text; opts.path only names the file.
CliResult run_cli_source(const CliOptions& opts, std::string_view text);

}  // namespace capless
