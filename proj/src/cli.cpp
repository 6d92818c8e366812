#include "capless/cli.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "capless/decap.hpp"
#include "capless/frontend.hpp"
#include "capless/reacap_check.hpp"

namespace capless {

namespace {

using nlohmann::ordered_json;

ordered_json diag_json(const Diagnostic& d) {
    ordered_json j;
    j["severity"] = d.severity;
    j["code"] = d.code;
    j["file"] = d.file;
    j["span"] = {{"line", d.span.line}, {"col", d.span.col}, {"end_col", d.span.end_col}};
    j["message"] = d.message;
    if (d.expected) j["expected"] = *d.expected;
    if (d.actual) j["actual"] = *d.actual;
    if (d.rule) j["rule"] = *d.rule;
    return j;
}

std::string diag_text(const Diagnostic& d, bool color) {
    std::ostringstream o;
    o << (d.file.empty() ? "<input>" : d.file);
    if (d.span.line > 0) o << ":" << d.span.line << ":" << d.span.col;
    o << ": " << (color ? "\x1b[31merror\x1b[0m" : "error") << "[" << d.code << "]: " << d.message << "\n";
    if (d.rule) o << "  rule: " << *d.rule << "\n";
    if (d.expected) o << "  expected: " << *d.expected << "\n";
    if (d.actual) o << "  actual: " << *d.actual << "\n";
    return o.str();
}

class Run {
public:
    Run(const CliOptions& o) : opts_(o) {}

    CliResult error(const Diagnostic& d0, int exit, ordered_json extra = ordered_json::object()) {
        Diagnostic d = d0;
        if (d.file.empty()) d.file = opts_.path;
        res_.exit = exit;
        if (opts_.json) {
            extra["ok"] = false;
            extra["diagnostics"] = ordered_json::array({diag_json(d)});
            res_.out += extra.dump(2) + "\n";
        } else {
            res_.err += diag_text(d, opts_.color);
        }
        return res_;
    }

    CliResult io_error(const std::string& msg) {
        Diagnostic d;
        d.code = code::Io;
        d.message = msg;
        return error(d, exit_code::ParseOrIO);
    }

    CliResult go(std::string_view text) {
        Dialect dialect = opts_.dialect ? *opts_.dialect : dialect_for_path(opts_.path, Dialect::Capless);
        Program p;
        try {
            p = parse_program(text, dialect, ns_, opts_.path);
        } catch (const CheckError& e) {
            return error(e.diag(), exit_code::ParseOrIO);
        }
        if (opts_.command == "check") return check(p);
        if (opts_.command == "eval") return eval_cmd(p);
        if (opts_.command == "translate") return translate(p);
        return io_error("unknown command " + opts_.command);
    }

private:
    CliResult check(const Program& p) {
        TypingResult r;
        try {
            if (p.dialect == Dialect::Reacap) {
                ReacapOptions ro;
                ro.forbid_cap_unbox = opts_.forbid_cap_unbox;
                r = synth_reacap(p.ctx, p.defs, p.term, ns_, ro);
            } else {
                r = synth_capless(p.ctx, p.term, ns_);
            }
        } catch (const CheckError& e) {
            return error(e.diag(), exit_code::TypeError);
        }
        std::string use = print(r.use, &p.ctx);
        std::string type = print(r.type, &p.ctx);
        if (opts_.json) {
            ordered_json j;
            j["ok"] = true;
            j["use"] = use;
            j["type"] = type;
            j["diagnostics"] = ordered_json::array();
            res_.out += j.dump(2) + "\n";
        } else {
            res_.out += "use: " + use + "  type: " + type + "\n";
        }
        return res_;
    }

    CliResult eval_cmd(const Program& p) {
        if (p.dialect != Dialect::Capless) return io_error("eval expects a Capless program");
        if (!opts_.unsafe || opts_.check_soundness) {
            try {
                synth_capless(p.ctx, p.term, ns_);
            } catch (const CheckError& e) {
                return error(e.diag(), exit_code::TypeError);
            }
        }
        ordered_json j;
        if (opts_.check_soundness) {
            SoundnessReport s = check_soundness(p.ctx, p.term, opts_.fuel, ns_);
            std::string verdict = s.ok() ? "ok" : "violated";
            std::string end = s.reached_answer ? "answer"
                              : s.out_of_fuel  ? "out-of-fuel"
                              : s.open_redex   ? "blocked"
                                               : std::string("stuck (") + stuck_reason_name(s.final_reason) + ")";
            if (opts_.json) {
                j["ok"] = s.ok();
                j["soundness"] = {{"verdict", verdict},
                                  {"steps", s.steps},
                                  {"end", end},
                                  {"preservation_violations", s.preservation_violations},
                                  {"progress_violations", s.progress_violations}};
                if (!s.first_violation.empty()) j["soundness"]["first_violation"] = s.first_violation;
                res_.out += j.dump(2) + "\n";
            } else {
                res_.out += "soundness: " + verdict + " (" + std::to_string(s.steps) + " steps, " + end + ", " +
                            std::to_string(s.preservation_violations) + " preservation / " +
                            std::to_string(s.progress_violations) + " progress violations)\n";
                if (!s.first_violation.empty()) res_.out += "first violation: " + s.first_violation + "\n";
            }
            res_.exit = s.ok() ? exit_code::Ok : exit_code::TypeError;
            return res_;
        }
        EvalResult r = eval(initial_machine(p.term), opts_.fuel, ns_, opts_.trace);
        std::string status;
        std::string answer;
        std::string value;
        switch (r.outcome) {
            case EvalResult::Outcome::Answer: {
                status = "answer";
                const Term& a = r.machine.focus;
                answer = print(a, &p.ctx);
                if (a->kind == TermKind::Var)
                    if (const Term* v = r.machine.lookup(a->x)) value = print(*v, &p.ctx);
                break;
            }
            case EvalResult::Outcome::Stuck: {
                bool open = r.reason == StuckReason::NoValue && p.ctx.has(r.machine.focus->x);
                status = open ? "blocked" : "stuck";
                answer = std::string(stuck_reason_name(r.reason)) + ": " + r.detail;
                // A stuck well-typed program is a soundness alarm; a call of an
                // assumed capability only means the program left the calculus.
                if (!open) res_.exit = exit_code::TypeError;
                break;
            }
            case EvalResult::Outcome::OutOfFuel:
                status = "out-of-fuel";
                answer = "after " + std::to_string(r.steps) + " steps";
                res_.exit = exit_code::OutOfFuel;
                break;
        }
        if (opts_.json) {
            j["ok"] = res_.exit == exit_code::Ok;
            j["status"] = status;
            j["result"] = answer;
            if (!value.empty()) j["value"] = value;
            j["steps"] = r.steps;
            if (opts_.trace) j["trace"] = r.trace;
            res_.out += j.dump(2) + "\n";
        } else {
            for (const auto& line : r.trace) res_.out += line + "\n";
            res_.out += status + ": " + answer + "\n";
            if (!value.empty()) res_.out += "value: " + value + "\n";
        }
        return res_;
    }

    CliResult translate(const Program& p) {
        if (p.dialect != Dialect::Reacap) return io_error("translate expects a Reacap program");
        TranslationReport rep;
        try {
            rep = verify_translation(p, ns_);
        } catch (const CheckError& e) {
            return error(e.diag(), exit_code::TypeError);
        }
        ordered_json side;
        side["source"] = opts_.path;
        side["source_type"] = rep.source_type;
        side["source_use"] = rep.source_use;
        side["encoded_type"] = rep.expected_type;
        side["output_type"] = rep.output_type;
        side["output_use"] = rep.output_use;
        side["alpha_equal"] = rep.alpha_equal;
        side["verified"] = rep.verified;
        if (rep.error) side["error"] = diag_json(*rep.error);
        res_.sidecar = side.dump(2) + "\n";
        if (rep.output.term) res_.translated = print_program(rep.output) + "\n";

        bool failed = rep.error && (opts_.verify || !rep.output.term);
        if (!failed && opts_.write_files) {
            std::string out = opts_.output;
            if (out.empty()) {
                out = opts_.path;
                auto dot = out.rfind('.');
                if (dot != std::string::npos && out.find('/', dot) == std::string::npos) out.resize(dot);
                out += ".cls";
            }
            std::ofstream f(out);
            std::ofstream s(out + ".report.json");
            if (!f || !s) return io_error("cannot write " + out);
            f << res_.translated;
            s << res_.sidecar;
        }
        if (failed) return error(*rep.error, exit_code::VerifyMismatch, side);
        if (opts_.json) {
            side["ok"] = true;
            side["output"] = res_.translated;
            res_.out += side.dump(2) + "\n";
        } else {
            res_.out += "source type: " + rep.source_type + "\n";
            res_.out += "encoded type: " + rep.expected_type + "\n";
            if (opts_.verify) {
                res_.out += "output type: " + rep.output_type + "\n";
                res_.out += std::string("verified: ") + (rep.verified ? "yes" : "no") +
                            (rep.alpha_equal ? " (alpha-equal)" : " (by subsumption)") + "\n";
            }
        }
        return res_;
    }

    const CliOptions& opts_;
    NameSupply ns_;
    CliResult res_;
};

}  // namespace

CliResult run_cli_source(const CliOptions& opts, std::string_view text) { return Run(opts).go(text); }

CliResult run_cli(const CliOptions& opts) {
    std::ifstream in(opts.path, std::ios::binary);
    if (!in) return Run(opts).io_error("cannot read " + opts.path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_cli_source(opts, buf.str());
}

}  // namespace capless
