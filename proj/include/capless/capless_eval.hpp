#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "capless/capless_check.hpp"
#include "capless/context.hpp"
#include "capless/syntax.hpp"

namespace capless {

struct StoreEntry {
    Name name;
    Term value;
};

struct Frame {
    enum class Kind { Let, LetEx, Scope } kind = Kind::Let;
    Name x;       // Let/LetEx term binder, Scope label
    Name c;       // LetEx capture binder
    Term body;    // Let/LetEx continuation
    Shape shape;  // Scope result shape
};

// <store | E[focus]> with E kept as a frame stack, innermost last.
struct Machine {
    std::vector<StoreEntry> store;
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<Frame> frames;
    Term focus;
    std::vector<std::pair<Name, Shape>> labels;

    const Term* lookup(const Name& x) const;
    bool is_label(const Name& x) const;
};

Machine initial_machine(const Term& t);

// The whole program term E[focus].
Term plug(const Machine& m);

enum class StuckReason { None, NoValue, NotAFunction, ScopeExtrusion, BadUnpack };
const char* stuck_reason_name(StuckReason r);

struct StepResult {
    enum class Status { Stepped, AtAnswer, Stuck } status = Status::Stepped;
    std::string rule;
    std::string redex;
    StuckReason reason = StuckReason::None;
    std::string detail;
};

StepResult step(Machine& m, NameSupply& ns);

struct EvalResult {
    enum class Outcome { Answer, Stuck, OutOfFuel } outcome = Outcome::Answer;
    Machine machine;
    long steps = 0;
    std::vector<std::string> trace;  // "step N: <rule> | <redex>"
    StuckReason reason = StuckReason::None;
    std::string detail;
};

inline constexpr long kDefaultFuel = 100000;

EvalResult eval(Machine m, long fuel, NameSupply& ns, bool trace = false);

// Types every store value in order under base, labels first. Throws E-ILL-TYPED-STORE.
Context store_typing(const Context& base, const Machine& m, NameSupply& ns);

struct SoundnessReport {
    long steps = 0;
    int preservation_violations = 0;
    int progress_violations = 0;
    bool reached_answer = false;
    bool out_of_fuel = false;
    bool open_redex = false;  // stopped at a call of an assumed capability
    StuckReason final_reason = StuckReason::None;
    std::string first_violation;

    bool ok() const { return preservation_violations == 0 && progress_violations == 0; }
};

struct SoundnessOptions {
    bool preservation = true;
    bool progress = true;
    // Test hook run before each step; lets tests corrupt a state on purpose.
    std::function<void(Machine&, long)> tamper;
};

// Runs the program under ctx, re-typing every reached state.
SoundnessReport check_soundness(const Context& ctx, const Term& t, long fuel, NameSupply& ns,
                                const SoundnessOptions& opts = {});
SoundnessReport check_preservation(const Context& ctx, const Term& t, long fuel, NameSupply& ns);
SoundnessReport check_progress(const Context& ctx, const Term& t, long fuel, NameSupply& ns);

}  // namespace capless
