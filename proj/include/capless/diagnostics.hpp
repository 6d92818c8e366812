#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capless/syntax.hpp"

namespace capless {

namespace code {
inline constexpr const char* Parse = "E-PARSE";
inline constexpr const char* NonMnfOperand = "E-NON-MNF-OPERAND";
inline constexpr const char* RuntimeForm = "E-RUNTIME-FORM";
inline constexpr const char* Io = "E-IO";
inline constexpr const char* UnboundVariable = "E-UNBOUND-VARIABLE";
inline constexpr const char* IllFormed = "E-ILL-FORMED";
inline constexpr const char* NotAFunction = "E-NOT-A-FUNCTION";
inline constexpr const char* ArgumentMismatch = "E-ARGUMENT-MISMATCH";
inline constexpr const char* BoundViolation = "E-BOUND-VIOLATION";
inline constexpr const char* AvoidanceFailure = "E-AVOIDANCE-FAILURE";
inline constexpr const char* ExistentialEscape = "E-EXISTENTIAL-ESCAPE";
inline constexpr const char* ExistentialInLet = "E-EXISTENTIAL-IN-LET";
inline constexpr const char* NotExistential = "E-NOT-EXISTENTIAL";
inline constexpr const char* PackMismatch = "E-PACK-MISMATCH";
inline constexpr const char* ScopeLeak = "E-SCOPE-LEAK";
inline constexpr const char* BoundaryResult = "E-BOUNDARY-RESULT";
inline constexpr const char* ReachEscape = "E-REACH-ESCAPE";
inline constexpr const char* CapInTypeArg = "E-CAP-IN-TYPE-ARG";
inline constexpr const char* UnboxUseMismatch = "E-UNBOX-USE-MISMATCH";
inline constexpr const char* CapUnbox = "E-CAP-UNBOX";
inline constexpr const char* NotABox = "E-NOT-A-BOX";
inline constexpr const char* UseMismatch = "E-USE-MISMATCH";
inline constexpr const char* CapInCovariantArg = "E-CAP-IN-COVARIANT-ARG";
inline constexpr const char* UnknownTypeDef = "E-UNKNOWN-TYPEDEF";
inline constexpr const char* Arity = "E-ARITY";
inline constexpr const char* TypeDefVariance = "E-TYPEDEF-VARIANCE";
inline constexpr const char* TypeDefCap = "E-TYPEDEF-CAP";
inline constexpr const char* UnmappedCapture = "E-UNMAPPED-CAPTURE";
inline constexpr const char* NotProper = "E-NOT-PROPER";
inline constexpr const char* TranslationMismatch = "E-TRANSLATION-MISMATCH";
inline constexpr const char* TranslationUnsupported = "E-TRANSLATION-UNSUPPORTED";
inline constexpr const char* IllTypedStore = "E-ILL-TYPED-STORE";
inline constexpr const char* Internal = "E-INTERNAL";
}  // namespace code

struct Diagnostic {
    std::string severity = "error";
    std::string code;
    std::string file;
    Span span;
    std::string message;
    std::optional<std::string> expected;
    std::optional<std::string> actual;
    std::optional<std::string> rule;
};

class CheckError : public std::runtime_error {
public:
    explicit CheckError(Diagnostic d) : std::runtime_error(d.message), diag_(std::move(d)) {}
    const Diagnostic& diag() const { return diag_; }

private:
    Diagnostic diag_;
};

[[noreturn]] inline void fail(const char* c, std::string msg, Span sp = {},
                              std::optional<std::string> rule = std::nullopt,
                              std::optional<std::string> expected = std::nullopt,
                              std::optional<std::string> actual = std::nullopt) {
    Diagnostic d;
    d.code = c;
    d.message = std::move(msg);
    d.span = sp;
    d.rule = std::move(rule);
    d.expected = std::move(expected);
    d.actual = std::move(actual);
    throw CheckError(std::move(d));
}

}  // namespace capless
