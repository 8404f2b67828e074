#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scenarioforge/event_model.hpp"

namespace scenarioforge {

// ---------------------------------------------------------------------------
// Scenario source AST
//
// Every node compares structurally; source locations are carried alongside
// but never take part in equality, so `parse(format(d)) == d` holds.
// ---------------------------------------------------------------------------

/// One argument slot of an event template: `*`, a literal, or a variable.
struct TemplateArg {
    enum class Kind { Wildcard, Literal, Variable };
    Kind kind = Kind::Wildcard;
    ParamValue literal;
    std::string variable;

    static TemplateArg wildcard() { return {}; }
    static TemplateArg value(ParamValue v) { return {Kind::Literal, std::move(v), {}}; }
    static TemplateArg var(std::string name) { return {Kind::Variable, {}, std::move(name)}; }

    friend bool operator==(const TemplateArg&, const TemplateArg&) = default;
};

/// `sender -> receiver.message(args)`; sender/receiver may be `*` (nullopt).
struct EventTemplate {
    std::optional<std::string> sender;
    std::optional<std::string> receiver;
    std::string message;
    std::vector<TemplateArg> args;

    bool has_wildcard() const;
    std::string render() const;

    friend bool operator==(const EventTemplate&, const EventTemplate&) = default;
};

/// Operand of a comparison: a literal or a bound variable.
struct Operand {
    bool is_variable = false;
    ParamValue literal;
    std::string variable;

    friend bool operator==(const Operand&, const Operand&) = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

/// Boolean combination of comparisons. And/Or carry >= 2 children, Not one.
struct Condition {
    enum class Kind { Compare, And, Or, Not };
    Kind kind = Kind::Compare;
    CompareOp op = CompareOp::Eq;
    Operand lhs;
    Operand rhs;
    std::vector<Condition> children;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct Statement;

struct RequestStmt {
    EventTemplate event;
    bool flexible = false;
    friend bool operator==(const RequestStmt&, const RequestStmt&) = default;
};

struct WaitForStmt {
    EventTemplate pattern;
    friend bool operator==(const WaitForStmt&, const WaitForStmt&) = default;
};

/// `block P` forbids P until the scenario ends; `block P until Q` is a
/// synchronization point that forbids P while waiting for Q.
struct BlockStmt {
    EventTemplate pattern;
    std::optional<EventTemplate> until;
    friend bool operator==(const BlockStmt&, const BlockStmt&) = default;
};

struct BindStmt {
    std::string variable;
    std::size_t param_index = 0;
    friend bool operator==(const BindStmt&, const BindStmt&) = default;
};

struct SetStmt {
    std::string variable;
    Operand value;
    friend bool operator==(const SetStmt&, const SetStmt&) = default;
};

struct GuardStmt {
    Condition condition;
    std::vector<Statement> then_body;
    std::vector<Statement> else_body;
};
bool operator==(const GuardStmt& a, const GuardStmt& b);

struct Statement {
    using Node = std::variant<RequestStmt, WaitForStmt, BlockStmt, BindStmt, SetStmt, GuardStmt>;
    Node node;
    SourceLoc loc;

    friend bool operator==(const Statement& a, const Statement& b) { return a.node == b.node; }
};

enum class ScenarioKind { InterComponent, Component, Test };
std::string_view to_string(ScenarioKind kind);

struct ScenarioDef {
    std::string id;
    ScenarioKind kind = ScenarioKind::InterComponent;
    std::optional<EventTemplate> trigger;
    std::optional<std::string> label;
    std::vector<Statement> body;
    SourceLoc loc;

    friend bool operator==(const ScenarioDef& a, const ScenarioDef& b) {
        return a.id == b.id && a.kind == b.kind && a.trigger == b.trigger &&
               a.label == b.label && a.body == b.body;
    }
};

// ---------------------------------------------------------------------------
// Directive tests (trigger / receive / eventually)
// ---------------------------------------------------------------------------

struct Directive {
    enum class Kind { Trigger, Receive, Eventually };
    Kind kind = Kind::Trigger;
    EventTemplate event;
    SourceLoc loc;

    friend bool operator==(const Directive& a, const Directive& b) {
        return a.kind == b.kind && a.event == b.event;
    }
};
std::string_view to_string(Directive::Kind kind);

struct TestSpec {
    std::string id;
    std::string name;
    std::vector<Directive> directives;
    SourceLoc loc;

    friend bool operator==(const TestSpec& a, const TestSpec& b) {
        return a.id == b.id && a.name == b.name && a.directives == b.directives;
    }
};

struct SourceFile {
    std::vector<ScenarioDef> scenarios;
    std::vector<TestSpec> tests;
};

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    SourceLoc loc;
    std::string code;
    std::string message;

    std::string to_string() const;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Thrown when a program is loaded despite Error diagnostics.
class InvalidProgram : public Error {
public:
    explicit InvalidProgram(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses a `.scn` document. Throws SyntaxError on malformed input.
SourceFile parse_source(std::string_view text, std::string file_name = {});
std::vector<ScenarioDef> parse_scenario_source(std::string_view text, std::string file_name = {});

/// Parses a standalone event template such as `a -> b.m("x", *)`.
EventTemplate parse_event_template(std::string_view text);

/// Canonical source text; parse(format(d)) == d.
std::string format_scenario(const ScenarioDef& def);
std::string format_test(const TestSpec& spec);
std::string format_condition(const Condition& condition);

/// Static checks against the declarations: undeclared objects/messages,
/// arity and literal kind mismatches, unbound variables, duplicate ids,
/// missing triggers/labels, wildcard rigid requests. Emits UnreachableTrigger
/// warnings for triggers that nothing can ever emit.
std::vector<Diagnostic> validate_program(const std::vector<ScenarioDef>& defs,
                                         const Declarations& decls);

/// Checks a directive test: non-empty, starts with a trigger, concrete
/// declared trigger events, declared receive/eventually patterns.
std::vector<Diagnostic> validate_test(const TestSpec& spec, const Declarations& decls);

/// Reserved words that cannot be used as identifiers in scenario sources.
bool is_reserved_word(std::string_view word);

}  // namespace scenarioforge
