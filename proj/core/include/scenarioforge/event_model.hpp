#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scenarioforge/error.hpp"

namespace scenarioforge {

enum class ObjectKind { UnderSpecification, External };

enum class ParamKind { Text, Number, Boolean };

std::string_view to_string(ObjectKind kind);
std::string_view to_string(ParamKind kind);
std::optional<ObjectKind> parse_object_kind(std::string_view text);
std::optional<ParamKind> parse_param_kind(std::string_view text);

/// Absolute tolerance used whenever two numeric parameters are compared.
inline constexpr double kNumericTolerance = 1e-9;

/// A parameter value: a concrete text, number or boolean, or the "*" wildcard.
class ParamValue {
public:
    ParamValue() = default;  // wildcard

    static ParamValue wildcard() { return ParamValue{}; }
    static ParamValue text(std::string value) { return ParamValue{Storage{std::move(value)}}; }
    static ParamValue number(double value) { return ParamValue{Storage{value}}; }
    static ParamValue boolean(bool value) { return ParamValue{Storage{value}}; }

    bool is_wildcard() const noexcept { return std::holds_alternative<std::monostate>(value_); }
    bool is_text() const noexcept { return std::holds_alternative<std::string>(value_); }
    bool is_number() const noexcept { return std::holds_alternative<double>(value_); }
    bool is_boolean() const noexcept { return std::holds_alternative<bool>(value_); }

    const std::string& as_text() const { return std::get<std::string>(value_); }
    double as_number() const { return std::get<double>(value_); }
    bool as_boolean() const { return std::get<bool>(value_); }

    /// Kind of a concrete value. Must not be called on a wildcard.
    ParamKind kind() const;

    /// Value equality with the numeric tolerance applied. Wildcards are only
    /// equal to wildcards; values of different kinds are never equal.
    bool same_value(const ParamValue& other) const;

    /// Exact structural equality (no tolerance), used for AST comparisons.
    friend bool operator==(const ParamValue&, const ParamValue&) = default;

    /// Source rendering: `*`, `"escaped text"`, `3.0`, `true`.
    std::string render() const;

    /// The declared default for a parameter kind: "", 0.0 or false.
    static ParamValue default_for(ParamKind kind);

private:
    using Storage = std::variant<std::monostate, std::string, double, bool>;
    explicit ParamValue(Storage value) : value_(std::move(value)) {}
    Storage value_;
};

/// Render a double so that it reads back as a number: shortest round-trip
/// form, always carrying a decimal point or exponent.
std::string render_number(double value);
std::string quote_text(std::string_view text);

struct ObjectDecl {
    std::string name;
    ObjectKind kind = ObjectKind::UnderSpecification;
};

struct MessageDecl {
    std::string name;
    std::vector<ParamKind> params;

    std::size_t arity() const noexcept { return params.size(); }
};

/// Object and message declarations of a project.
class Declarations {
public:
    void add_object(ObjectDecl decl);
    void add_message(MessageDecl decl);

    const ObjectDecl* find_object(std::string_view name) const;
    const MessageDecl* find_message(std::string_view name) const;

    const std::vector<ObjectDecl>& objects() const noexcept { return objects_; }
    const std::vector<MessageDecl>& messages() const noexcept { return messages_; }

private:
    std::vector<ObjectDecl> objects_;
    std::vector<MessageDecl> messages_;
};

/// A directed message between two named objects.
struct MessageEvent {
    std::string sender;
    std::string receiver;
    std::string message;
    std::vector<ParamValue> params;

    bool has_wildcard() const;
    /// `sender -> receiver.message(p, ...)`
    std::string render() const;

    friend bool operator==(const MessageEvent&, const MessageEvent&) = default;
};

/// Pattern over events. An empty sender/receiver is a wildcard.
struct EventPattern {
    std::optional<std::string> sender;
    std::optional<std::string> receiver;
    std::string message;
    std::vector<ParamValue> params;

    static EventPattern exact(const MessageEvent& event);
    std::string render() const;

    friend bool operator==(const EventPattern&, const EventPattern&) = default;
};

/// True iff message names are equal, sender and receiver are equal or
/// wildcarded, and every parameter position is equal or wildcarded.
/// Throws Error("ArityMismatch") when names agree but parameter counts differ.
bool matches(const EventPattern& pattern, const MessageEvent& event);

/// Checks a concrete event against the declarations. Throws
/// Error("UndeclaredEvent"), Error("WildcardInExternalEvent"),
/// Error("ArityMismatch") or Error("TypeMismatch").
void check_concrete_event(const MessageEvent& event, const Declarations& decls);

}  // namespace scenarioforge
