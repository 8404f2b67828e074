#include "scenarioforge/event_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace scenarioforge {

std::string SourceLoc::to_string() const {
    std::string out = file.empty() ? std::string("<input>") : file;
    out += ':' + std::to_string(line) + ':' + std::to_string(col);
    return out;
}

std::string_view to_string(ObjectKind kind) {
    return kind == ObjectKind::External ? "External" : "UnderSpecification";
}

std::string_view to_string(ParamKind kind) {
    switch (kind) {
        case ParamKind::Text: return "text";
        case ParamKind::Number: return "number";
        case ParamKind::Boolean: return "boolean";
    }
    return "text";
}

std::optional<ObjectKind> parse_object_kind(std::string_view text) {
    if (text == "External" || text == "external") return ObjectKind::External;
    if (text == "UnderSpecification" || text == "underSpecification" || text == "internal")
        return ObjectKind::UnderSpecification;
    return std::nullopt;
}

std::optional<ParamKind> parse_param_kind(std::string_view text) {
    if (text == "text" || text == "string") return ParamKind::Text;
    if (text == "number" || text == "double") return ParamKind::Number;
    if (text == "boolean" || text == "bool") return ParamKind::Boolean;
    return std::nullopt;
}

ParamKind ParamValue::kind() const {
    if (is_text()) return ParamKind::Text;
    if (is_number()) return ParamKind::Number;
    if (is_boolean()) return ParamKind::Boolean;
    throw Error("WildcardHasNoKind", "wildcard parameter has no kind");
}

bool ParamValue::same_value(const ParamValue& other) const {
    if (value_.index() != other.value_.index()) return false;
    if (is_number()) return std::fabs(as_number() - other.as_number()) <= kNumericTolerance;
    return value_ == other.value_;
}

std::string render_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    std::string out(buf, end);
    if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
    return out;
}

std::string quote_text(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string ParamValue::render() const {
    if (is_wildcard()) return "*";
    if (is_text()) return quote_text(as_text());
    if (is_number()) return render_number(as_number());
    return as_boolean() ? "true" : "false";
}

ParamValue ParamValue::default_for(ParamKind kind) {
    switch (kind) {
        case ParamKind::Text: return text("");
        case ParamKind::Number: return number(0.0);
        case ParamKind::Boolean: return boolean(false);
    }
    return text("");
}

void Declarations::add_object(ObjectDecl decl) {
    if (find_object(decl.name))
        throw Error("DuplicateObject", "object '" + decl.name + "' declared twice");
    objects_.push_back(std::move(decl));
}

void Declarations::add_message(MessageDecl decl) {
    if (find_message(decl.name))
        throw Error("DuplicateMessage", "message '" + decl.name + "' declared twice");
    messages_.push_back(std::move(decl));
}

const ObjectDecl* Declarations::find_object(std::string_view name) const {
    auto it = std::find_if(objects_.begin(), objects_.end(),
                           [&](const ObjectDecl& d) { return d.name == name; });
    return it == objects_.end() ? nullptr : &*it;
}

const MessageDecl* Declarations::find_message(std::string_view name) const {
    auto it = std::find_if(messages_.begin(), messages_.end(),
                           [&](const MessageDecl& d) { return d.name == name; });
    return it == messages_.end() ? nullptr : &*it;
}

namespace {

std::string render_params(const std::vector<ParamValue>& params) {
    std::string out = "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].render();
    }
    return out + ")";
}

}  // namespace

bool MessageEvent::has_wildcard() const {
    return std::any_of(params.begin(), params.end(),
                       [](const ParamValue& p) { return p.is_wildcard(); });
}

std::string MessageEvent::render() const {
    return sender + " -> " + receiver + "." + message + render_params(params);
}

EventPattern EventPattern::exact(const MessageEvent& event) {
    return EventPattern{event.sender, event.receiver, event.message, event.params};
}

std::string EventPattern::render() const {
    return sender.value_or("*") + " -> " + receiver.value_or("*") + "." + message +
           render_params(params);
}

bool matches(const EventPattern& pattern, const MessageEvent& event) {
    if (pattern.message != event.message) return false;
    if (pattern.params.size() != event.params.size())
        throw Error("ArityMismatch", "message '" + event.message + "' used with " +
                                         std::to_string(pattern.params.size()) + " and " +
                                         std::to_string(event.params.size()) + " parameters");
    if (pattern.sender && *pattern.sender != event.sender) return false;
    if (pattern.receiver && *pattern.receiver != event.receiver) return false;
    for (std::size_t i = 0; i < pattern.params.size(); ++i) {
        const ParamValue& p = pattern.params[i];
        if (p.is_wildcard()) continue;
        if (!p.same_value(event.params[i])) return false;
    }
    return true;
}

void check_concrete_event(const MessageEvent& event, const Declarations& decls) {
    const MessageDecl* decl = decls.find_message(event.message);
    if (!decl || !decls.find_object(event.sender) || !decls.find_object(event.receiver))
        throw Error("UndeclaredEvent", "event " + event.render() + " is not declared");
    if (event.params.size() != decl->arity())
        throw Error("ArityMismatch", "message '" + event.message + "' expects " +
                                         std::to_string(decl->arity()) + " parameters");
    for (std::size_t i = 0; i < event.params.size(); ++i) {
        const ParamValue& p = event.params[i];
        if (p.is_wildcard())
            throw Error("WildcardInExternalEvent",
                        "event " + event.render() + " contains a wildcard parameter");
        if (p.kind() != decl->params[i])
            throw Error("TypeMismatch", "parameter " + std::to_string(i) + " of '" +
                                            event.message + "' must be " +
                                            std::string(to_string(decl->params[i])));
    }
}

}  // namespace scenarioforge
