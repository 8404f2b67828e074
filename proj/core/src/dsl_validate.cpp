#include <algorithm>
#include <set>

#include "scenarioforge/dsl.hpp"

namespace scenarioforge {

std::string Diagnostic::to_string() const {
    return loc.to_string() + ": " + (severity == Severity::Error ? "error" : "warning") + " [" +
           code + "] " + message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
        return d.severity == Diagnostic::Severity::Error;
    });
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
    std::string out = "invalid program";
    for (const Diagnostic& d : diagnostics) {
        if (d.severity != Diagnostic::Severity::Error) continue;
        out += "\n  " + d.to_string();
    }
    return out;
}

using Bound = std::set<std::string>;

class Validator {
public:
    Validator(const Declarations& decls, std::vector<Diagnostic>& out) : decls_(decls), out_(out) {}

    void error(const SourceLoc& loc, std::string code, std::string message) {
        out_.push_back({Diagnostic::Severity::Error, loc, std::move(code), std::move(message)});
    }
    void warning(const SourceLoc& loc, std::string code, std::string message) {
        out_.push_back({Diagnostic::Severity::Warning, loc, std::move(code), std::move(message)});
    }

    void check_operand(const Operand& op, const Bound& bound, const SourceLoc& loc) {
        if (op.is_variable && !bound.count(op.variable))
            error(loc, "UnboundVariable", "variable '" + op.variable + "' is not bound");
    }

    void check_condition(const Condition& c, const Bound& bound, const SourceLoc& loc) {
        if (c.kind == Condition::Kind::Compare) {
            check_operand(c.lhs, bound, loc);
            check_operand(c.rhs, bound, loc);
            return;
        }
        for (const Condition& child : c.children) check_condition(child, bound, loc);
    }

    void check_template(const EventTemplate& t, const Bound& bound, const SourceLoc& loc) {
        for (const auto& endpoint : {t.sender, t.receiver}) {
            if (endpoint && !decls_.find_object(*endpoint))
                error(loc, "UndeclaredObject", "object '" + *endpoint + "' is not declared");
        }
        const MessageDecl* decl = decls_.find_message(t.message);
        if (!decl) {
            error(loc, "UndeclaredMessage", "message '" + t.message + "' is not declared");
        } else if (decl->arity() != t.args.size()) {
            error(loc, "ArityMismatch",
                  "message '" + t.message + "' expects " + std::to_string(decl->arity()) +
                      " parameters, got " + std::to_string(t.args.size()));
        } else {
            for (std::size_t i = 0; i < t.args.size(); ++i) {
                const TemplateArg& a = t.args[i];
                if (a.kind == TemplateArg::Kind::Literal && a.literal.kind() != decl->params[i])
                    error(loc, "TypeMismatch",
                          "parameter " + std::to_string(i) + " of '" + t.message + "' must be " +
                              std::string(to_string(decl->params[i])));
            }
        }
        for (const TemplateArg& a : t.args) {
            if (a.kind == TemplateArg::Kind::Variable && !bound.count(a.variable))
                error(loc, "UnboundVariable", "variable '" + a.variable + "' is not bound");
        }
    }

    void check_body(const ScenarioDef& def, const std::vector<Statement>& body, Bound& bound) {
        for (const Statement& st : body) {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, RequestStmt>) {
                        check_template(node.event, bound, st.loc);
                        if (!node.event.sender || !node.event.receiver)
                            error(st.loc, "WildcardInRequest",
                                  "requested events need a concrete sender and receiver");
                        else if (!node.flexible && node.event.has_wildcard())
                            error(st.loc, "WildcardInRequest",
                                  "request with '*' parameters must use requestFlex");
                    } else if constexpr (std::is_same_v<T, WaitForStmt>) {
                        check_template(node.pattern, bound, st.loc);
                    } else if constexpr (std::is_same_v<T, BlockStmt>) {
                        check_template(node.pattern, bound, st.loc);
                        if (node.until) check_template(*node.until, bound, st.loc);
                    } else if constexpr (std::is_same_v<T, BindStmt>) {
                        if (!def.trigger) {
                            error(st.loc, "BindWithoutTrigger",
                                  "bind needs a trigger event to read parameters from");
                        } else if (node.param_index >= def.trigger->args.size()) {
                            error(st.loc, "ParamIndexOutOfRange",
                                  "trigger has no parameter " + std::to_string(node.param_index));
                        }
                        bound.insert(node.variable);
                    } else if constexpr (std::is_same_v<T, SetStmt>) {
                        check_operand(node.value, bound, st.loc);
                        bound.insert(node.variable);
                    } else if constexpr (std::is_same_v<T, GuardStmt>) {
                        check_condition(node.condition, bound, st.loc);
                        Bound then_bound = bound;
                        Bound else_bound = bound;
                        check_body(def, node.then_body, then_bound);
                        check_body(def, node.else_body, else_bound);
                        Bound merged;
                        std::set_intersection(then_bound.begin(), then_bound.end(),
                                              else_bound.begin(), else_bound.end(),
                                              std::inserter(merged, merged.end()));
                        bound = std::move(merged);
                    }
                },
                st.node);
        }
    }

private:
    const Declarations& decls_;
    std::vector<Diagnostic>& out_;
};

void collect_requests(const std::vector<Statement>& body, std::vector<const EventTemplate*>& out) {
    for (const Statement& st : body) {
        if (const auto* r = std::get_if<RequestStmt>(&st.node)) out.push_back(&r->event);
        if (const auto* g = std::get_if<GuardStmt>(&st.node)) {
            collect_requests(g->then_body, out);
            collect_requests(g->else_body, out);
        }
    }
}

bool endpoint_compatible(const std::optional<std::string>& a, const std::optional<std::string>& b) {
    return !a || !b || *a == *b;
}

}  // namespace

InvalidProgram::InvalidProgram(std::vector<Diagnostic> diagnostics)
    : Error("InvalidProgram", summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate_program(const std::vector<ScenarioDef>& defs,
                                         const Declarations& decls) {
    std::vector<Diagnostic> out;
    Validator v(decls, out);
    std::set<std::string> ids;
    for (const ScenarioDef& def : defs) {
        if (!ids.insert(def.id).second)
            v.error(def.loc, "DuplicateScenario", "scenario '" + def.id + "' is defined twice");
        if (def.kind == ScenarioKind::Test && !def.label)
            v.error(def.loc, "MissingLabel", "test scenario '" + def.id + "' needs a label");
        if (def.kind != ScenarioKind::Test && !def.trigger)
            v.error(def.loc, "MissingTrigger", "scenario '" + def.id + "' needs an 'on' trigger");
        Bound bound;
        if (def.trigger) v.check_template(*def.trigger, bound, def.loc);
        v.check_body(def, def.body, bound);
    }

    std::vector<const EventTemplate*> requests;
    for (const ScenarioDef& def : defs) collect_requests(def.body, requests);
    for (const ScenarioDef& def : defs) {
        if (!def.trigger) continue;
        const EventTemplate& t = *def.trigger;
        if (!t.sender) continue;
        const ObjectDecl* sender = decls.find_object(*t.sender);
        if (!sender || sender->kind == ObjectKind::External) continue;
        bool emitted = std::any_of(requests.begin(), requests.end(), [&](const EventTemplate* r) {
            return r->message == t.message && endpoint_compatible(r->sender, t.sender) &&
                   endpoint_compatible(r->receiver, t.receiver);
        });
        if (!emitted)
            v.warning(def.loc, "UnreachableTrigger",
                      "no scenario requests " + t.render() + " and its sender is not external");
    }
    return out;
}

std::vector<Diagnostic> validate_test(const TestSpec& spec, const Declarations& decls) {
    std::vector<Diagnostic> out;
    Validator v(decls, out);
    if (spec.directives.empty()) {
        v.error(spec.loc, "EmptyTest", "test '" + spec.id + "' has no directives");
        return out;
    }
    if (spec.directives.front().kind != Directive::Kind::Trigger)
        v.error(spec.directives.front().loc, "FirstDirectiveNotTrigger",
                "test '" + spec.id + "' must start with a trigger");
    Bound none;
    for (const Directive& d : spec.directives) {
        v.check_template(d.event, none, d.loc);
        if (d.kind == Directive::Kind::Trigger && d.event.has_wildcard())
            v.error(d.loc, "WildcardInExternalEvent", "trigger events must be fully concrete");
    }
    return out;
}

}  // namespace scenarioforge
