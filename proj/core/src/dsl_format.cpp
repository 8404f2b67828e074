#include <algorithm>

#include "scenarioforge/dsl.hpp"

namespace scenarioforge {

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "==";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "==";
}

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::InterComponent: return "intercomponent";
        case ScenarioKind::Component: return "component";
        case ScenarioKind::Test: return "test";
    }
    return "intercomponent";
}

std::string_view to_string(Directive::Kind kind) {
    switch (kind) {
        case Directive::Kind::Trigger: return "trigger";
        case Directive::Kind::Receive: return "receive";
        case Directive::Kind::Eventually: return "eventually";
    }
    return "trigger";
}

bool EventTemplate::has_wildcard() const {
    return !sender || !receiver ||
           std::any_of(args.begin(), args.end(),
                       [](const TemplateArg& a) { return a.kind == TemplateArg::Kind::Wildcard; });
}

namespace {

std::string render_arg(const TemplateArg& arg) {
    switch (arg.kind) {
        case TemplateArg::Kind::Wildcard: return "*";
        case TemplateArg::Kind::Literal: return arg.literal.render();
        case TemplateArg::Kind::Variable: return arg.variable;
    }
    return "*";
}

std::string render_operand(const Operand& op) {
    return op.is_variable ? op.variable : op.literal.render();
}

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void format_body(std::string& out, const std::vector<Statement>& body, int depth);

void format_statement(std::string& out, const Statement& st, int depth) {
    indent(out, depth);
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, RequestStmt>) {
                out += node.flexible ? "requestFlex " : "request ";
                out += node.event.render();
            } else if constexpr (std::is_same_v<T, WaitForStmt>) {
                out += "waitFor " + node.pattern.render();
            } else if constexpr (std::is_same_v<T, BlockStmt>) {
                out += "block " + node.pattern.render();
                if (node.until) out += " until " + node.until->render();
            } else if constexpr (std::is_same_v<T, BindStmt>) {
                out += "bind " + node.variable + " = param " + std::to_string(node.param_index);
            } else if constexpr (std::is_same_v<T, SetStmt>) {
                out += "set " + node.variable + " = " + render_operand(node.value);
            } else if constexpr (std::is_same_v<T, GuardStmt>) {
                out += "when " + format_condition(node.condition) + " {\n";
                format_body(out, node.then_body, depth + 1);
                indent(out, depth);
                out += "}";
                if (!node.else_body.empty()) {
                    out += " otherwise {\n";
                    format_body(out, node.else_body, depth + 1);
                    indent(out, depth);
                    out += "}";
                }
            }
        },
        st.node);
    out += '\n';
}

void format_body(std::string& out, const std::vector<Statement>& body, int depth) {
    for (const Statement& st : body) format_statement(out, st, depth);
}

// Children of and/or are parenthesized whenever they are themselves and/or,
// which keeps the tree shape exact on reparse.
std::string format_child(const Condition& c) {
    if (c.kind == Condition::Kind::And || c.kind == Condition::Kind::Or)
        return "(" + format_condition(c) + ")";
    return format_condition(c);
}

}  // namespace

std::string EventTemplate::render() const {
    std::string out = sender.value_or("*") + " -> " + receiver.value_or("*") + "." + message + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += render_arg(args[i]);
    }
    return out + ")";
}

std::string format_condition(const Condition& c) {
    switch (c.kind) {
        case Condition::Kind::Compare:
            return render_operand(c.lhs) + " " + std::string(to_string(c.op)) + " " +
                   render_operand(c.rhs);
        case Condition::Kind::Not:
            return "not (" + format_condition(c.children.at(0)) + ")";
        case Condition::Kind::And:
        case Condition::Kind::Or: {
            std::string sep = c.kind == Condition::Kind::And ? " and " : " or ";
            std::string out;
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) out += sep;
                out += format_child(c.children[i]);
            }
            return out;
        }
    }
    return {};
}

std::string format_scenario(const ScenarioDef& def) {
    std::string out;
    if (def.kind != ScenarioKind::InterComponent) out += std::string(to_string(def.kind)) + " ";
    out += "scenario " + def.id;
    if (def.trigger) out += " on " + def.trigger->render();
    out += " {\n";
    if (def.label) out += "  label " + quote_text(*def.label) + "\n";
    format_body(out, def.body, 1);
    out += "}\n";
    return out;
}

std::string format_test(const TestSpec& spec) {
    std::string out = "test " + spec.id;
    if (!spec.name.empty()) out += " " + quote_text(spec.name);
    out += " {\n";
    for (const Directive& d : spec.directives)
        out += "  " + std::string(to_string(d.kind)) + " " + d.event.render() + "\n";
    out += "}\n";
    return out;
}

}  // namespace scenarioforge
