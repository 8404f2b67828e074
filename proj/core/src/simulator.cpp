#include "scenarioforge/simulator.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace scenarioforge::sim {

std::string_view to_string(Mode mode) { return mode == Mode::Manual ? "manual" : "auto"; }

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "manual" || text == "Manual") return Mode::Manual;
    if (text == "auto" || text == "Auto") return Mode::Auto;
    return std::nullopt;
}

Driver resolve_driver(const Project& project, const std::string& name) {
    Driver d;
    if (name == "none") return d;
    if (name.empty()) {
        if (project.features.empty()) return d;
        d.kind = Driver::Kind::Directives;
        d.directives = gherkin::compile_scenario(project.features.front(), 0, project.bindings);
        return d;
    }
    for (const TestSpec& t : project.tests) {
        if (t.id == name) {
            d.kind = Driver::Kind::Directives;
            d.directives = t;
            return d;
        }
    }
    for (const gherkin::FeatureDoc& f : project.features) {
        for (std::size_t i = 0; i < f.scenarios.size(); ++i) {
            if (f.name + "/" + f.scenarios[i].name == name) {
                d.kind = Driver::Kind::Directives;
                d.directives = gherkin::compile_scenario(f, i, project.bindings);
                return d;
            }
        }
    }
    for (const ScenarioDef& s : project.test_scenarios) {
        if (s.id == name) {
            d.kind = Driver::Kind::TestScenario;
            d.scenario = s;
            return d;
        }
    }
    throw Error("UnknownDriver", "no test, feature scenario or test scenario named '" + name + "'");
}

namespace {

Program with_driver(Program program, const Driver& driver) {
    switch (driver.kind) {
        case Driver::Kind::None:
            break;
        case Driver::Kind::Directives:
            for (const Directive& d : driver.directives.directives) {
                if (d.kind != Directive::Kind::Trigger) continue;
                if (d.event.has_wildcard() || !d.event.sender || !d.event.receiver)
                    throw Error("WildcardInExternalEvent", "trigger " + d.event.render() + " is not concrete");
                MessageEvent e{*d.event.sender, *d.event.receiver, d.event.message, {}};
                for (const TemplateArg& a : d.event.args) {
                    if (a.kind != TemplateArg::Kind::Literal)
                        throw Error("WildcardInExternalEvent", "trigger " + d.event.render() + " is not concrete");
                    e.params.push_back(a.literal);
                }
                program.post_external(std::move(e));
            }
            break;
        case Driver::Kind::TestScenario: {
            std::size_t index = program.add_scenario(driver.scenario);
            program.start_scenario(index);
            break;
        }
    }
    return program;
}

std::vector<InstanceState> changed_states(const std::vector<InstanceState>& before,
                                          const std::vector<InstanceState>& after) {
    std::vector<InstanceState> out;
    for (const InstanceState& s : after) {
        auto it = std::find_if(before.begin(), before.end(),
                               [&](const InstanceState& b) { return b.instance == s.instance; });
        if (it == before.end() || !(*it == s)) out.push_back(s);
    }
    return out;
}

}  // namespace

SimSession::SimSession(std::string id, Program program, Mode mode, Driver driver)
    : id_(std::move(id)),
      mode_(mode),
      initial_(with_driver(std::move(program), driver)),
      program_(initial_) {}

std::uint64_t SimSession::revision() const {
    std::lock_guard lock(mutex_);
    return revision_;
}

std::vector<EnabledEvent> SimSession::enabled_locked() const {
    std::vector<EnabledEvent> out;
    std::vector<Choice> choices = program_.choices();
    for (std::size_t i = 0; i < choices.size(); ++i) {
        Choice& c = choices[i];
        out.push_back({"e" + std::to_string(i), std::move(c.event), c.external, std::move(c.requesters),
                       std::move(c.blocked_by)});
    }
    return out;
}

std::pair<std::uint64_t, std::vector<EnabledEvent>> SimSession::enabled_events() const {
    std::lock_guard lock(mutex_);
    return {revision_, enabled_locked()};
}

Snapshot SimSession::snapshot() const {
    std::lock_guard lock(mutex_);
    return {revision_, enabled_locked(), program_.scenario_states(), program_.trace()};
}

StepResult SimSession::step(std::uint64_t revision, const std::string& event_id) {
    std::lock_guard lock(mutex_);
    if (revision != revision_)
        throw Error("StaleRevision", "session " + id_ + " is at revision " + std::to_string(revision_) +
                                         ", request was for " + std::to_string(revision));
    std::vector<Choice> choices = program_.choices();
    const Choice* chosen = nullptr;
    if (event_id.empty() || event_id == "auto") {
        auto it = std::find_if(choices.begin(), choices.end(), [](const Choice& c) { return c.selectable(); });
        if (it == choices.end()) throw Error("NotEnabled", "nothing is enabled in session " + id_);
        chosen = &*it;
    } else {
        for (std::size_t i = 0; i < choices.size(); ++i)
            if ("e" + std::to_string(i) == event_id) chosen = &choices[i];
        if (!chosen) throw Error("NotEnabled", "no enabled event '" + event_id + "'");
        if (!chosen->selectable())
            throw Error("NotEnabled", chosen->event.render() + " is blocked by " + chosen->blocked_by.front());
    }

    Program next = program_;
    std::vector<InstanceState> before = next.scenario_states();
    TraceEntry entry = next.execute(*chosen);
    program_ = std::move(next);
    ++revision_;

    StepResult result;
    result.executed = std::move(entry);
    result.revision = revision_;
    result.enabled = enabled_locked();
    result.changed = changed_states(before, program_.scenario_states());
    return result;
}

Trace SimSession::auto_run() {
    std::lock_guard lock(mutex_);
    Program next = program_;
    Trace segment = next.run_to_quiescence();
    if (!segment.empty()) {
        program_ = std::move(next);
        ++revision_;
    }
    return segment;
}

std::uint64_t SimSession::reset() {
    std::lock_guard lock(mutex_);
    program_ = initial_;
    return ++revision_;
}

std::string SimSession::sequence_diagram() const {
    std::lock_guard lock(mutex_);
    return emit_sequence_diagram(program_.trace());
}

std::string SimSession::component_graph() const {
    std::lock_guard lock(mutex_);
    return emit_component_graph(program_);
}

std::shared_ptr<SimSession> SessionManager::create(Program program, Mode mode, Driver driver) {
    std::lock_guard lock(mutex_);
    std::string id = "s" + std::to_string(next_++);
    auto session = std::make_shared<SimSession>(id, std::move(program), mode, std::move(driver));
    sessions_[id] = session;
    return session;
}

std::shared_ptr<SimSession> SessionManager::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error("UnknownSession", "no session '" + id + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Diagrams
// ---------------------------------------------------------------------------

std::vector<std::string> lifelines(const Trace& trace) {
    std::vector<std::string> out;
    auto add = [&](const std::string& name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    };
    for (const TraceEntry& e : trace) {
        add(e.event.sender);
        add(e.event.receiver);
    }
    return out;
}

std::string emit_sequence_diagram(const Trace& trace) {
    std::string out = "@startuml\n";
    for (const std::string& name : lifelines(trace)) out += "participant " + name + "\n";
    for (const TraceEntry& e : trace) {
        out += e.event.sender + " -> " + e.event.receiver + " : " + e.event.message + "(";
        for (std::size_t i = 0; i < e.event.params.size(); ++i) {
            if (i) out += ", ";
            out += e.event.params[i].render();
        }
        out += ")\n";
    }
    out += "@enduml\n";
    return out;
}

namespace {

using EdgeKey = std::tuple<std::string, std::string, std::string>;

void collect(const EventTemplate& t, std::set<EdgeKey>& edges) {
    if (t.sender && t.receiver) edges.insert({*t.sender, *t.receiver, t.message});
}

void collect(const std::vector<Statement>& body, std::set<EdgeKey>& edges) {
    for (const Statement& s : body) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, RequestStmt>) {
                    collect(node.event, edges);
                } else if constexpr (std::is_same_v<T, WaitForStmt>) {
                    collect(node.pattern, edges);
                } else if constexpr (std::is_same_v<T, BlockStmt>) {
                    collect(node.pattern, edges);
                    if (node.until) collect(*node.until, edges);
                } else if constexpr (std::is_same_v<T, GuardStmt>) {
                    collect(node.then_body, edges);
                    collect(node.else_body, edges);
                }
            },
            s.node);
    }
}

std::string dot_id(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string emit_component_graph(const std::vector<ScenarioDef>& defs, const Declarations& decls) {
    std::set<EdgeKey> edges;
    for (const ScenarioDef& def : defs) {
        if (def.trigger) collect(*def.trigger, edges);
        collect(def.body, edges);
    }
    std::string out = "digraph components {\n  rankdir=LR;\n  node [shape=box];\n";
    for (const ObjectDecl& o : decls.objects()) {
        out += "  " + dot_id(o.name);
        if (o.kind == ObjectKind::External) out += " [style=dashed]";
        out += ";\n";
    }
    for (const auto& [from, to, message] : edges)
        out += "  " + dot_id(from) + " -> " + dot_id(to) + " [label=" + dot_id(message) + "];\n";
    out += "}\n";
    return out;
}

std::string emit_component_graph(const Program& program) {
    return emit_component_graph(program.defs(), program.declarations());
}

}  // namespace scenarioforge::sim
