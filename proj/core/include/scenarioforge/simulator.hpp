#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "scenarioforge/kernel.hpp"
#include "scenarioforge/project.hpp"

namespace scenarioforge::sim {

enum class Mode { Manual, Auto };
std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

struct EnabledEvent {
    std::string event_id;  // stable within one revision
    MessageEvent event;
    bool external = false;
    std::vector<std::string> requesters;
    std::vector<std::string> blocked_by;

    bool selectable() const noexcept { return blocked_by.empty(); }
};

struct StepResult {
    TraceEntry executed;
    std::uint64_t revision = 0;
    std::vector<EnabledEvent> enabled;
    std::vector<InstanceState> changed;  // new or changed instance snapshots
};

struct Snapshot {
    std::uint64_t revision = 0;
    std::vector<EnabledEvent> enabled;
    std::vector<InstanceState> states;
    Trace trace;
};

/// What feeds external events into a session: the triggers of one directive
/// test (queued up front), or a test scenario started at creation.
struct Driver {
    enum class Kind { None, Directives, TestScenario };
    Kind kind = Kind::None;
    TestSpec directives;
    ScenarioDef scenario;
};

/// Resolves a driver name against a project: "" picks the first usage
/// scenario of the first feature (if any), "none" disables driving, other
/// names match a directive test id, a compiled feature scenario id
/// (`Feature/Scenario`) or a test scenario id. Throws Error("UnknownDriver").
Driver resolve_driver(const Project& project, const std::string& name);

/// One play-out session. All operations are serialized on an internal lock;
/// every state change bumps the revision.
class SimSession {
public:
    SimSession(std::string id, Program program, Mode mode, Driver driver = {});

    const std::string& id() const noexcept { return id_; }
    Mode mode() const noexcept { return mode_; }

    std::uint64_t revision() const;
    /// Requested candidates (blocked ones flagged) or the external queue head.
    std::pair<std::uint64_t, std::vector<EnabledEvent>> enabled_events() const;
    Snapshot snapshot() const;

    /// `event_id` empty means "next by tie-break". Errors: StaleRevision,
    /// NotEnabled, SuperstepLimitExceeded. Failed steps leave the state as is.
    StepResult step(std::uint64_t revision, const std::string& event_id = {});
    /// Steps by tie-break until nothing is selectable; returns the new entries.
    Trace auto_run();
    /// Back to the state right after creation.
    std::uint64_t reset();

    std::string sequence_diagram() const;
    std::string component_graph() const;

private:
    std::vector<EnabledEvent> enabled_locked() const;

    std::string id_;
    Mode mode_;
    Program initial_;
    Program program_;
    std::uint64_t revision_ = 0;
    mutable std::mutex mutex_;
};

/// Thread-safe registry of sessions with ids s1, s2, ...
class SessionManager {
public:
    std::shared_ptr<SimSession> create(Program program, Mode mode, Driver driver = {});
    /// Throws Error("UnknownSession").
    std::shared_ptr<SimSession> get(const std::string& id) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<SimSession>> sessions_;
    std::size_t next_ = 1;
};

/// PlantUML sequence diagram: participants in first-appearance order, then
/// one arrow per trace entry.
std::string emit_sequence_diagram(const Trace& trace);
std::vector<std::string> lifelines(const Trace& trace);

/// Graphviz digraph: one node per declared object (declaration order), one
/// edge per distinct (sender, receiver, message) with concrete endpoints
/// found in any scenario statement or trigger, sorted.
std::string emit_component_graph(const std::vector<ScenarioDef>& defs, const Declarations& decls);
std::string emit_component_graph(const Program& program);

}  // namespace scenarioforge::sim
