#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/event_model.hpp"

namespace scenarioforge {

struct ExecutionConfig {
    enum class TieBreak { DefinitionOrder };

    std::size_t max_events_per_superstep = 10000;
    TieBreak tie_break = TieBreak::DefinitionOrder;
};

enum class Origin { Triggered, Requested };
std::string_view to_string(Origin origin);

struct TraceEntry {
    std::size_t seq = 0;
    std::size_t superstep = 0;
    Origin origin = Origin::Triggered;
    MessageEvent event;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

using Trace = std::vector<TraceEntry>;

/// One line per entry:
/// `seq<TAB>superstep<TAB>origin<TAB>sender<TAB>receiver<TAB>message<TAB>p1,p2,...`
std::string serialize_trace(const Trace& trace);
Trace parse_trace(std::string_view text);

/// A request gathered from one instance at a selection step. `rank` orders
/// requests by scenario definition order, then instance creation order.
struct Request {
    MessageEvent event;  // may hold wildcards when flexible
    bool flexible = false;
    std::size_t rank = 0;
    std::size_t instance = 0;
};

/// A concrete executable event together with the instances whose requests
/// it satisfies. Candidates are returned in tie-break order.
struct Candidate {
    MessageEvent event;
    std::vector<std::size_t> requesters;
    std::size_t rank = 0;
};

/// Groups requests by (sender, receiver, message). Any rigid valuation in a
/// group becomes a candidate and absorbs the flexible requests it matches;
/// a group of flexible requests only is resolved by filling each wildcard
/// with the declared default of its parameter kind.
std::vector<Candidate> resolve_flexible_requests(const std::vector<Request>& requests,
                                                 const Declarations& decls);

enum class InstanceStatus { ActiveAtSync, Completed, Violated };
std::string_view to_string(InstanceStatus status);

struct SyncPoint {
    std::optional<Request> requested;
    std::vector<EventPattern> waited;
    std::vector<EventPattern> blocked;
};

/// Snapshot of one scenario instance.
struct InstanceState {
    std::size_t instance = 0;
    std::string def_id;
    InstanceStatus status = InstanceStatus::ActiveAtSync;
    /// Statement path: index into the body, then into nested guard branches.
    std::vector<std::size_t> position;
    SourceLoc location;
    std::vector<std::pair<std::string, ParamValue>> bindings;

    friend bool operator==(const InstanceState& a, const InstanceState& b) {
        return a.instance == b.instance && a.def_id == b.def_id && a.status == b.status &&
               a.position == b.position && a.bindings == b.bindings;
    }
};

/// Something that can be executed next: a requested candidate, or the head
/// of the external queue when no requested event is selectable.
struct Choice {
    MessageEvent event;
    bool external = false;
    std::vector<std::string> requesters;  // scenario ids
    std::vector<std::string> blocked_by;  // scenario ids; empty iff selectable

    bool selectable() const noexcept { return blocked_by.empty(); }
};

/// A set of scenario definitions executed as one interwoven program.
///
/// Execution follows super-step semantics: once an external event has been
/// executed, requested events are selected and executed until none is
/// selectable; only then is the next external event taken from the queue.
class Program {
public:
    /// Validates `defs` and returns a program with no instances and an empty
    /// trace. Throws InvalidProgram when validation reports errors.
    static Program load(std::vector<ScenarioDef> defs, Declarations decls,
                        ExecutionConfig config = {});

    /// Appends a definition (validated against the existing ones) and returns
    /// its index. Throws InvalidProgram.
    std::size_t add_scenario(ScenarioDef def);
    /// Starts an instance of a definition without a trigger event.
    void start_scenario(std::size_t def_index);

    /// Throws Error("UndeclaredEvent") / Error("WildcardInExternalEvent").
    void post_external(MessageEvent event);

    /// Runs until no requested event is selectable and the external queue is
    /// empty. Returns the entries appended by this call. Throws
    /// Error("SuperstepLimitExceeded").
    Trace run_to_quiescence();

    /// Selectable requested candidates (plus blocked ones, flagged), or the
    /// external queue head when nothing requested is selectable.
    std::vector<Choice> choices() const;
    bool quiescent() const;
    /// Executes the first selectable choice. Returns nullopt at quiescence.
    std::optional<TraceEntry> step();
    /// Executes a specific choice; it must be selectable.
    TraceEntry execute(const Choice& choice);

    std::vector<InstanceState> scenario_states() const;
    std::vector<SyncPoint> sync_points() const;

    const Trace& trace() const noexcept { return trace_; }
    const std::deque<MessageEvent>& pending_external() const noexcept { return external_; }
    const std::vector<ScenarioDef>& defs() const noexcept { return defs_; }
    const Declarations& declarations() const noexcept { return decls_; }
    const ExecutionConfig& config() const noexcept { return config_; }

private:
    struct Frame {
        std::size_t index = 0;
        bool in_else = false;
    };

    struct Instance {
        std::size_t id = 0;
        std::size_t def_index = 0;
        std::optional<MessageEvent> trigger;
        std::vector<std::pair<std::string, ParamValue>> bindings;
        std::vector<Frame> stack;
        std::vector<EventPattern> persistent_blocks;
        InstanceStatus status = InstanceStatus::ActiveAtSync;
        SyncPoint sync;
    };

    Program(std::vector<ScenarioDef> defs, Declarations decls, ExecutionConfig config);

    const std::vector<Statement>& body_at(const Instance& inst, std::size_t depth) const;
    const Statement* current_statement(const Instance& inst) const;
    void spawn(std::size_t def_index, std::optional<MessageEvent> trigger);
    void settle(Instance& inst);
    bool progresses(const Instance& inst, const MessageEvent& event) const;
    std::vector<Request> gather_requests() const;
    std::vector<std::string> blockers_of(const MessageEvent& event) const;
    std::vector<Choice> requested_choices() const;
    TraceEntry record(MessageEvent event, Origin origin);

    std::vector<ScenarioDef> defs_;
    Declarations decls_;
    ExecutionConfig config_;
    std::vector<Instance> instances_;
    std::deque<MessageEvent> external_;
    Trace trace_;
    std::size_t superstep_ = 0;
    std::size_t events_in_superstep_ = 0;
};

}  // namespace scenarioforge
