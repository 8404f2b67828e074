#include "scenarioforge/kernel.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace scenarioforge {

std::string_view to_string(Origin origin) {
    return origin == Origin::Triggered ? "triggered" : "requested";
}

std::string_view to_string(InstanceStatus status) {
    switch (status) {
        case InstanceStatus::ActiveAtSync: return "ActiveAtSync";
        case InstanceStatus::Completed: return "Completed";
        case InstanceStatus::Violated: return "Violated";
    }
    return "ActiveAtSync";
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

std::string serialize_trace(const Trace& trace) {
    std::string out;
    for (const TraceEntry& e : trace) {
        out += std::to_string(e.seq) + '\t' + std::to_string(e.superstep) + '\t' +
               std::string(to_string(e.origin)) + '\t' + e.event.sender + '\t' + e.event.receiver +
               '\t' + e.event.message + '\t';
        for (std::size_t i = 0; i < e.event.params.size(); ++i) {
            if (i) out += ',';
            out += e.event.params[i].render();
        }
        out += '\n';
    }
    return out;
}

Trace parse_trace(std::string_view text) {
    Trace trace;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        SourceLoc loc{"<trace>", line_no, 1};
        if (fields.size() != 7) throw SyntaxError("MalformedTrace", "expected 7 tab-separated fields", loc);
        TraceEntry e;
        try {
            e.seq = std::stoul(fields[0]);
            e.superstep = std::stoul(fields[1]);
        } catch (const std::exception&) {
            throw SyntaxError("MalformedTrace", "sequence numbers must be integers", loc);
        }
        if (fields[2] == "triggered") e.origin = Origin::Triggered;
        else if (fields[2] == "requested") e.origin = Origin::Requested;
        else throw SyntaxError("MalformedTrace", "unknown origin '" + fields[2] + "'", loc);
        EventTemplate t =
            parse_event_template(fields[3] + " -> " + fields[4] + "." + fields[5] + "(" + fields[6] + ")");
        e.event = MessageEvent{*t.sender, *t.receiver, t.message, {}};
        for (const TemplateArg& a : t.args) {
            if (a.kind != TemplateArg::Kind::Literal)
                throw SyntaxError("MalformedTrace", "trace parameters must be literals", loc);
            e.event.params.push_back(a.literal);
        }
        trace.push_back(std::move(e));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Flexible request resolution
// ---------------------------------------------------------------------------

namespace {

bool same_event(const MessageEvent& a, const MessageEvent& b) {
    if (a.sender != b.sender || a.receiver != b.receiver || a.message != b.message ||
        a.params.size() != b.params.size())
        return false;
    for (std::size_t i = 0; i < a.params.size(); ++i)
        if (!a.params[i].same_value(b.params[i])) return false;
    return true;
}

MessageEvent fill_defaults(const MessageEvent& event, const Declarations& decls) {
    MessageEvent out = event;
    const MessageDecl* decl = decls.find_message(event.message);
    for (std::size_t i = 0; i < out.params.size(); ++i) {
        if (!out.params[i].is_wildcard()) continue;
        ParamKind kind = decl && i < decl->params.size() ? decl->params[i] : ParamKind::Text;
        out.params[i] = ParamValue::default_for(kind);
    }
    return out;
}

void add_candidate(std::vector<Candidate>& out, MessageEvent event, const Request& req) {
    for (Candidate& c : out) {
        if (same_event(c.event, event)) {
            if (std::find(c.requesters.begin(), c.requesters.end(), req.instance) == c.requesters.end())
                c.requesters.push_back(req.instance);
            c.rank = std::min(c.rank, req.rank);
            return;
        }
    }
    out.push_back(Candidate{std::move(event), {req.instance}, req.rank});
}

}  // namespace

std::vector<Candidate> resolve_flexible_requests(const std::vector<Request>& requests,
                                                 const Declarations& decls) {
    std::vector<const Request*> ordered;
    for (const Request& r : requests) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Request* a, const Request* b) { return a->rank < b->rank; });

    using Key = std::tuple<std::string, std::string, std::string>;
    std::vector<Key> keys;
    for (const Request* r : ordered) {
        Key k{r->event.sender, r->event.receiver, r->event.message};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }

    std::vector<Candidate> out;
    for (const Key& key : keys) {
        std::vector<const Request*> group;
        for (const Request* r : ordered)
            if (Key{r->event.sender, r->event.receiver, r->event.message} == key) group.push_back(r);

        std::vector<Candidate> group_out;
        bool has_rigid = std::any_of(group.begin(), group.end(),
                                     [](const Request* r) { return !r->flexible; });
        if (has_rigid) {
            for (const Request* r : group)
                if (!r->flexible) add_candidate(group_out, r->event, *r);
        } else {
            for (const Request* r : group) add_candidate(group_out, fill_defaults(r->event, decls), *r);
        }
        for (Candidate& c : group_out) {
            for (const Request* r : group) {
                if (!r->flexible || !matches(EventPattern::exact(r->event), c.event)) continue;
                if (std::find(c.requesters.begin(), c.requesters.end(), r->instance) == c.requesters.end())
                    c.requesters.push_back(r->instance);
                c.rank = std::min(c.rank, r->rank);
            }
        }
        for (Candidate& c : group_out) out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rank < b.rank; });
    return out;
}

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

namespace {

const ParamValue* lookup(const std::vector<std::pair<std::string, ParamValue>>& bindings,
                         const std::string& name) {
    for (const auto& [k, v] : bindings)
        if (k == name) return &v;
    return nullptr;
}

void bind(std::vector<std::pair<std::string, ParamValue>>& bindings, const std::string& name,
          ParamValue value) {
    for (auto& [k, v] : bindings) {
        if (k == name) {
            v = std::move(value);
            return;
        }
    }
    bindings.emplace_back(name, std::move(value));
}

ParamValue resolve_arg(const TemplateArg& arg,
                       const std::vector<std::pair<std::string, ParamValue>>& bindings) {
    switch (arg.kind) {
        case TemplateArg::Kind::Wildcard: return ParamValue::wildcard();
        case TemplateArg::Kind::Literal: return arg.literal;
        case TemplateArg::Kind::Variable:
            if (const ParamValue* v = lookup(bindings, arg.variable)) return *v;
            throw Error("UnboundVariable", "variable '" + arg.variable + "' is not bound");
    }
    return ParamValue::wildcard();
}

EventPattern resolve_pattern(const EventTemplate& t,
                             const std::vector<std::pair<std::string, ParamValue>>& bindings) {
    EventPattern p{t.sender, t.receiver, t.message, {}};
    for (const TemplateArg& a : t.args) p.params.push_back(resolve_arg(a, bindings));
    return p;
}

MessageEvent resolve_event(const EventTemplate& t,
                           const std::vector<std::pair<std::string, ParamValue>>& bindings) {
    MessageEvent e{t.sender.value_or(""), t.receiver.value_or(""), t.message, {}};
    for (const TemplateArg& a : t.args) e.params.push_back(resolve_arg(a, bindings));
    return e;
}

ParamValue resolve_operand(const Operand& op,
                           const std::vector<std::pair<std::string, ParamValue>>& bindings) {
    if (!op.is_variable) return op.literal;
    if (const ParamValue* v = lookup(bindings, op.variable)) return *v;
    throw Error("UnboundVariable", "variable '" + op.variable + "' is not bound");
}

bool compare(const ParamValue& a, CompareOp op, const ParamValue& b) {
    if (op == CompareOp::Eq) return a.same_value(b);
    if (op == CompareOp::Ne) return !a.same_value(b);
    int order = 0;
    if (a.is_number() && b.is_number()) {
        if (a.same_value(b)) order = 0;
        else order = a.as_number() < b.as_number() ? -1 : 1;
    } else if (a.is_text() && b.is_text()) {
        order = a.as_text().compare(b.as_text());
        order = order < 0 ? -1 : (order > 0 ? 1 : 0);
    } else if (a.is_boolean() && b.is_boolean()) {
        order = static_cast<int>(a.as_boolean()) - static_cast<int>(b.as_boolean());
    } else {
        return false;
    }
    switch (op) {
        case CompareOp::Lt: return order < 0;
        case CompareOp::Le: return order <= 0;
        case CompareOp::Gt: return order > 0;
        case CompareOp::Ge: return order >= 0;
        default: return false;
    }
}

bool evaluate(const Condition& c, const std::vector<std::pair<std::string, ParamValue>>& bindings) {
    switch (c.kind) {
        case Condition::Kind::Compare:
            return compare(resolve_operand(c.lhs, bindings), c.op, resolve_operand(c.rhs, bindings));
        case Condition::Kind::Not: return !evaluate(c.children.at(0), bindings);
        case Condition::Kind::And:
            return std::all_of(c.children.begin(), c.children.end(),
                               [&](const Condition& x) { return evaluate(x, bindings); });
        case Condition::Kind::Or:
            return std::any_of(c.children.begin(), c.children.end(),
                               [&](const Condition& x) { return evaluate(x, bindings); });
    }
    return false;
}

EventPattern trigger_pattern(const EventTemplate& t) { return resolve_pattern(t, {}); }

}  // namespace

Program::Program(std::vector<ScenarioDef> defs, Declarations decls, ExecutionConfig config)
    : defs_(std::move(defs)), decls_(std::move(decls)), config_(config) {}

Program Program::load(std::vector<ScenarioDef> defs, Declarations decls, ExecutionConfig config) {
    if (config.max_events_per_superstep < 1)
        throw Error("InvalidConfig", "maxEventsPerSuperstep must be at least 1");
    std::vector<Diagnostic> diagnostics = validate_program(defs, decls);
    if (has_errors(diagnostics)) throw InvalidProgram(std::move(diagnostics));
    return Program(std::move(defs), std::move(decls), config);
}

std::size_t Program::add_scenario(ScenarioDef def) {
    std::vector<ScenarioDef> all = defs_;
    all.push_back(def);
    std::vector<Diagnostic> diagnostics = validate_program(all, decls_);
    if (has_errors(diagnostics)) throw InvalidProgram(std::move(diagnostics));
    defs_.push_back(std::move(def));
    return defs_.size() - 1;
}

void Program::start_scenario(std::size_t def_index) {
    if (def_index >= defs_.size()) throw Error("UnknownScenario", "no scenario at that index");
    spawn(def_index, std::nullopt);
}

void Program::post_external(MessageEvent event) {
    check_concrete_event(event, decls_);
    external_.push_back(std::move(event));
}

const std::vector<Statement>& Program::body_at(const Instance& inst, std::size_t depth) const {
    const std::vector<Statement>* body = &defs_[inst.def_index].body;
    for (std::size_t d = 1; d <= depth; ++d) {
        const auto& guard = std::get<GuardStmt>((*body)[inst.stack[d - 1].index].node);
        body = inst.stack[d].in_else ? &guard.else_body : &guard.then_body;
    }
    return *body;
}

const Statement* Program::current_statement(const Instance& inst) const {
    if (inst.stack.empty()) return nullptr;
    const auto& body = body_at(inst, inst.stack.size() - 1);
    std::size_t i = inst.stack.back().index;
    return i < body.size() ? &body[i] : nullptr;
}

void Program::spawn(std::size_t def_index, std::optional<MessageEvent> trigger) {
    Instance inst;
    inst.id = instances_.size();
    inst.def_index = def_index;
    inst.trigger = std::move(trigger);
    inst.stack.push_back(Frame{});
    settle(inst);
    instances_.push_back(std::move(inst));
}

void Program::settle(Instance& inst) {
    inst.sync = SyncPoint{};
    while (true) {
        if (inst.stack.empty()) {
            inst.status = InstanceStatus::Completed;
            return;
        }
        const auto& body = body_at(inst, inst.stack.size() - 1);
        Frame& frame = inst.stack.back();
        if (frame.index >= body.size()) {
            inst.stack.pop_back();
            if (!inst.stack.empty()) ++inst.stack.back().index;
            continue;
        }
        const Statement& st = body[frame.index];
        if (const auto* b = std::get_if<BindStmt>(&st.node)) {
            if (!inst.trigger || b->param_index >= inst.trigger->params.size())
                throw Error("BindWithoutTrigger", "bind has no trigger parameter to read");
            bind(inst.bindings, b->variable, inst.trigger->params[b->param_index]);
            ++frame.index;
        } else if (const auto* s = std::get_if<SetStmt>(&st.node)) {
            bind(inst.bindings, s->variable, resolve_operand(s->value, inst.bindings));
            ++frame.index;
        } else if (const auto* g = std::get_if<GuardStmt>(&st.node)) {
            if (evaluate(g->condition, inst.bindings)) {
                inst.stack.push_back(Frame{0, false});
            } else if (!g->else_body.empty()) {
                inst.stack.push_back(Frame{0, true});
            } else {
                ++frame.index;
            }
        } else if (const auto* blk = std::get_if<BlockStmt>(&st.node); blk && !blk->until) {
            inst.persistent_blocks.push_back(resolve_pattern(blk->pattern, inst.bindings));
            ++frame.index;
        } else {
            break;
        }
    }

    inst.status = InstanceStatus::ActiveAtSync;
    const Statement& st = *current_statement(inst);
    SyncPoint sync;
    sync.blocked = inst.persistent_blocks;
    std::size_t rank = inst.def_index * (std::size_t{1} << 32) + inst.id;
    if (const auto* r = std::get_if<RequestStmt>(&st.node)) {
        sync.requested = Request{resolve_event(r->event, inst.bindings), r->flexible, rank, inst.id};
    } else if (const auto* w = std::get_if<WaitForStmt>(&st.node)) {
        sync.waited.push_back(resolve_pattern(w->pattern, inst.bindings));
    } else if (const auto* blk = std::get_if<BlockStmt>(&st.node)) {
        sync.waited.push_back(resolve_pattern(*blk->until, inst.bindings));
        sync.blocked.push_back(resolve_pattern(blk->pattern, inst.bindings));
    }
    // A rigid request forbidden by the instance's own block set can never be
    // selected; the instance is stuck for good.
    if (sync.requested && !sync.requested->flexible) {
        for (const EventPattern& p : sync.blocked) {
            if (matches(p, sync.requested->event)) {
                inst.status = InstanceStatus::Violated;
                inst.sync = SyncPoint{};
                return;
            }
        }
    }
    inst.sync = std::move(sync);
}

bool Program::progresses(const Instance& inst, const MessageEvent& event) const {
    if (inst.status != InstanceStatus::ActiveAtSync) return false;
    if (inst.sync.requested && matches(EventPattern::exact(inst.sync.requested->event), event))
        return true;
    return std::any_of(inst.sync.waited.begin(), inst.sync.waited.end(),
                       [&](const EventPattern& p) { return matches(p, event); });
}

std::vector<Request> Program::gather_requests() const {
    std::vector<Request> out;
    for (const Instance& inst : instances_)
        if (inst.status == InstanceStatus::ActiveAtSync && inst.sync.requested)
            out.push_back(*inst.sync.requested);
    return out;
}

std::vector<std::string> Program::blockers_of(const MessageEvent& event) const {
    std::vector<std::string> out;
    for (const Instance& inst : instances_) {
        if (inst.status != InstanceStatus::ActiveAtSync) continue;
        bool blocks = std::any_of(inst.sync.blocked.begin(), inst.sync.blocked.end(),
                                  [&](const EventPattern& p) { return matches(p, event); });
        const std::string& id = defs_[inst.def_index].id;
        if (blocks && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

std::vector<Choice> Program::requested_choices() const {
    std::vector<Choice> out;
    for (Candidate& c : resolve_flexible_requests(gather_requests(), decls_)) {
        Choice choice;
        choice.event = std::move(c.event);
        for (std::size_t id : c.requesters) {
            const std::string& def_id = defs_[instances_[id].def_index].id;
            if (std::find(choice.requesters.begin(), choice.requesters.end(), def_id) ==
                choice.requesters.end())
                choice.requesters.push_back(def_id);
        }
        choice.blocked_by = blockers_of(choice.event);
        out.push_back(std::move(choice));
    }
    return out;
}

std::vector<Choice> Program::choices() const {
    std::vector<Choice> out = requested_choices();
    bool any_selectable =
        std::any_of(out.begin(), out.end(), [](const Choice& c) { return c.selectable(); });
    if (!any_selectable && !external_.empty()) {
        Choice head;
        head.event = external_.front();
        head.external = true;
        out.insert(out.begin(), std::move(head));
    }
    return out;
}

bool Program::quiescent() const {
    if (!external_.empty()) return false;
    std::vector<Choice> all = requested_choices();
    return std::none_of(all.begin(), all.end(), [](const Choice& c) { return c.selectable(); });
}

std::optional<TraceEntry> Program::step() {
    for (const Choice& c : choices())
        if (c.selectable()) return execute(c);
    return std::nullopt;
}

TraceEntry Program::record(MessageEvent event, Origin origin) {
    TraceEntry entry{trace_.size(), superstep_, origin, std::move(event)};
    trace_.push_back(entry);
    return entry;
}

TraceEntry Program::execute(const Choice& choice) {
    if (!choice.selectable())
        throw Error("NotEnabled", "event " + choice.event.render() + " is blocked");
    TraceEntry entry;
    if (choice.external) {
        if (external_.empty() || !(external_.front() == choice.event))
            throw Error("NotEnabled", "event " + choice.event.render() + " is not the queue head");
        if (!trace_.empty()) ++superstep_;
        events_in_superstep_ = 0;
        external_.pop_front();
        entry = record(choice.event, Origin::Triggered);
    } else {
        if (events_in_superstep_ >= config_.max_events_per_superstep)
            throw Error("SuperstepLimitExceeded",
                        "more than " + std::to_string(config_.max_events_per_superstep) +
                            " events in one super-step");
        ++events_in_superstep_;
        entry = record(choice.event, Origin::Requested);
    }

    const std::size_t existing = instances_.size();
    for (std::size_t i = 0; i < existing; ++i) {
        Instance& inst = instances_[i];
        if (!progresses(inst, entry.event)) continue;
        ++inst.stack.back().index;
        settle(inst);
    }
    for (std::size_t d = 0; d < defs_.size(); ++d) {
        const ScenarioDef& def = defs_[d];
        if (def.trigger && matches(trigger_pattern(*def.trigger), entry.event))
            spawn(d, entry.event);
    }
    return entry;
}

Trace Program::run_to_quiescence() {
    std::size_t start = trace_.size();
    while (step()) {
    }
    return Trace(trace_.begin() + static_cast<std::ptrdiff_t>(start), trace_.end());
}

std::vector<InstanceState> Program::scenario_states() const {
    std::vector<InstanceState> out;
    for (const Instance& inst : instances_) {
        InstanceState s;
        s.instance = inst.id;
        s.def_id = defs_[inst.def_index].id;
        s.status = inst.status;
        s.bindings = inst.bindings;
        for (const Frame& f : inst.stack) s.position.push_back(f.index);
        const Statement* st = current_statement(inst);
        s.location = st ? st->loc : defs_[inst.def_index].loc;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SyncPoint> Program::sync_points() const {
    std::vector<SyncPoint> out;
    for (const Instance& inst : instances_)
        if (inst.status == InstanceStatus::ActiveAtSync) out.push_back(inst.sync);
    return out;
}

}  // namespace scenarioforge
