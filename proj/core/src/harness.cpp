#include "scenarioforge/harness.hpp"

#include <chrono>
#include <variant>

#include <json.hpp>

namespace scenarioforge {

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "Pass";
        case Verdict::Fail: return "Fail";
        case Verdict::Error: return "Error";
    }
    return "Error";
}

namespace {

EventPattern to_pattern(const EventTemplate& t) {
    EventPattern p{t.sender, t.receiver, t.message, {}};
    for (const TemplateArg& a : t.args) {
        if (a.kind == TemplateArg::Kind::Variable)
            throw Error("UnboundVariable", "test directives cannot use variables");
        p.params.push_back(a.kind == TemplateArg::Kind::Literal ? a.literal : ParamValue::wildcard());
    }
    return p;
}

MessageEvent to_event(const EventTemplate& t) {
    if (t.has_wildcard()) throw Error("WildcardInExternalEvent", "trigger " + t.render() + " is not concrete");
    EventPattern p = to_pattern(t);
    return MessageEvent{*p.sender, *p.receiver, p.message, p.params};
}

// Matches one receive/eventually directive within [cursor, end). Returns the
// cursor after the match or the failure.
std::variant<std::size_t, Failure> match_directive(const Trace& trace, const Directive& d,
                                                   std::size_t index, std::size_t cursor,
                                                   std::size_t end) {
    EventPattern pattern = to_pattern(d.event);
    if (d.kind == Directive::Kind::Receive) {
        for (std::size_t i = cursor; i < end; ++i) {
            if (trace[i].origin != Origin::Requested) continue;
            if (matches(pattern, trace[i].event)) return i + 1;
            return Failure{index, "UnexpectedEvent",
                           "expected " + pattern.render() + ", got " + trace[i].event.render()};
        }
        return Failure{index, "NoMatchingEvent", "no requested event after the previous match"};
    }
    for (std::size_t i = cursor; i < end; ++i)
        if (matches(pattern, trace[i].event)) return i + 1;
    return Failure{index, "NoMatchingEvent", "nothing matched " + pattern.render()};
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TestResult finish(TestResult r, const Program& program, std::chrono::steady_clock::time_point start) {
    r.trace = program.trace();
    r.seconds = elapsed(start);
    return r;
}

}  // namespace

TestResult run_test(Program program, const TestSpec& spec) {
    auto start = std::chrono::steady_clock::now();
    TestResult result;
    result.test_id = spec.id;
    if (!program.trace().empty()) {
        result.verdict = Verdict::Error;
        result.failure = Failure{0, "ProgramNotFresh", "tests need a program with an empty trace"};
        return finish(std::move(result), program, start);
    }
    std::vector<Diagnostic> diagnostics = validate_test(spec, program.declarations());
    if (has_errors(diagnostics)) {
        result.verdict = Verdict::Error;
        std::string detail;
        for (const Diagnostic& d : diagnostics) detail += d.to_string() + "\n";
        result.failure = Failure{0, "InvalidTest", detail};
        return finish(std::move(result), program, start);
    }

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < spec.directives.size(); ++i) {
        const Directive& d = spec.directives[i];
        if (d.kind == Directive::Kind::Trigger) {
            try {
                std::size_t position = program.trace().size();
                program.post_external(to_event(d.event));
                program.run_to_quiescence();
                cursor = position + 1;
            } catch (const Error& e) {
                result.verdict = Verdict::Error;
                result.failure = Failure{i, e.code(), e.what()};
                return finish(std::move(result), program, start);
            }
            continue;
        }
        auto outcome = match_directive(program.trace(), d, i, cursor, program.trace().size());
        if (auto* failure = std::get_if<Failure>(&outcome)) {
            result.verdict = Verdict::Fail;
            result.failure = std::move(*failure);
            return finish(std::move(result), program, start);
        }
        cursor = std::get<std::size_t>(outcome);
    }
    result.verdict = Verdict::Pass;
    return finish(std::move(result), program, start);
}

Evaluation evaluate_directives(const Trace& trace, const TestSpec& spec) {
    std::vector<std::size_t> triggered;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace[i].origin == Origin::Triggered) triggered.push_back(i);

    std::size_t cursor = 0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < spec.directives.size(); ++i) {
        const Directive& d = spec.directives[i];
        if (d.kind == Directive::Kind::Trigger) {
            if (seen >= triggered.size())
                return {Verdict::Fail, Failure{i, "TriggerNotExecuted", d.event.render()}};
            cursor = triggered[seen++] + 1;
            continue;
        }
        std::size_t end = seen < triggered.size() ? triggered[seen] : trace.size();
        auto outcome = match_directive(trace, d, i, cursor, end);
        if (auto* failure = std::get_if<Failure>(&outcome)) return {Verdict::Fail, std::move(*failure)};
        cursor = std::get<std::size_t>(outcome);
    }
    return {Verdict::Pass, std::nullopt};
}

TestResult run_test_scenario(Program program, const ScenarioDef& test_def) {
    auto start = std::chrono::steady_clock::now();
    TestResult result;
    result.test_id = test_def.id;
    if (!program.trace().empty()) {
        result.verdict = Verdict::Error;
        result.failure = Failure{0, "ProgramNotFresh", "tests need a program with an empty trace"};
        return finish(std::move(result), program, start);
    }
    try {
        std::size_t index = program.add_scenario(test_def);
        program.start_scenario(index);
        program.run_to_quiescence();
    } catch (const Error& e) {
        result.verdict = Verdict::Error;
        result.failure = Failure{0, e.code(), e.what()};
        return finish(std::move(result), program, start);
    }

    for (const InstanceState& s : program.scenario_states()) {
        if (s.def_id != test_def.id) continue;
        if (s.status == InstanceStatus::Completed) {
            result.verdict = Verdict::Pass;
        } else {
            result.verdict = Verdict::Fail;
            std::size_t at = s.position.empty() ? 0 : s.position.front();
            std::string reason = "WaitForUnsatisfied";
            if (s.status == InstanceStatus::Violated) {
                reason = "Violated";
            } else if (at < test_def.body.size() &&
                       std::holds_alternative<RequestStmt>(test_def.body[at].node)) {
                reason = "RequestNotSelectable";
            }
            result.failure = Failure{at, reason, "test scenario stopped at " + s.location.to_string()};
        }
        break;
    }
    return finish(std::move(result), program, start);
}

std::string report_json(const std::vector<TestResult>& results, bool with_timings) {
    nlohmann::ordered_json tests = nlohmann::ordered_json::array();
    std::size_t passed = 0;
    for (const TestResult& r : results) {
        nlohmann::ordered_json rec;
        rec["id"] = r.test_id;
        rec["verdict"] = std::string(to_string(r.verdict));
        if (r.failure) {
            rec["failedDirective"] = r.failure->directive;
            rec["reason"] = r.failure->reason;
        } else {
            rec["failedDirective"] = nullptr;
        }
        if (with_timings) rec["seconds"] = r.seconds;
        tests.push_back(std::move(rec));
        if (r.verdict == Verdict::Pass) ++passed;
    }
    nlohmann::ordered_json doc;
    doc["tests"] = std::move(tests);
    doc["summary"] = {{"total", results.size()}, {"passed", passed}, {"failed", results.size() - passed}};
    return doc.dump(2) + "\n";
}

std::string report_summary(const std::vector<TestResult>& results) {
    std::string out;
    std::size_t passed = 0;
    for (const TestResult& r : results) {
        out += std::string(to_string(r.verdict)) + "  " + r.test_id;
        if (r.failure)
            out += "  (directive " + std::to_string(r.failure->directive) + ": " + r.failure->reason + ")";
        out += "\n";
        if (r.verdict == Verdict::Pass) ++passed;
    }
    out += std::to_string(results.size()) + (results.size() == 1 ? " test, " : " tests, ") +
           std::to_string(passed) + " passed, " + std::to_string(results.size() - passed) + " failed\n";
    return out;
}

}  // namespace scenarioforge
