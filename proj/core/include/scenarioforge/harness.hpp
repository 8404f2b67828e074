#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/kernel.hpp"

namespace scenarioforge {

enum class Verdict { Pass, Fail, Error };
std::string_view to_string(Verdict verdict);

struct Failure {
    std::size_t directive = 0;  // directive index, or top-level statement index for test scenarios
    std::string reason;         // NoMatchingEvent, UnexpectedEvent, WaitForUnsatisfied, ...
    std::string detail;

    friend bool operator==(const Failure&, const Failure&) = default;
};

struct TestResult {
    std::string test_id;
    Verdict verdict = Verdict::Pass;
    std::optional<Failure> failure;
    Trace trace;
    double seconds = 0.0;
};

struct Evaluation {
    Verdict verdict = Verdict::Pass;
    std::optional<Failure> failure;

    friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

/// Runs a directive test against a fresh program: a trigger posts its event
/// and runs to quiescence; `receive` requires the next requested event after
/// the previous match to match; `eventually` accepts any later event up to
/// the end of the current trace.
TestResult run_test(Program program, const TestSpec& spec);

/// Re-evaluates the non-trigger directives of `spec` against a recorded
/// trace. Trigger directive k is aligned with the k-th triggered entry.
Evaluation evaluate_directives(const Trace& trace, const TestSpec& spec);

/// Loads a Test scenario into the program, starts it and runs to quiescence.
/// Passes iff the test scenario instance completes.
TestResult run_test_scenario(Program program, const ScenarioDef& test_def);

/// Machine-readable report: one record per test (id, verdict, failed
/// directive, reason) plus a summary. Durations are written only when
/// `with_timings` is set so that reports stay byte-stable.
std::string report_json(const std::vector<TestResult>& results, bool with_timings = false);
std::string report_summary(const std::vector<TestResult>& results);

}  // namespace scenarioforge
