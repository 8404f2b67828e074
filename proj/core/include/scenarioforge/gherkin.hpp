#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/harness.hpp"
#include "scenarioforge/kernel.hpp"

namespace scenarioforge::gherkin {

enum class Keyword { Given, When, Then, And, But };
enum class Role { Given, When, Then };

std::string_view to_string(Keyword keyword);
std::string_view to_string(Role role);

struct Step {
    Keyword keyword = Keyword::Given;
    Role role = Role::Given;  // And/But inherit the nearest preceding role
    std::string text;
    SourceLoc loc;

    friend bool operator==(const Step& a, const Step& b) {
        return a.keyword == b.keyword && a.role == b.role && a.text == b.text;
    }
};

struct UsageScenario {
    std::string name;
    std::vector<Step> steps;
    SourceLoc loc;

    friend bool operator==(const UsageScenario& a, const UsageScenario& b) {
        return a.name == b.name && a.steps == b.steps;
    }
};

struct FeatureDoc {
    std::string name;
    std::vector<std::string> description;
    std::vector<UsageScenario> scenarios;
    std::string file;

    friend bool operator==(const FeatureDoc& a, const FeatureDoc& b) {
        return a.name == b.name && a.description == b.description && a.scenarios == b.scenarios;
    }
};

/// Supported subset: Feature, Scenario, Given/When/Then/And/But and `#`
/// comments. Throws SyntaxError with codes MissingFeature, MissingScenario,
/// StepBeforeScenario, UnknownKeyword, DanglingConjunction.
FeatureDoc parse_feature(std::string_view text, std::string file_name = {});
std::string format_feature(const FeatureDoc& doc);

// ---------------------------------------------------------------------------
// Step bindings
// ---------------------------------------------------------------------------

/// Directive inside a binding. Templates may reference captures as `$1`, `$2`.
struct BindingDirective {
    enum class Kind { Trigger, WaitFor, Eventually };
    Kind kind = Kind::Trigger;
    std::string event;  // event template source text, captures not yet substituted

    friend bool operator==(const BindingDirective&, const BindingDirective&) = default;
};

struct StepBinding {
    Role role = Role::Given;
    std::string pattern;  // literal text with {text} / {number} capture slots
    std::vector<BindingDirective> directives;
    SourceLoc loc;

    /// Number of capture slots in `pattern`.
    std::size_t capture_count() const;
    /// Full match of a step text; fills `captures` with typed values.
    bool match(std::string_view text, std::vector<ParamValue>* captures = nullptr) const;

    friend bool operator==(const StepBinding& a, const StepBinding& b) {
        return a.role == b.role && a.pattern == b.pattern && a.directives == b.directives;
    }
};

/// `.steps` line grammar:
///   given|when|then "<pattern>" -> directive; directive; ...
/// where directive is `trigger E`, `waitFor E` or `eventually E`.
std::vector<StepBinding> parse_bindings(std::string_view text, std::string file_name = {});
std::string format_bindings(const std::vector<StepBinding>& bindings);

/// Ambiguity is an error: returns nullptr when nothing matches and throws
/// Error("AmbiguousBinding") naming every candidate when several do.
const StepBinding* find_binding(const Step& step, const std::vector<StepBinding>& bindings);

struct SkeletonFile {
    std::vector<StepBinding> stubs;
    std::string text;  // valid `.steps` source; stubs carry a TODO marker
};

SkeletonFile generate_skeletons(const FeatureDoc& feature, const std::vector<StepBinding>& bindings);

/// Compiles one usage scenario into a directive test. Throws
/// Error("UnboundStep") naming the first unbound step.
TestSpec compile_scenario(const FeatureDoc& feature, std::size_t scenario_index,
                          const std::vector<StepBinding>& bindings);

struct FeatureResult {
    std::string feature;
    std::vector<TestResult> scenarios;

    bool passed() const;
};

/// Checks that every step is bound (throws UnboundStep before executing
/// anything), then runs each usage scenario on a fresh copy of `program`.
FeatureResult run_feature(const FeatureDoc& feature, const std::vector<StepBinding>& bindings,
                          const Program& program);

}  // namespace scenarioforge::gherkin
