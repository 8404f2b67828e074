#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenarioforge/event_model.hpp"
#include "scenarioforge/requirements.hpp"

namespace scenarioforge::ceg {

struct CauseNode {
    std::string id;  // C1, C2, ...
    req::Phrase phrase;
};

struct EffectNode {
    std::string id;  // E1, E2, ...
    req::Phrase phrase;
};

enum class GateOp { And, Or };

struct GateNode {
    std::string id;  // G1, G2, ...
    GateOp op = GateOp::And;
};

struct Edge {
    std::string from;
    std::string to;
    bool negated = false;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct CauseEffectGraph {
    std::string requirement_id;
    std::vector<CauseNode> causes;
    std::vector<EffectNode> effects;
    std::vector<GateNode> gates;
    std::vector<Edge> edges;

    /// Effect values under `assignment` (indexed like `causes`).
    std::vector<bool> evaluate(const std::vector<bool>& assignment) const;
    /// Throws Error("InvalidGraph") on cycles, unknown nodes, gate fan-in < 2
    /// or effects without exactly one driver.
    void validate() const;
};

/// Key used to deduplicate cause phrases: lower case, collapsed whitespace.
std::string normalized_key(std::string_view phrase);

CauseEffectGraph build_graph(const req::CausalExtraction& extraction);

struct GeneratedTestCase {
    std::string id;  // <requirement>-<n>
    std::string requirement_id;
    std::map<std::string, bool> assignments;  // cause id -> value
    std::map<std::string, bool> expected;     // effect id -> value
    std::string provenance_rule;
};

struct RequirementSuite {
    CauseEffectGraph graph;
    std::vector<GeneratedTestCase> cases;
};

struct TestSuite {
    std::vector<RequirementSuite> requirements;  // ascending requirement id after merge

    std::size_t case_count() const;
};

inline constexpr std::size_t kMaxCauses = 16;

/// Basic path sensitization. Per effect, the value true is demanded first,
/// then false. Errors: TooManyCauses.
RequirementSuite derive_test_cases(const CauseEffectGraph& graph);

/// Orders requirement suites by id (lexicographic ascending).
TestSuite merge_suites(std::vector<RequirementSuite> parts);

enum class ExportFormat { Tabular, Structured };
std::optional<ExportFormat> parse_export_format(std::string_view name);

/// Errors: EmptySuite, UnsupportedFormat.
std::string export_suite(const TestSuite& suite, ExportFormat format);
std::string export_suite(const TestSuite& suite, std::string_view format);

/// Phrase text -> event template source, matched by normalized_key.
using EventMap = std::map<std::string, std::string>;
EventMap parse_event_map(std::string_view json_text);

/// Directive-test stubs in `.tests` syntax, one test per case. Mapped causes
/// assigned true become one trigger per message (arguments of causes that
/// map to the same message are overlaid); mapped effects expected true become
/// `eventually`. Everything else is kept as a TODO comment with its phrase.
/// With `decls`, wildcard trigger arguments are filled with default values.
std::string emit_harness_stubs(const TestSuite& suite, const EventMap& event_map,
                               const Declarations* decls = nullptr);

}  // namespace scenarioforge::ceg
