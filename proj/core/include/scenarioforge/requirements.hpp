#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenarioforge/error.hpp"

namespace scenarioforge::req {

enum class Category {
    Unclassified,
    FunctionalCausal,
    FunctionalStatic,
    Interface,
    Configuration,
    VariableDefinition,
    Other,
};

std::string_view to_string(Category category);
std::optional<Category> parse_category(std::string_view text);

struct Requirement {
    std::string id;
    std::string text;
    std::string category_hint;  // optional second column, informational
    Category category = Category::Unclassified;
    int line = 0;
};

/// Delimited records with header `id,category_hint,text` (the hint column
/// may be omitted). Fields may be double-quoted and span lines.
/// Errors: DuplicateId, EmptyText, MalformedRecord.
std::vector<Requirement> ingest_requirements(std::string_view document, std::string file_name = {});
/// One requirement per non-empty line; ids are R1, R2, ... in file order.
std::vector<Requirement> ingest_plain(std::string_view document);
/// Chooses plain mode for `.txt` files, delimited mode otherwise.
std::vector<Requirement> ingest_requirements_file(const std::string& path);

/// Keyword lists used by `classify`. Matching is case-insensitive substring
/// matching, except `obligation` which matches whole words.
struct ClassificationRules {
    std::vector<std::string> variable_definition{"shall be defined as", "is defined as", "is of type",
                                                 "data type"};
    std::vector<std::string> configuration{"configur"};
    std::vector<std::string> interface{"interface", "provide", "signal name"};
    std::vector<std::string> obligation{"shall", "must"};
};

/// Order: causal pattern, variable definition, configuration, interface,
/// modal obligation (static), other.
Category classify(const Requirement& req, const ClassificationRules& rules = {});
std::vector<Requirement> classify_all(std::vector<Requirement> reqs, const ClassificationRules& rules = {});

// ---------------------------------------------------------------------------
// Causal extraction
// ---------------------------------------------------------------------------

struct Phrase {
    std::string text;  // whitespace-normalized, negation words removed
    std::optional<std::string> variable;
    std::optional<std::string> value;

    friend bool operator==(const Phrase&, const Phrase&) = default;
};

struct CauseExpr {
    enum class Kind { Leaf, And, Or, Not };
    Kind kind = Kind::Leaf;
    Phrase phrase;                  // Leaf only
    std::vector<CauseExpr> children;  // And/Or: >= 2, Not: exactly 1

    static CauseExpr leaf(Phrase p);
    static CauseExpr negate(CauseExpr e);
    static CauseExpr gate(Kind kind, std::vector<CauseExpr> children);

    std::string render() const;  // e.g. AND(a, NOT(b))
    friend bool operator==(const CauseExpr&, const CauseExpr&) = default;
};

struct Effect {
    Phrase phrase;
    bool negated = false;

    friend bool operator==(const Effect&, const Effect&) = default;
};

struct CausalExtraction {
    std::string requirement_id;
    CauseExpr cause;
    std::vector<Effect> effects;
    std::string pattern_id;
};

struct PatternInfo {
    std::string id;
    std::string marker;
    bool leading = true;  // marker opens the sentence vs. follows the effect clause
    std::string shape;
    std::string example;
};

/// The published surface-pattern table; every extraction names one of these.
const std::vector<PatternInfo>& pattern_table();

/// Id of the causal pattern matching `text`, if any. The leftmost marker wins.
std::optional<std::string> match_pattern(std::string_view text);

/// Errors: NotCausal, UnparsableCausal (message quotes the offending span).
CausalExtraction extract_causal(const Requirement& req);

}  // namespace scenarioforge::req
