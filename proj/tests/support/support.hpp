#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/kernel.hpp"
#include "scenarioforge/requirements.hpp"

namespace sftest {

namespace fs = std::filesystem;

/// Directory of the bundled plug-interlock project.
fs::path bundle_dir();
fs::path bundle(const std::string& relative);
std::string slurp(const fs::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Small declaration set used by kernel-level tests: objects env (External),
/// a, b, c; messages go(), ping(number), note(text), flag(boolean),
/// pair(text, number).
scenarioforge::Declarations toy_declarations();
scenarioforge::Program toy_program(const std::string& source,
                                   scenarioforge::ExecutionConfig config = {});
scenarioforge::MessageEvent event(std::string sender, std::string receiver, std::string message,
                                  std::vector<scenarioforge::ParamValue> params = {});

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Random but syntactically well-formed scenario definition. Covers every
/// statement kind, nested guards, wildcards, escapes and signed numbers.
scenarioforge::ScenarioDef random_scenario(std::mt19937_64& rng, std::size_t index);

/// Random cause expression over leaves "c1".."c<n>" with nesting depth at
/// most `depth` (a bare leaf has depth 0).
scenarioforge::req::CauseExpr random_cause(std::mt19937_64& rng, std::size_t n, int depth);

/// Random extraction: a random cause plus one to three effects, some negated.
scenarioforge::req::CausalExtraction random_extraction(std::mt19937_64& rng, const std::string& id,
                                                       std::size_t n, int depth);

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Direct evaluation of a cause expression; leaves are looked up by phrase text.
bool eval_cause(const scenarioforge::req::CauseExpr& expr, const std::map<std::string, bool>& by_phrase);

/// Truth value of effect `index` of `x` under a phrase assignment.
bool eval_effect(const scenarioforge::req::CausalExtraction& x, std::size_t index,
                 const std::map<std::string, bool>& by_phrase);

/// Distinct leaf phrases in first-appearance order.
std::vector<std::string> leaf_phrases(const scenarioforge::req::CauseExpr& expr);

}  // namespace sftest
