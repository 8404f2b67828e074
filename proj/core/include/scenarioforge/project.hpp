#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/gherkin.hpp"
#include "scenarioforge/kernel.hpp"
#include "scenarioforge/requirements.hpp"

namespace scenarioforge {

/// A loaded project manifest (JSON). All file paths in the manifest are
/// relative to the manifest's directory.
///
///   {
///     "name": "...",
///     "objects":  [{"name": "a", "kind": "External" | "UnderSpecification"}],
///     "messages": [{"name": "m", "params": ["text", "number", "boolean"]}],
///     "scenarios": [...], "tests": [...], "features": [...], "bindings": [...],
///     "requirements": [...], "eventMap": "file.json",
///     "config": {"maxEventsPerSuperstep": 10000, "tieBreak": "DefinitionOrder"},
///     "classification": {"interface": [...], "configuration": [...],
///                        "variableDefinition": [...], "obligation": [...]}
///   }
struct Project {
    std::string name;
    std::filesystem::path manifest_path;
    Declarations decls;
    ExecutionConfig config;

    std::vector<ScenarioDef> scenarios;       // component and inter-component definitions
    std::vector<ScenarioDef> test_scenarios;  // `test scenario` definitions
    std::vector<TestSpec> tests;              // directive tests
    std::vector<gherkin::FeatureDoc> features;
    std::vector<gherkin::StepBinding> bindings;
    std::vector<std::filesystem::path> requirement_files;
    std::optional<std::filesystem::path> event_map_file;
    req::ClassificationRules classification;

    /// Program over `scenarios`. Throws InvalidProgram.
    Program program() const;
};

/// Reads the manifest and every file it references. Throws Error with codes
/// IoError, InvalidManifest, or the parse error of the offending file.
Project load_project(const std::filesystem::path& manifest);

/// Static checks over the whole project: scenario validation, directive
/// tests, test scenarios, and step coverage of features (unbound steps are
/// warnings; ambiguous ones errors).
std::vector<Diagnostic> validate_project(const Project& project);

std::string read_file(const std::filesystem::path& path);

}  // namespace scenarioforge
