#include "scenarioforge/project.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scenarioforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

[[noreturn]] void bad(const fs::path& manifest, const std::string& what) {
    throw Error("InvalidManifest", manifest.string() + ": " + what);
}

std::vector<std::string> string_list(const json& doc, const char* key, const fs::path& manifest) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    const json& v = doc.at(key);
    if (!v.is_array()) bad(manifest, std::string("'") + key + "' must be an array of strings");
    for (const json& item : v) {
        if (!item.is_string()) bad(manifest, std::string("'") + key + "' must be an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

Program Project::program() const { return Program::load(scenarios, decls, config); }

Project load_project(const fs::path& manifest) {
    json doc;
    try {
        doc = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
        bad(manifest, e.what());
    }
    if (!doc.is_object()) bad(manifest, "top level must be an object");

    Project p;
    p.manifest_path = manifest;
    p.name = doc.value("name", manifest.stem().string());
    fs::path root = manifest.parent_path();
    auto resolve = [&](const std::string& rel) { return (root / rel).lexically_normal(); };

    for (const json& o : doc.value("objects", json::array())) {
        if (!o.is_object() || !o.contains("name")) bad(manifest, "object entries need a name");
        std::string kind_text = o.value("kind", "UnderSpecification");
        std::optional<ObjectKind> kind = parse_object_kind(kind_text);
        if (!kind) bad(manifest, "unknown object kind '" + kind_text + "'");
        p.decls.add_object({o.at("name").get<std::string>(), *kind});
    }
    for (const json& m : doc.value("messages", json::array())) {
        if (!m.is_object() || !m.contains("name")) bad(manifest, "message entries need a name");
        MessageDecl decl{m.at("name").get<std::string>(), {}};
        for (const json& k : m.value("params", json::array())) {
            std::optional<ParamKind> kind = parse_param_kind(k.get<std::string>());
            if (!kind) bad(manifest, "unknown parameter kind '" + k.get<std::string>() + "'");
            decl.params.push_back(*kind);
        }
        p.decls.add_message(std::move(decl));
    }

    if (doc.contains("config")) {
        const json& c = doc.at("config");
        if (c.contains("maxEventsPerSuperstep")) {
            if (!c.at("maxEventsPerSuperstep").is_number_unsigned() || c.at("maxEventsPerSuperstep").get<std::size_t>() == 0)
                bad(manifest, "maxEventsPerSuperstep must be a positive integer");
            p.config.max_events_per_superstep = c.at("maxEventsPerSuperstep").get<std::size_t>();
        }
        std::string tie = c.value("tieBreak", "DefinitionOrder");
        if (tie != "DefinitionOrder") bad(manifest, "unsupported tieBreak '" + tie + "'");
    }

    if (doc.contains("classification")) {
        const json& c = doc.at("classification");
        auto override_list = [&](const char* key, std::vector<std::string>& target) {
            if (c.contains(key)) target = string_list(c, key, manifest);
        };
        override_list("interface", p.classification.interface);
        override_list("configuration", p.classification.configuration);
        override_list("variableDefinition", p.classification.variable_definition);
        override_list("obligation", p.classification.obligation);
    }

    auto load_sources = [&](const char* key) {
        for (const std::string& rel : string_list(doc, key, manifest)) {
            fs::path path = resolve(rel);
            SourceFile file = parse_source(read_file(path), path.string());
            for (ScenarioDef& def : file.scenarios) {
                if (def.kind == ScenarioKind::Test) p.test_scenarios.push_back(std::move(def));
                else p.scenarios.push_back(std::move(def));
            }
            for (TestSpec& t : file.tests) p.tests.push_back(std::move(t));
        }
    };
    load_sources("scenarios");
    load_sources("tests");

    for (const std::string& rel : string_list(doc, "features", manifest)) {
        fs::path path = resolve(rel);
        p.features.push_back(gherkin::parse_feature(read_file(path), path.string()));
    }
    for (const std::string& rel : string_list(doc, "bindings", manifest)) {
        fs::path path = resolve(rel);
        for (gherkin::StepBinding& b : gherkin::parse_bindings(read_file(path), path.string()))
            p.bindings.push_back(std::move(b));
    }
    for (const std::string& rel : string_list(doc, "requirements", manifest)) {
        fs::path path = resolve(rel);
        if (!fs::exists(path)) throw Error("IoError", "cannot read " + path.string());
        p.requirement_files.push_back(path);
    }
    if (doc.contains("eventMap")) {
        if (!doc.at("eventMap").is_string()) bad(manifest, "'eventMap' must be a file name");
        fs::path path = resolve(doc.at("eventMap").get<std::string>());
        if (!fs::exists(path)) throw Error("IoError", "cannot read " + path.string());
        p.event_map_file = path;
    }
    return p;
}

std::vector<Diagnostic> validate_project(const Project& project) {
    std::vector<Diagnostic> out = validate_program(project.scenarios, project.decls);
    if (!project.test_scenarios.empty()) {
        std::vector<ScenarioDef> all = project.scenarios;
        all.insert(all.end(), project.test_scenarios.begin(), project.test_scenarios.end());
        std::vector<Diagnostic> base = out;
        for (Diagnostic& d : validate_program(all, project.decls)) {
            bool known = std::any_of(base.begin(), base.end(), [&](const Diagnostic& e) {
                return e.to_string() == d.to_string();
            });
            if (!known) out.push_back(std::move(d));
        }
    }
    for (const TestSpec& t : project.tests)
        for (Diagnostic& d : validate_test(t, project.decls)) out.push_back(std::move(d));

    for (const gherkin::FeatureDoc& f : project.features) {
        for (const gherkin::UsageScenario& sc : f.scenarios) {
            for (const gherkin::Step& st : sc.steps) {
                try {
                    if (!gherkin::find_binding(st, project.bindings))
                        out.push_back({Diagnostic::Severity::Warning, st.loc, "UnboundStep",
                                       "no binding for '" + st.text + "'"});
                } catch (const Error& e) {
                    out.push_back({Diagnostic::Severity::Error, st.loc, e.code(), e.what()});
                }
            }
        }
    }
    return out;
}

}  // namespace scenarioforge
