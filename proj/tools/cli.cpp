#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "scenarioforge/ceg.hpp"
#include "scenarioforge/harness.hpp"
#include "scenarioforge/project.hpp"
#include "scenarioforge/requirements.hpp"
#include "scenarioforge/service.hpp"
#include "scenarioforge/simulator.hpp"

namespace scenarioforge::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::shared_ptr<spdlog::logger> logger() {
    auto log = spdlog::get("scenarioforge");
    if (!log) {
        log = spdlog::stderr_color_mt("scenarioforge");
        log->set_pattern("[%l] %v");
    }
    const char* level = std::getenv("SCENARIOFORGE_LOG");
    log->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    return log;
}

struct Options {
    std::string project;
    std::string out = "out";
};

void write_output(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("IoError", "cannot write " + path.string());
    f << content;
    logger()->info("wrote {}", path.string());
}

std::string file_id(const std::string& id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    return out;
}

Project require_project(const Options& opt) {
    if (opt.project.empty()) throw Error("Usage", "--project is required");
    return load_project(opt.project);
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics, std::ostream& err) {
    for (const Diagnostic& d : diagnostics) err << d.to_string() << "\n";
}

// ---------------------------------------------------------------------------
// classify / gen-tests
// ---------------------------------------------------------------------------

struct Classified {
    std::vector<req::Requirement> requirements;
};

Classified classify_files(const std::vector<fs::path>& files, const req::ClassificationRules& rules) {
    Classified c;
    for (const fs::path& f : files)
        for (req::Requirement& r : req::classify_all(req::ingest_requirements_file(f.string()), rules))
            c.requirements.push_back(std::move(r));
    return c;
}

std::string category_table(const std::vector<req::Requirement>& reqs) {
    std::map<req::Category, std::size_t> counts;
    for (const req::Requirement& r : reqs) ++counts[r.category];
    std::ostringstream out;
    out << std::left << std::setw(20) << "category" << std::right << std::setw(6) << "count" << "\n";
    for (req::Category c : {req::Category::FunctionalCausal, req::Category::FunctionalStatic,
                            req::Category::Interface, req::Category::Configuration,
                            req::Category::VariableDefinition, req::Category::Other})
        out << std::left << std::setw(20) << req::to_string(c) << std::right << std::setw(6) << counts[c] << "\n";
    out << std::left << std::setw(20) << "total" << std::right << std::setw(6) << reqs.size() << "\n";
    return out.str();
}

std::string classification_csv(const std::vector<req::Requirement>& reqs) {
    std::string out = "id,category\n";
    for (const req::Requirement& r : reqs) out += r.id + "," + std::string(req::to_string(r.category)) + "\n";
    return out;
}

struct ReqSource {
    std::vector<fs::path> files;
    req::ClassificationRules rules;
    std::optional<fs::path> event_map;
    std::optional<Declarations> decls;
};

ReqSource requirement_source(const Options& opt, const std::string& requirements_file) {
    ReqSource src;
    if (!opt.project.empty()) {
        Project p = load_project(opt.project);
        src.files = p.requirement_files;
        src.rules = p.classification;
        src.event_map = p.event_map_file;
        src.decls = p.decls;
    }
    if (!requirements_file.empty()) src.files = {requirements_file};
    if (src.files.empty()) throw Error("Usage", "no requirements: pass --requirements or a project listing some");
    return src;
}

int cmd_classify(const Options& opt, const std::string& requirements_file, std::ostream& out) {
    ReqSource src = requirement_source(opt, requirements_file);
    Classified c = classify_files(src.files, src.rules);
    out << category_table(c.requirements);
    write_output(fs::path(opt.out) / "classification.csv", classification_csv(c.requirements));
    return kOk;
}

int cmd_gen_tests(const Options& opt, const std::string& requirements_file, std::ostream& out, std::ostream& err) {
    ReqSource src = requirement_source(opt, requirements_file);
    Classified c = classify_files(src.files, src.rules);
    out << category_table(c.requirements);
    write_output(fs::path(opt.out) / "classification.csv", classification_csv(c.requirements));

    std::vector<ceg::RequirementSuite> parts;
    std::size_t unparsable = 0;
    for (const req::Requirement& r : c.requirements) {
        if (r.category != req::Category::FunctionalCausal) continue;
        try {
            req::CausalExtraction x = req::extract_causal(r);
            parts.push_back(ceg::derive_test_cases(ceg::build_graph(x)));
        } catch (const Error& e) {
            ++unparsable;
            err << e.code() << ": " << e.what() << "\n";
        }
    }
    ceg::TestSuite suite = ceg::merge_suites(std::move(parts));
    out << "\n" << std::left << std::setw(20) << "requirement" << std::right << std::setw(6) << "cases" << "\n";
    for (const ceg::RequirementSuite& r : suite.requirements)
        out << std::left << std::setw(20) << r.graph.requirement_id << std::right << std::setw(6) << r.cases.size()
            << "\n";
    out << std::left << std::setw(20) << "total" << std::right << std::setw(6) << suite.case_count() << "\n";
    if (unparsable) out << unparsable << " causal requirement(s) could not be parsed\n";

    if (suite.case_count() == 0) {
        out << "no test cases generated\n";
        return kOk;
    }
    write_output(fs::path(opt.out) / "suite.csv", ceg::export_suite(suite, ceg::ExportFormat::Tabular));
    write_output(fs::path(opt.out) / "suite.json", ceg::export_suite(suite, ceg::ExportFormat::Structured));
    ceg::EventMap map;
    if (src.event_map) map = ceg::parse_event_map(read_file(*src.event_map));
    write_output(fs::path(opt.out) / "stubs.tests",
                 ceg::emit_harness_stubs(suite, map, src.decls ? &*src.decls : nullptr));
    return kOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const Options& opt, bool features, bool tests, std::ostream& out, std::ostream& err) {
    Project project = require_project(opt);
    std::vector<Diagnostic> diagnostics = validate_project(project);
    if (has_errors(diagnostics)) {
        print_diagnostics(diagnostics, err);
        return kFailed;
    }
    Program program = project.program();
    std::vector<TestResult> results;
    bool errors = false;

    if (features) {
        for (const gherkin::FeatureDoc& f : project.features) {
            try {
                gherkin::FeatureResult fr = gherkin::run_feature(f, project.bindings, program);
                for (TestResult& r : fr.scenarios) results.push_back(std::move(r));
            } catch (const Error& e) {
                err << e.code() << ": " << e.what() << "\n";
                errors = true;
            }
        }
    }
    if (tests) {
        for (const TestSpec& t : project.tests) results.push_back(run_test(program, t));
        for (const ScenarioDef& s : project.test_scenarios) results.push_back(run_test_scenario(program, s));
    }

    if (results.empty()) out << "0 tests\n";
    else out << report_summary(results);
    write_output(fs::path(opt.out) / "report.json", report_json(results));
    for (const TestResult& r : results)
        write_output(fs::path(opt.out) / "traces" / (file_id(r.test_id) + ".trace"), serialize_trace(r.trace));

    bool all_pass = std::all_of(results.begin(), results.end(),
                                [](const TestResult& r) { return r.verdict == Verdict::Pass; });
    return all_pass && !errors ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// simulate / diagram / validate
// ---------------------------------------------------------------------------

void print_enabled(const std::vector<sim::EnabledEvent>& enabled, std::ostream& out) {
    for (std::size_t i = 0; i < enabled.size(); ++i) {
        const sim::EnabledEvent& e = enabled[i];
        out << "  [" << i << "] " << e.event.render();
        if (e.external) out << "  (external)";
        if (!e.selectable()) out << "  blocked by " << e.blocked_by.front();
        out << "\n";
    }
}

int repl(sim::SimSession& session, std::istream& in, std::ostream& out) {
    for (;;) {
        auto [revision, enabled] = session.enabled_events();
        if (std::none_of(enabled.begin(), enabled.end(), [](const sim::EnabledEvent& e) { return e.selectable(); })) {
            out << "quiescent after " << session.snapshot().trace.size() << " events\n";
            return kOk;
        }
        out << "revision " << revision << ", enabled events:\n";
        print_enabled(enabled, out);
        out << "choose index, 'a' to run to quiescence, 'q' to quit> " << std::flush;
        std::string line;
        if (!std::getline(in, line) || line == "q") return kOk;
        if (line == "a") {
            for (const TraceEntry& e : session.auto_run()) out << "  " << e.event.render() << "\n";
            continue;
        }
        try {
            std::size_t index = std::stoul(line);
            if (index >= enabled.size()) throw std::out_of_range("index");
            sim::StepResult r = session.step(revision, enabled[index].event_id);
            out << "executed " << r.executed.event.render() << "\n";
        } catch (const Error& e) {
            out << e.code() << ": " << e.what() << "\n";
        } catch (const std::exception&) {
            out << "not a valid choice\n";
        }
    }
}

int cmd_simulate(const Options& opt, const std::string& mode, const std::string& driver_name,
                 const std::string& diagram, const std::string& serve_addr, const std::string& static_dir,
                 std::ostream& out) {
    Project project = require_project(opt);
    if (!serve_addr.empty()) {
        service::RpcService rpc(service::manifest_loader(opt.project));
        std::optional<fs::path> assets;
        if (!static_dir.empty()) assets = static_dir;
        service::HttpServer server(rpc, assets);
        std::size_t colon = serve_addr.rfind(':');
        std::string host = colon == std::string::npos ? "127.0.0.1" : serve_addr.substr(0, colon);
        int port = std::stoi(colon == std::string::npos ? serve_addr : serve_addr.substr(colon + 1));
        int bound = server.bind(host, port);
        out << "serving on http://" << host << ":" << bound << "/rpc\n" << std::flush;
        server.listen();
        return kOk;
    }

    sim::Driver driver = sim::resolve_driver(project, driver_name);
    sim::SimSession session("cli", project.program(), mode == "repl" ? sim::Mode::Manual : sim::Mode::Auto,
                            std::move(driver));
    if (mode == "repl") repl(session, std::cin, out);
    else session.auto_run();

    sim::Snapshot snap = session.snapshot();
    write_output(fs::path(opt.out) / "simulation.trace", serialize_trace(snap.trace));
    if (!diagram.empty()) write_output(fs::path(opt.out) / diagram, session.sequence_diagram());
    out << snap.trace.size() << " events\n";
    return kOk;
}

int cmd_diagram(const Options& opt, const std::string& trace_file, const std::string& file, std::ostream& out) {
    if (!trace_file.empty()) {
        Trace trace = parse_trace(read_file(trace_file));
        write_output(fs::path(opt.out) / (file.empty() ? "sequence.puml" : file), sim::emit_sequence_diagram(trace));
        out << trace.size() << " arrows\n";
        return kOk;
    }
    Project project = require_project(opt);
    write_output(fs::path(opt.out) / (file.empty() ? "components.dot" : file),
                 sim::emit_component_graph(project.scenarios, project.decls));
    out << project.decls.objects().size() << " components\n";
    return kOk;
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
    Project project = require_project(opt);
    std::vector<Diagnostic> diagnostics = validate_project(project);
    print_diagnostics(diagnostics, err);
    std::size_t errors = std::count_if(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
        return d.severity == Diagnostic::Severity::Error;
    });
    out << project.name << ": " << project.scenarios.size() << " scenarios, " << project.tests.size()
        << " tests, " << project.test_scenarios.size() << " test scenarios, " << project.features.size()
        << " features; " << errors << " errors, " << diagnostics.size() - errors << " warnings\n";
    return errors ? kFailed : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Executable scenario specifications: tests, features, CEG test generation and play-out",
                 "scenarioforge"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--project", opt.project, "Project manifest (JSON)");
    app.add_option("--out", opt.out, "Output directory")->capture_default_str();

    std::string requirements_file;
    auto* classify = app.add_subcommand("classify", "Classify requirements into categories");
    classify->add_option("--requirements", requirements_file, "Requirements file (.csv or .txt)");
    auto* gen = app.add_subcommand("gen-tests", "Generate test cases from causal requirements");
    gen->add_option("--requirements", requirements_file, "Requirements file (.csv or .txt)");

    bool features = false;
    bool tests = false;
    bool all = false;
    auto* run_cmd = app.add_subcommand("run", "Run features and tests");
    run_cmd->add_flag("--features", features, "Run feature files");
    run_cmd->add_flag("--tests", tests, "Run directive tests and test scenarios");
    run_cmd->add_flag("--all", all, "Run everything (default)");

    bool repl_mode = false;
    bool auto_mode = false;
    std::string serve_addr;
    std::string static_dir;
    std::string driver;
    std::string diagram;
    auto* simulate = app.add_subcommand("simulate", "Play-out simulation");
    simulate->add_flag("--repl", repl_mode, "Choose events interactively");
    simulate->add_flag("--auto", auto_mode, "Run to quiescence");
    simulate->add_option("--serve", serve_addr, "Serve the wire protocol on host:port");
    simulate->add_option("--static", static_dir, "Directory served at / together with --serve");
    simulate->add_option("--driver", driver, "Test, feature scenario or test scenario feeding external events");
    simulate->add_option("--diagram", diagram, "Write the sequence diagram to this file under --out")
        ->expected(0, 1)
        ->default_str("sequence.puml");

    std::string trace_file;
    std::string diagram_file;
    auto* diagram_cmd = app.add_subcommand("diagram", "Component graph, or sequence diagram of a trace");
    diagram_cmd->add_option("--trace", trace_file, "Trace file to render as a sequence diagram");
    diagram_cmd->add_option("--file", diagram_file, "Output file name under --out");

    auto* validate = app.add_subcommand("validate", "Check the project without running it");

    std::vector<const char*> argv{"scenarioforge"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    logger();
    try {
        if (classify->parsed()) return cmd_classify(opt, requirements_file, out);
        if (gen->parsed()) return cmd_gen_tests(opt, requirements_file, out, err);
        if (run_cmd->parsed()) {
            if (all || (!features && !tests)) features = tests = true;
            return cmd_run(opt, features, tests, out, err);
        }
        if (simulate->parsed()) {
            if (simulate->count("--diagram") && diagram.empty()) diagram = "sequence.puml";
            std::string mode = repl_mode ? "repl" : "auto";
            return cmd_simulate(opt, mode, driver, diagram, serve_addr, static_dir, out);
        }
        if (diagram_cmd->parsed()) return cmd_diagram(opt, trace_file, diagram_file, out);
        if (validate->parsed()) return cmd_validate(opt, out, err);
    } catch (const InvalidProgram& e) {
        print_diagnostics(e.diagnostics(), err);
        return kFailed;
    } catch (const Error& e) {
        err << e.code() << ": " << e.what() << "\n";
        return e.code() == "SuperstepLimitExceeded" || e.code() == "UnboundStep" ? kFailed : kUsage;
    }
    return kUsage;
}

}  // namespace scenarioforge::cli
