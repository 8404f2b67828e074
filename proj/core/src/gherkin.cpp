#include "scenarioforge/gherkin.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

namespace scenarioforge::gherkin {

std::string_view to_string(Keyword keyword) {
    switch (keyword) {
        case Keyword::Given: return "Given";
        case Keyword::When: return "When";
        case Keyword::Then: return "Then";
        case Keyword::And: return "And";
        case Keyword::But: return "But";
    }
    return "Given";
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::Given: return "given";
        case Role::When: return "when";
        case Role::Then: return "then";
    }
    return "given";
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool starts_with_word(std::string_view line, std::string_view word) {
    return line.size() > word.size() && line.substr(0, word.size()) == word &&
           line[word.size()] == ' ';
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    return lines;
}

}  // namespace

FeatureDoc parse_feature(std::string_view text, std::string file_name) {
    FeatureDoc doc;
    doc.file = file_name;
    bool have_feature = false;
    std::vector<std::string> lines = split_lines(text);
    static const std::array<std::pair<std::string_view, Keyword>, 5> step_words = {{
        {"Given", Keyword::Given}, {"When", Keyword::When}, {"Then", Keyword::Then},
        {"And", Keyword::And}, {"But", Keyword::But},
    }};

    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string line = trim(lines[n]);
        SourceLoc loc{file_name, static_cast<int>(n + 1), 1};
        if (line.empty() || line.front() == '#') continue;

        if (line.rfind("Feature:", 0) == 0) {
            if (have_feature) throw SyntaxError("DuplicateFeature", "only one Feature per file", loc);
            have_feature = true;
            doc.name = trim(std::string_view(line).substr(8));
            continue;
        }
        if (!have_feature) throw SyntaxError("MissingFeature", "file must start with 'Feature:'", loc);

        if (line.rfind("Scenario:", 0) == 0) {
            UsageScenario sc;
            sc.name = trim(std::string_view(line).substr(9));
            sc.loc = loc;
            doc.scenarios.push_back(std::move(sc));
            continue;
        }

        auto word = std::find_if(step_words.begin(), step_words.end(),
                                 [&](const auto& w) { return starts_with_word(line, w.first); });
        if (word != step_words.end()) {
            if (doc.scenarios.empty())
                throw SyntaxError("StepBeforeScenario", "step outside of a Scenario", loc);
            UsageScenario& sc = doc.scenarios.back();
            Step step;
            step.keyword = word->second;
            step.text = trim(std::string_view(line).substr(word->first.size()));
            step.loc = loc;
            switch (step.keyword) {
                case Keyword::Given: step.role = Role::Given; break;
                case Keyword::When: step.role = Role::When; break;
                case Keyword::Then: step.role = Role::Then; break;
                default:
                    if (sc.steps.empty())
                        throw SyntaxError("DanglingConjunction",
                                          "'" + std::string(word->first) + "' needs a preceding step", loc);
                    step.role = sc.steps.back().role;
            }
            sc.steps.push_back(std::move(step));
            continue;
        }

        if (doc.scenarios.empty()) {
            auto colon = line.find(':');
            bool keyword_like = colon != std::string::npos &&
                                line.find(' ') > colon;  // "Background:", "Examples:"
            if (keyword_like) throw SyntaxError("UnknownKeyword", "unsupported keyword in '" + line + "'", loc);
            doc.description.push_back(line);
            continue;
        }
        throw SyntaxError("UnknownKeyword", "unknown keyword in '" + line + "'", loc);
    }

    if (!have_feature) throw SyntaxError("MissingFeature", "file must start with 'Feature:'", {file_name, 1, 1});
    if (doc.scenarios.empty())
        throw SyntaxError("MissingScenario", "feature '" + doc.name + "' has no Scenario", {file_name, 1, 1});
    return doc;
}

std::string format_feature(const FeatureDoc& doc) {
    std::string out = "Feature: " + doc.name + "\n";
    for (const std::string& d : doc.description) out += "  " + d + "\n";
    for (const UsageScenario& sc : doc.scenarios) {
        out += "\n  Scenario: " + sc.name + "\n";
        for (const Step& st : sc.steps)
            out += "    " + std::string(to_string(st.keyword)) + " " + st.text + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bindings
// ---------------------------------------------------------------------------

namespace {

enum class Slot { Text, Number };

struct CompiledPattern {
    std::regex regex;
    std::vector<Slot> slots;
};

CompiledPattern compile_pattern(const std::string& pattern) {
    CompiledPattern out;
    std::string re = "^";
    static const std::string special = R"(\^$.|?*+()[]{})";
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern.compare(i, 6, "{text}") == 0) {
            re += R"(("(?:[^"\\]|\\.)*"|.+?))";
            out.slots.push_back(Slot::Text);
            i += 6;
        } else if (pattern.compare(i, 8, "{number}") == 0) {
            re += R"((-?[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?))";
            out.slots.push_back(Slot::Number);
            i += 8;
        } else {
            if (special.find(pattern[i]) != std::string::npos) re += '\\';
            re += pattern[i++];
        }
    }
    re += "$";
    out.regex = std::regex(re);
    return out;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) ++i;
            out += s[i];
        }
        return out;
    }
    return s;
}

// Splits on `sep` outside double-quoted strings.
std::vector<std::string> split_unquoted(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quoted && c == '\\' && i + 1 < s.size()) {
            cur += c;
            cur += s[++i];
            continue;
        }
        if (c == '"') quoted = !quoted;
        if (c == sep && !quoted) {
            out.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    out.push_back(std::move(cur));
    return out;
}

std::set<std::size_t> capture_refs(const std::string& event) {
    std::set<std::size_t> refs;
    bool quoted = false;
    for (std::size_t i = 0; i < event.size(); ++i) {
        if (event[i] == '"' && (i == 0 || event[i - 1] != '\\')) quoted = !quoted;
        if (quoted || event[i] != '$') continue;
        std::size_t j = i + 1;
        while (j < event.size() && std::isdigit(static_cast<unsigned char>(event[j]))) ++j;
        if (j > i + 1) refs.insert(std::stoul(event.substr(i + 1, j - i - 1)));
    }
    return refs;
}

std::string substitute(const std::string& event, const std::vector<ParamValue>& captures) {
    std::string out;
    bool quoted = false;
    for (std::size_t i = 0; i < event.size(); ++i) {
        if (event[i] == '"' && (i == 0 || event[i - 1] != '\\')) quoted = !quoted;
        if (!quoted && event[i] == '$') {
            std::size_t j = i + 1;
            while (j < event.size() && std::isdigit(static_cast<unsigned char>(event[j]))) ++j;
            if (j > i + 1) {
                std::size_t k = std::stoul(event.substr(i + 1, j - i - 1));
                if (k == 0 || k > captures.size())
                    throw Error("CaptureMismatch", "capture $" + std::to_string(k) + " does not exist");
                out += captures[k - 1].render();
                i = j - 1;
                continue;
            }
        }
        out += event[i];
    }
    return out;
}

std::string escape_pattern(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string_view directive_word(BindingDirective::Kind kind) {
    switch (kind) {
        case BindingDirective::Kind::Trigger: return "trigger";
        case BindingDirective::Kind::WaitFor: return "waitFor";
        case BindingDirective::Kind::Eventually: return "eventually";
    }
    return "trigger";
}

}  // namespace

std::size_t StepBinding::capture_count() const { return compile_pattern(pattern).slots.size(); }

bool StepBinding::match(std::string_view text, std::vector<ParamValue>* captures) const {
    CompiledPattern compiled = compile_pattern(pattern);
    std::smatch m;
    std::string subject(text);
    if (!std::regex_match(subject, m, compiled.regex)) return false;
    if (captures) {
        captures->clear();
        for (std::size_t i = 0; i < compiled.slots.size(); ++i) {
            std::string raw = m[i + 1].str();
            if (compiled.slots[i] == Slot::Number) captures->push_back(ParamValue::number(std::stod(raw)));
            else captures->push_back(ParamValue::text(unquote(raw)));
        }
    }
    return true;
}

std::vector<StepBinding> parse_bindings(std::string_view text, std::string file_name) {
    std::vector<StepBinding> out;
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string line = trim(lines[n]);
        SourceLoc loc{file_name, static_cast<int>(n + 1), 1};
        if (line.empty() || line.front() == '#') continue;

        StepBinding b;
        b.loc = loc;
        std::size_t sp = line.find(' ');
        std::string role = line.substr(0, sp);
        if (role == "given") b.role = Role::Given;
        else if (role == "when") b.role = Role::When;
        else if (role == "then") b.role = Role::Then;
        else throw SyntaxError("SyntaxError", "binding must start with given, when or then", loc);

        std::size_t q = line.find('"', sp == std::string::npos ? line.size() : sp);
        if (q == std::string::npos) throw SyntaxError("SyntaxError", "missing quoted step pattern", loc);
        std::size_t i = q + 1;
        bool closed = false;
        for (; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size()) {
                b.pattern += line[++i];
            } else if (line[i] == '"') {
                closed = true;
                ++i;
                break;
            } else {
                b.pattern += line[i];
            }
        }
        if (!closed) throw SyntaxError("SyntaxError", "unterminated step pattern", loc);
        std::string rest = trim(std::string_view(line).substr(i));
        if (rest.rfind("->", 0) != 0) throw SyntaxError("SyntaxError", "expected '->' after pattern", loc);
        rest = trim(std::string_view(rest).substr(2));

        std::set<std::size_t> refs;
        for (const std::string& part : split_unquoted(rest, ';')) {
            std::string d = trim(part);
            if (d.empty()) continue;
            BindingDirective bd;
            std::size_t s = d.find(' ');
            std::string kw = d.substr(0, s);
            if (kw == "trigger") bd.kind = BindingDirective::Kind::Trigger;
            else if (kw == "waitFor" || kw == "receive") bd.kind = BindingDirective::Kind::WaitFor;
            else if (kw == "eventually") bd.kind = BindingDirective::Kind::Eventually;
            else throw SyntaxError("SyntaxError", "unknown directive '" + kw + "'", loc);
            if (s == std::string::npos) throw SyntaxError("SyntaxError", "directive without event", loc);
            bd.event = trim(std::string_view(d).substr(s + 1));
            bool trigger = bd.kind == BindingDirective::Kind::Trigger;
            if ((b.role == Role::Then) == trigger)
                throw SyntaxError("RoleDirectiveMismatch",
                                  b.role == Role::Then ? "then bindings may only waitFor/eventually"
                                                       : "given/when bindings may only trigger",
                                  loc);
            std::set<std::size_t> r = capture_refs(bd.event);
            refs.insert(r.begin(), r.end());
            // Syntax check with placeholder values.
            std::vector<ParamValue> probe;
            std::size_t max_ref = r.empty() ? 0 : *r.rbegin();
            for (std::size_t k = 0; k < max_ref; ++k) probe.push_back(ParamValue::text(""));
            try {
                parse_event_template(substitute(bd.event, probe));
            } catch (const SyntaxError& e) {
                throw SyntaxError("SyntaxError", std::string("bad event in directive: ") + e.what(), loc);
            }
            b.directives.push_back(std::move(bd));
        }

        std::size_t count = b.capture_count();
        if (!b.directives.empty()) {
            std::set<std::size_t> expected;
            for (std::size_t k = 1; k <= count; ++k) expected.insert(k);
            if (refs != expected)
                throw SyntaxError("CaptureMismatch",
                                  "pattern has " + std::to_string(count) +
                                      " captures; directives must reference each of them exactly",
                                  loc);
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::string format_bindings(const std::vector<StepBinding>& bindings) {
    std::string out;
    for (const StepBinding& b : bindings) {
        out += std::string(to_string(b.role)) + " \"" + escape_pattern(b.pattern) + "\" ->";
        for (std::size_t i = 0; i < b.directives.size(); ++i) {
            out += i ? "; " : " ";
            out += std::string(directive_word(b.directives[i].kind)) + " " + b.directives[i].event;
        }
        out += "\n";
    }
    return out;
}

const StepBinding* find_binding(const Step& step, const std::vector<StepBinding>& bindings) {
    std::vector<const StepBinding*> hits;
    for (const StepBinding& b : bindings)
        if (b.role == step.role && b.match(step.text)) hits.push_back(&b);
    if (hits.empty()) return nullptr;
    if (hits.size() > 1) {
        std::string msg = "step '" + step.text + "' matches " + std::to_string(hits.size()) + " bindings:";
        for (const StepBinding* b : hits) msg += "\n  " + b->loc.to_string() + " \"" + b->pattern + "\"";
        throw Error("AmbiguousBinding", msg);
    }
    return hits.front();
}

SkeletonFile generate_skeletons(const FeatureDoc& feature, const std::vector<StepBinding>& bindings) {
    SkeletonFile out;
    std::set<std::pair<Role, std::string>> seen;
    for (const UsageScenario& sc : feature.scenarios) {
        for (const Step& st : sc.steps) {
            if (find_binding(st, bindings)) continue;
            if (!seen.insert({st.role, st.text}).second) continue;
            StepBinding stub;
            stub.role = st.role;
            stub.pattern = st.text;
            stub.loc = st.loc;
            out.stubs.push_back(std::move(stub));
        }
    }
    if (out.stubs.empty()) return out;
    out.text = "# Step skeletons for feature: " + feature.name + "\n";
    for (const StepBinding& stub : out.stubs) {
        out.text += "\n# TODO: add directives for this step\n";
        out.text += format_bindings({stub});
    }
    return out;
}

TestSpec compile_scenario(const FeatureDoc& feature, std::size_t scenario_index,
                          const std::vector<StepBinding>& bindings) {
    const UsageScenario& sc = feature.scenarios.at(scenario_index);
    TestSpec spec;
    spec.id = feature.name + "/" + sc.name;
    spec.name = sc.name;
    spec.loc = sc.loc;
    for (const Step& st : sc.steps) {
        const StepBinding* b = find_binding(st, bindings);
        if (!b)
            throw Error("UnboundStep", st.loc.to_string() + ": no binding for " +
                                           std::string(to_string(st.keyword)) + " " + st.text);
        std::vector<ParamValue> captures;
        b->match(st.text, &captures);
        for (const BindingDirective& bd : b->directives) {
            Directive d;
            d.loc = st.loc;
            d.event = parse_event_template(substitute(bd.event, captures));
            switch (bd.kind) {
                case BindingDirective::Kind::Trigger: d.kind = Directive::Kind::Trigger; break;
                case BindingDirective::Kind::WaitFor: d.kind = Directive::Kind::Receive; break;
                case BindingDirective::Kind::Eventually: d.kind = Directive::Kind::Eventually; break;
            }
            spec.directives.push_back(std::move(d));
        }
    }
    return spec;
}

bool FeatureResult::passed() const {
    return std::all_of(scenarios.begin(), scenarios.end(),
                       [](const TestResult& r) { return r.verdict == Verdict::Pass; });
}

FeatureResult run_feature(const FeatureDoc& feature, const std::vector<StepBinding>& bindings,
                          const Program& program) {
    std::vector<TestSpec> specs;
    for (std::size_t i = 0; i < feature.scenarios.size(); ++i)
        specs.push_back(compile_scenario(feature, i, bindings));
    FeatureResult result;
    result.feature = feature.name;
    for (const TestSpec& spec : specs) result.scenarios.push_back(run_test(program, spec));
    return result;
}

}  // namespace scenarioforge::gherkin
