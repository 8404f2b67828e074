#include "scenarioforge/ceg.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include <json.hpp>

#include "scenarioforge/dsl.hpp"

namespace scenarioforge::ceg {

std::string normalized_key(std::string_view phrase) {
    std::string out;
    bool space = false;
    for (char c : phrase) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

namespace {

struct Input {
    std::string from;
    bool negated;
};

std::vector<Input> inputs_of(const CauseEffectGraph& g, const std::string& node) {
    std::vector<Input> out;
    for (const Edge& e : g.edges)
        if (e.to == node) out.push_back({e.from, e.negated});
    return out;
}

const GateNode* find_gate(const CauseEffectGraph& g, const std::string& id) {
    for (const GateNode& gate : g.gates)
        if (gate.id == id) return &gate;
    return nullptr;
}

std::optional<std::size_t> cause_index(const CauseEffectGraph& g, const std::string& id) {
    for (std::size_t i = 0; i < g.causes.size(); ++i)
        if (g.causes[i].id == id) return i;
    return std::nullopt;
}

bool node_value(const CauseEffectGraph& g, const std::string& id, const std::vector<bool>& a,
                std::map<std::string, bool>& memo) {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    bool v = false;
    if (auto c = cause_index(g, id)) {
        v = a.at(*c);
    } else if (const GateNode* gate = find_gate(g, id)) {
        std::vector<Input> in = inputs_of(g, id);
        v = gate->op == GateOp::And;
        for (const Input& i : in) {
            bool x = node_value(g, i.from, a, memo) != i.negated;
            v = gate->op == GateOp::And ? (v && x) : (v || x);
        }
    } else {
        throw Error("InvalidGraph", "unknown node " + id);
    }
    memo[id] = v;
    return v;
}

}  // namespace

std::vector<bool> CauseEffectGraph::evaluate(const std::vector<bool>& assignment) const {
    std::map<std::string, bool> memo;
    std::vector<bool> out;
    for (const EffectNode& e : effects) {
        std::vector<Input> in = inputs_of(*this, e.id);
        out.push_back(node_value(*this, in.at(0).from, assignment, memo) != in.at(0).negated);
    }
    return out;
}

void CauseEffectGraph::validate() const {
    std::set<std::string> nodes;
    for (const CauseNode& c : causes) nodes.insert(c.id);
    for (const GateNode& g : gates) nodes.insert(g.id);
    std::set<std::string> effect_ids;
    for (const EffectNode& e : effects) effect_ids.insert(e.id);
    for (const Edge& e : edges) {
        if (!nodes.count(e.from)) throw Error("InvalidGraph", "edge from unknown node " + e.from);
        if (!nodes.count(e.to) && !effect_ids.count(e.to)) throw Error("InvalidGraph", "edge to unknown node " + e.to);
        if (cause_index(*this, e.to)) throw Error("InvalidGraph", "edge into cause " + e.to);
    }
    for (const GateNode& g : gates)
        if (inputs_of(*this, g.id).size() < 2) throw Error("InvalidGraph", "gate " + g.id + " has fan-in < 2");
    for (const EffectNode& e : effects)
        if (inputs_of(*this, e.id).size() != 1) throw Error("InvalidGraph", "effect " + e.id + " needs one driver");

    std::map<std::string, int> state;  // 1 visiting, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        if (state[id] == 2) return;
        if (state[id] == 1) throw Error("InvalidGraph", "cycle through " + id);
        state[id] = 1;
        for (const Input& i : inputs_of(*this, id)) visit(i.from);
        state[id] = 2;
    };
    for (const EffectNode& e : effects) visit(e.id);
}

CauseEffectGraph build_graph(const req::CausalExtraction& extraction) {
    CauseEffectGraph g;
    g.requirement_id = extraction.requirement_id;
    std::map<std::string, std::string> by_key;

    // Returns the driving node and the negation parity accumulated on the way.
    std::function<std::pair<std::string, bool>(const req::CauseExpr&)> lower =
        [&](const req::CauseExpr& e) -> std::pair<std::string, bool> {
        switch (e.kind) {
            case req::CauseExpr::Kind::Leaf: {
                std::string key = normalized_key(e.phrase.text);
                if (auto it = by_key.find(key); it != by_key.end()) return {it->second, false};
                std::string id = "C" + std::to_string(g.causes.size() + 1);
                g.causes.push_back({id, e.phrase});
                by_key[key] = id;
                return {id, false};
            }
            case req::CauseExpr::Kind::Not: {
                auto [node, parity] = lower(e.children.at(0));
                return {node, !parity};
            }
            default: {
                std::string id = "G" + std::to_string(g.gates.size() + 1);
                g.gates.push_back({id, e.kind == req::CauseExpr::Kind::And ? GateOp::And : GateOp::Or});
                for (const req::CauseExpr& child : e.children) {
                    auto [node, parity] = lower(child);
                    g.edges.push_back({node, id, parity});
                }
                return {id, false};
            }
        }
    };
    auto [root, parity] = lower(extraction.cause);
    for (const req::Effect& eff : extraction.effects) {
        std::string id = "E" + std::to_string(g.effects.size() + 1);
        g.effects.push_back({id, eff.phrase});
        g.edges.push_back({root, id, parity != eff.negated});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Sensitization
// ---------------------------------------------------------------------------

namespace {

using Partial = std::vector<int>;  // -1 unassigned, 0, 1

std::optional<Partial> merge(const Partial& a, const Partial& b) {
    Partial out = a;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0) continue;
        if (out[i] >= 0 && out[i] != b[i]) return std::nullopt;
        out[i] = b[i];
    }
    return out;
}

void push_unique(std::vector<Partial>& out, Partial p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
}

class Sensitizer {
public:
    explicit Sensitizer(const CauseEffectGraph& g) : g_(g) {}

    std::vector<Partial> run(const std::string& node, bool value) {
        if (auto c = cause_index(g_, node)) {
            Partial p(g_.causes.size(), -1);
            p[*c] = value ? 1 : 0;
            return {p};
        }
        const GateNode* gate = find_gate(g_, node);
        if (!gate) throw Error("InvalidGraph", "unknown node " + node);
        std::vector<Input> in = inputs_of(g_, node);
        std::vector<std::vector<bool>> demands;
        bool alone_value = gate->op == GateOp::Or;  // OR: one input true alone; AND: one input false alone
        if (value == alone_value) {
            for (std::size_t i = 0; i < in.size(); ++i) {
                std::vector<bool> d(in.size(), !alone_value);
                d[i] = alone_value;
                demands.push_back(std::move(d));
            }
        } else {
            demands.emplace_back(in.size(), !alone_value);
        }
        std::vector<Partial> out;
        for (const std::vector<bool>& d : demands)
            for (Partial& p : combine(in, d)) push_unique(out, std::move(p));
        return out;
    }

private:
    // Each input's full sensitization, paired with one compatible vector of
    // every other input.
    std::vector<Partial> combine(const std::vector<Input>& in, const std::vector<bool>& demand) {
        std::vector<std::vector<Partial>> child;
        for (std::size_t i = 0; i < in.size(); ++i) {
            child.push_back(run(in[i].from, demand[i] != in[i].negated));
            if (child.back().empty()) return {};
        }
        std::vector<Partial> out;
        for (std::size_t i = 0; i < in.size(); ++i) {
            for (const Partial& base : child[i]) {
                std::optional<Partial> acc = base;
                for (std::size_t j = 0; j < in.size() && acc; ++j) {
                    if (j == i) continue;
                    std::optional<Partial> next;
                    for (const Partial& option : child[j])
                        if ((next = merge(*acc, option))) break;
                    acc = next;
                }
                if (acc) push_unique(out, std::move(*acc));
            }
        }
        return out;
    }

    const CauseEffectGraph& g_;
};

std::string rule_for(const CauseEffectGraph& g, const Input& driver, bool effect_value) {
    bool node_value = effect_value != driver.negated;
    std::string suffix = node_value ? "-true" : "-false";
    if (const GateNode* gate = find_gate(g, driver.from)) return (gate->op == GateOp::And ? "and" : "or") + suffix;
    return (driver.negated ? "not" : "identity") + std::string(effect_value ? "-true" : "-false");
}

}  // namespace

std::size_t TestSuite::case_count() const {
    std::size_t n = 0;
    for (const RequirementSuite& r : requirements) n += r.cases.size();
    return n;
}

RequirementSuite derive_test_cases(const CauseEffectGraph& graph) {
    if (graph.causes.size() > kMaxCauses)
        throw Error("TooManyCauses", graph.requirement_id + " has " + std::to_string(graph.causes.size()) +
                                         " causes (limit " + std::to_string(kMaxCauses) + ")");
    graph.validate();
    RequirementSuite suite;
    suite.graph = graph;
    Sensitizer sensitizer(graph);
    std::vector<std::vector<bool>> seen;
    for (const EffectNode& effect : graph.effects) {
        Input driver = inputs_of(graph, effect.id).at(0);
        for (bool want : {true, false}) {
            for (const Partial& p : sensitizer.run(driver.from, want != driver.negated)) {
                std::vector<bool> full(p.size());
                for (std::size_t i = 0; i < p.size(); ++i) full[i] = p[i] == 1;
                if (std::find(seen.begin(), seen.end(), full) != seen.end()) continue;
                seen.push_back(full);

                GeneratedTestCase tc;
                tc.requirement_id = graph.requirement_id;
                tc.id = graph.requirement_id + "-" + std::to_string(suite.cases.size() + 1);
                for (std::size_t i = 0; i < full.size(); ++i) tc.assignments[graph.causes[i].id] = full[i];
                std::vector<bool> values = graph.evaluate(full);
                for (std::size_t i = 0; i < values.size(); ++i) tc.expected[graph.effects[i].id] = values[i];
                tc.provenance_rule = rule_for(graph, driver, want);
                suite.cases.push_back(std::move(tc));
            }
        }
    }
    return suite;
}

TestSuite merge_suites(std::vector<RequirementSuite> parts) {
    std::stable_sort(parts.begin(), parts.end(), [](const RequirementSuite& a, const RequirementSuite& b) {
        return a.graph.requirement_id < b.graph.requirement_id;
    });
    return TestSuite{std::move(parts)};
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

std::optional<ExportFormat> parse_export_format(std::string_view name) {
    if (name == "tabular" || name == "csv") return ExportFormat::Tabular;
    if (name == "structured" || name == "json") return ExportFormat::Structured;
    return std::nullopt;
}

namespace {

std::string csv_cell(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string export_tabular(const TestSuite& suite) {
    std::vector<std::string> cause_cols;
    std::vector<std::string> effect_cols;
    std::map<std::string, std::size_t> cause_pos;
    std::map<std::string, std::size_t> effect_pos;
    for (const RequirementSuite& r : suite.requirements) {
        for (const CauseNode& c : r.graph.causes)
            if (cause_pos.emplace(normalized_key(c.phrase.text), cause_cols.size()).second)
                cause_cols.push_back(c.phrase.text);
        for (const EffectNode& e : r.graph.effects)
            if (effect_pos.emplace(normalized_key(e.phrase.text), effect_cols.size()).second)
                effect_cols.push_back(e.phrase.text);
    }
    std::string out = "requirement,case";
    for (const std::string& c : cause_cols) out += "," + csv_cell("cause:" + c);
    for (const std::string& e : effect_cols) out += "," + csv_cell("effect:" + e);
    out += ",rule\n";
    for (const RequirementSuite& r : suite.requirements) {
        for (const GeneratedTestCase& tc : r.cases) {
            std::vector<std::string> causes(cause_cols.size());
            std::vector<std::string> effects(effect_cols.size());
            for (const CauseNode& c : r.graph.causes)
                causes[cause_pos.at(normalized_key(c.phrase.text))] = tc.assignments.at(c.id) ? "1" : "0";
            for (const EffectNode& e : r.graph.effects)
                effects[effect_pos.at(normalized_key(e.phrase.text))] = tc.expected.at(e.id) ? "1" : "0";
            out += csv_cell(tc.requirement_id) + "," + csv_cell(tc.id);
            for (const std::string& v : causes) out += "," + v;
            for (const std::string& v : effects) out += "," + v;
            out += "," + tc.provenance_rule + "\n";
        }
    }
    return out;
}

nlohmann::ordered_json phrase_json(const std::string& id, const req::Phrase& p) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["phrase"] = p.text;
    if (p.variable) j["variable"] = *p.variable;
    if (p.value) j["value"] = *p.value;
    return j;
}

std::string export_structured(const TestSuite& suite) {
    nlohmann::ordered_json reqs = nlohmann::ordered_json::array();
    for (const RequirementSuite& r : suite.requirements) {
        nlohmann::ordered_json j;
        j["requirement"] = r.graph.requirement_id;
        j["causes"] = nlohmann::ordered_json::array();
        for (const CauseNode& c : r.graph.causes) j["causes"].push_back(phrase_json(c.id, c.phrase));
        j["effects"] = nlohmann::ordered_json::array();
        for (const EffectNode& e : r.graph.effects) j["effects"].push_back(phrase_json(e.id, e.phrase));
        j["cases"] = nlohmann::ordered_json::array();
        for (const GeneratedTestCase& tc : r.cases) {
            nlohmann::ordered_json c;
            c["id"] = tc.id;
            c["assignments"] = nlohmann::ordered_json::object();
            for (const CauseNode& cn : r.graph.causes) c["assignments"][cn.id] = tc.assignments.at(cn.id);
            c["expected"] = nlohmann::ordered_json::object();
            for (const EffectNode& en : r.graph.effects) c["expected"][en.id] = tc.expected.at(en.id);
            c["rule"] = tc.provenance_rule;
            j["cases"].push_back(std::move(c));
        }
        reqs.push_back(std::move(j));
    }
    nlohmann::ordered_json doc;
    doc["requirements"] = std::move(reqs);
    return doc.dump(2) + "\n";
}

}  // namespace

std::string export_suite(const TestSuite& suite, ExportFormat format) {
    if (suite.case_count() == 0) throw Error("EmptySuite", "test suite has no cases");
    return format == ExportFormat::Tabular ? export_tabular(suite) : export_structured(suite);
}

std::string export_suite(const TestSuite& suite, std::string_view format) {
    std::optional<ExportFormat> f = parse_export_format(format);
    if (!f) throw Error("UnsupportedFormat", "unsupported export format '" + std::string(format) + "'");
    return export_suite(suite, *f);
}

// ---------------------------------------------------------------------------
// Harness stubs
// ---------------------------------------------------------------------------

EventMap parse_event_map(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("InvalidEventMap", e.what());
    }
    if (!j.is_object()) throw Error("InvalidEventMap", "event map must be a JSON object");
    EventMap out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) throw Error("InvalidEventMap", "value for '" + it.key() + "' must be a string");
        parse_event_template(it.value().get<std::string>());
        out[normalized_key(it.key())] = it.value().get<std::string>();
    }
    return out;
}

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "T_" + out;
    if (is_reserved_word(out)) out += "_";
    return out;
}

const std::string* lookup(const EventMap& map, const std::string& phrase) {
    auto it = map.find(normalized_key(phrase));
    return it == map.end() ? nullptr : &it->second;
}

std::string escape_comment(const std::string& s) {
    std::string out;
    for (char c : s) out += (c == '\n' || c == '\r') ? ' ' : c;
    return out;
}

}  // namespace

std::string emit_harness_stubs(const TestSuite& suite, const EventMap& event_map, const Declarations* decls) {
    std::string out;
    for (const RequirementSuite& r : suite.requirements) {
        for (const GeneratedTestCase& tc : r.cases) {
            std::vector<EventTemplate> triggers;
            std::vector<std::string> lines;
            std::vector<std::string> todos;
            for (const CauseNode& c : r.graph.causes) {
                bool value = tc.assignments.at(c.id);
                const std::string* tmpl = lookup(event_map, c.phrase.text);
                if (!tmpl) {
                    todos.push_back("# TODO cause \"" + escape_comment(c.phrase.text) + "\"" +
                                    (value ? "" : " (negative)"));
                    continue;
                }
                if (!value) {
                    todos.push_back("# cause \"" + escape_comment(c.phrase.text) + "\" is false: not triggered");
                    continue;
                }
                EventTemplate t = parse_event_template(*tmpl);
                auto same = std::find_if(triggers.begin(), triggers.end(), [&](const EventTemplate& x) {
                    return x.sender == t.sender && x.receiver == t.receiver && x.message == t.message;
                });
                if (same == triggers.end()) {
                    triggers.push_back(std::move(t));
                    continue;
                }
                for (std::size_t i = 0; i < std::min(same->args.size(), t.args.size()); ++i)
                    if (t.args[i].kind != TemplateArg::Kind::Wildcard) same->args[i] = t.args[i];
            }
            for (EventTemplate& t : triggers) {
                if (decls) {
                    if (const MessageDecl* m = decls->find_message(t.message)) {
                        for (std::size_t i = 0; i < t.args.size() && i < m->params.size(); ++i)
                            if (t.args[i].kind == TemplateArg::Kind::Wildcard)
                                t.args[i] = TemplateArg::value(ParamValue::default_for(m->params[i]));
                    }
                }
                lines.push_back("trigger " + t.render());
            }
            for (const EffectNode& e : r.graph.effects) {
                bool value = tc.expected.at(e.id);
                const std::string* tmpl = lookup(event_map, e.phrase.text);
                if (!tmpl) {
                    todos.push_back("# TODO effect \"" + escape_comment(e.phrase.text) + "\" expected " +
                                    (value ? "true" : "false"));
                } else if (value) {
                    lines.push_back("eventually " + parse_event_template(*tmpl).render());
                } else {
                    todos.push_back("# expected absent: " + parse_event_template(*tmpl).render());
                }
            }
            out += "test " + sanitize_id(tc.id) + " " + quote_text(tc.id + " (" + tc.provenance_rule + ")") + " {\n";
            for (const std::string& l : lines) out += "  " + l + "\n";
            for (const std::string& l : todos) out += "  " + l + "\n";
            out += "}\n\n";
        }
    }
    if (!out.empty()) out.pop_back();
    return out;
}

}  // namespace scenarioforge::ceg
