#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#ifndef SCENARIOFORGE_BUNDLE_DIR
#error "SCENARIOFORGE_BUNDLE_DIR must point at the bundled project"
#endif

namespace sftest {

using namespace scenarioforge;

fs::path bundle_dir() { return fs::path(SCENARIOFORGE_BUNDLE_DIR); }

fs::path bundle(const std::string& relative) { return bundle_dir() / relative; }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("sftest_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Declarations toy_declarations() {
    Declarations d;
    d.add_object({"env", ObjectKind::External});
    for (const char* name : {"a", "b", "c"}) d.add_object({name, ObjectKind::UnderSpecification});
    d.add_message({"go", {}});
    d.add_message({"ping", {ParamKind::Number}});
    d.add_message({"note", {ParamKind::Text}});
    d.add_message({"flag", {ParamKind::Boolean}});
    d.add_message({"pair", {ParamKind::Text, ParamKind::Number}});
    return d;
}

Program toy_program(const std::string& source, ExecutionConfig config) {
    return Program::load(parse_scenario_source(source, "toy.scn"), toy_declarations(), config);
}

MessageEvent event(std::string sender, std::string receiver, std::string message,
                   std::vector<ParamValue> params) {
    return MessageEvent{std::move(sender), std::move(receiver), std::move(message), std::move(params)};
}

// ---------------------------------------------------------------------------
// Scenario generator
// ---------------------------------------------------------------------------

namespace {

class Gen {
public:
    explicit Gen(std::mt19937_64& rng) : rng_(rng) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    std::string ident(const char* prefix) {
        static constexpr const char* stems[] = {"cp", "prx", "signal", "lock", "motor", "plug", "x", "val_"};
        return std::string(prefix) + stems[below(std::size(stems))] + std::to_string(below(100));
    }

    std::string text() {
        static constexpr const char alphabet[] = "abcXYZ 019_-.,;:#/\"\\\n\t{}()*";
        std::string out;
        std::size_t len = below(10);
        for (std::size_t i = 0; i < len; ++i) out += alphabet[below(sizeof(alphabet) - 1)];
        return out;
    }

    double number() {
        switch (below(4)) {
            case 0: return static_cast<double>(static_cast<int>(below(2001)) - 1000);
            case 1: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
            case 2: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng_),
                                      static_cast<int>(below(120)) - 60);
            default: return static_cast<double>(below(10)) / 8.0;
        }
    }

    ParamValue literal() {
        switch (below(3)) {
            case 0: return ParamValue::text(text());
            case 1: return ParamValue::number(number());
            default: return ParamValue::boolean(chance(0.5));
        }
    }

    Operand operand() {
        Operand op;
        if (chance(0.4)) {
            op.is_variable = true;
            op.variable = ident("v");
        } else {
            op.literal = literal();
        }
        return op;
    }

    EventTemplate templ() {
        EventTemplate t;
        if (!chance(0.15)) t.sender = ident("o");
        if (!chance(0.15)) t.receiver = ident("o");
        t.message = ident("m");
        std::size_t n = below(4);
        for (std::size_t i = 0; i < n; ++i) {
            switch (below(3)) {
                case 0: t.args.push_back(TemplateArg::wildcard()); break;
                case 1: t.args.push_back(TemplateArg::value(literal())); break;
                default: t.args.push_back(TemplateArg::var(ident("v"))); break;
            }
        }
        return t;
    }

    Condition condition(int depth) {
        Condition c;
        std::size_t pick = depth <= 0 ? 0 : below(4);
        if (pick == 0) {
            c.kind = Condition::Kind::Compare;
            c.op = static_cast<CompareOp>(below(6));
            c.lhs = operand();
            c.rhs = operand();
            return c;
        }
        if (pick == 3) {
            c.kind = Condition::Kind::Not;
            c.children.push_back(condition(depth - 1));
            return c;
        }
        c.kind = pick == 1 ? Condition::Kind::And : Condition::Kind::Or;
        std::size_t n = 2 + below(2);
        for (std::size_t i = 0; i < n; ++i) c.children.push_back(condition(depth - 1));
        return c;
    }

    Statement statement(int depth) {
        Statement st;
        std::size_t pick = below(depth > 0 ? 7 : 6);
        switch (pick) {
            case 0: st.node = RequestStmt{templ(), false}; break;
            case 1: st.node = RequestStmt{templ(), true}; break;
            case 2: st.node = WaitForStmt{templ()}; break;
            case 3: {
                BlockStmt b{templ(), std::nullopt};
                if (chance(0.5)) b.until = templ();
                st.node = std::move(b);
                break;
            }
            case 4: st.node = BindStmt{ident("v"), below(5)}; break;
            case 5: st.node = SetStmt{ident("v"), operand()}; break;
            default: {
                GuardStmt g;
                g.condition = condition(2);
                g.then_body = body(depth - 1, 0);
                if (chance(0.5)) g.else_body = body(depth - 1, 1);
                st.node = std::move(g);
                break;
            }
        }
        return st;
    }

    std::vector<Statement> body(int depth, std::size_t min) {
        std::vector<Statement> out;
        std::size_t n = min + below(4);
        for (std::size_t i = 0; i < n; ++i) out.push_back(statement(depth));
        return out;
    }

private:
    std::mt19937_64& rng_;
};

}  // namespace

ScenarioDef random_scenario(std::mt19937_64& rng, std::size_t index) {
    Gen g(rng);
    ScenarioDef def;
    def.id = g.ident("s") + "_" + std::to_string(index);
    def.kind = static_cast<ScenarioKind>(g.below(3));
    if (def.kind != ScenarioKind::Test && g.chance(0.8)) def.trigger = g.templ();
    if (g.chance(0.7)) def.label = g.text();
    def.body = g.body(2, 1);
    return def;
}

// ---------------------------------------------------------------------------
// Cause generator and oracles
// ---------------------------------------------------------------------------

req::CauseExpr random_cause(std::mt19937_64& rng, std::size_t n, int depth) {
    Gen g(rng);
    std::function<req::CauseExpr(int)> make = [&](int d) -> req::CauseExpr {
        std::size_t pick = d <= 0 ? 0 : g.below(5);
        if (pick <= 1) {
            req::CauseExpr leaf = req::CauseExpr::leaf(req::Phrase{"c" + std::to_string(1 + g.below(n)), {}, {}});
            return g.chance(0.25) ? req::CauseExpr::negate(std::move(leaf)) : leaf;
        }
        if (pick == 2 && d > 0) return req::CauseExpr::negate(make(d - 1));
        std::vector<req::CauseExpr> kids;
        std::size_t k = 2 + g.below(3);
        for (std::size_t i = 0; i < k; ++i) kids.push_back(make(d - 1));
        return req::CauseExpr::gate(pick == 3 ? req::CauseExpr::Kind::And : req::CauseExpr::Kind::Or,
                                    std::move(kids));
    };
    return make(depth);
}

req::CausalExtraction random_extraction(std::mt19937_64& rng, const std::string& id, std::size_t n,
                                        int depth) {
    Gen g(rng);
    req::CausalExtraction x;
    x.requirement_id = id;
    x.pattern_id = "P01";
    x.cause = random_cause(rng, n, depth);
    std::size_t effects = 1 + g.below(3);
    for (std::size_t i = 0; i < effects; ++i)
        x.effects.push_back(req::Effect{req::Phrase{"effect " + std::to_string(i + 1), {}, {}}, g.chance(0.3)});
    return x;
}

bool eval_cause(const req::CauseExpr& expr, const std::map<std::string, bool>& by_phrase) {
    switch (expr.kind) {
        case req::CauseExpr::Kind::Leaf: return by_phrase.at(expr.phrase.text);
        case req::CauseExpr::Kind::Not: return !eval_cause(expr.children.at(0), by_phrase);
        case req::CauseExpr::Kind::And:
            for (const auto& c : expr.children)
                if (!eval_cause(c, by_phrase)) return false;
            return true;
        case req::CauseExpr::Kind::Or:
            for (const auto& c : expr.children)
                if (eval_cause(c, by_phrase)) return true;
            return false;
    }
    return false;
}

bool eval_effect(const req::CausalExtraction& x, std::size_t index, const std::map<std::string, bool>& by_phrase) {
    return eval_cause(x.cause, by_phrase) != x.effects.at(index).negated;
}

std::vector<std::string> leaf_phrases(const req::CauseExpr& expr) {
    std::vector<std::string> out;
    std::function<void(const req::CauseExpr&)> walk = [&](const req::CauseExpr& e) {
        if (e.kind == req::CauseExpr::Kind::Leaf) {
            if (std::find(out.begin(), out.end(), e.phrase.text) == out.end()) out.push_back(e.phrase.text);
            return;
        }
        for (const auto& c : e.children) walk(c);
    };
    walk(expr);
    return out;
}

}  // namespace sftest
