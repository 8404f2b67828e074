#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "scenarioforge/dsl.hpp"

namespace scenarioforge {

namespace {

constexpr std::array kReserved = {
    "scenario", "component", "intercomponent", "test",  "on",      "request",
    "requestFlex", "waitFor", "block",          "until", "bind",    "param",
    "set",      "when",      "otherwise",      "label", "and",     "or",
    "not",      "true",      "false",          "trigger", "receive", "eventually",
};

enum class Tok { Ident, String, Number, Symbol, End };

struct Token {
    Tok type = Tok::End;
    std::string text;  // identifier, symbol, or decoded string
    double number = 0.0;
    SourceLoc loc;
};

class Lexer {
public:
    Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t;
            t.loc = here();
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.type = Tok::Ident;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t.text += advance();
            } else if (c == '"') {
                t.type = Tok::String;
                t.text = read_string();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && pos_ + 1 < src_.size() &&
                        (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) ||
                         src_[pos_ + 1] == '.'))) {
                t.type = Tok::Number;
                t.number = read_number(t.loc);
            } else {
                t.type = Tok::Symbol;
                static constexpr std::array two = {"->", "==", "!=", "<=", ">="};
                bool matched = false;
                for (std::string_view s : two) {
                    if (src_.substr(pos_, 2) == s) {
                        t.text = std::string(s);
                        advance();
                        advance();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    if (std::string_view("(){}.,*=<>").find(c) == std::string_view::npos)
                        throw SyntaxError("SyntaxError",
                                          std::string("unexpected character '") + c + "'", t.loc);
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    SourceLoc here() const { return SourceLoc{file_, line_, col_}; }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c)) || c == ';') {
                advance();
            } else {
                break;
            }
        }
    }

    std::string read_string() {
        SourceLoc start = here();
        advance();  // opening quote
        std::string out;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n')
                throw SyntaxError("SyntaxError", "unterminated string literal", start);
            char c = advance();
            if (c == '"') return out;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw SyntaxError("SyntaxError", "unterminated string literal", start);
                char e = advance();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default:
                        throw SyntaxError("SyntaxError", std::string("unknown escape '\\") + e + "'",
                                          here());
                }
            } else {
                out += c;
            }
        }
    }

    double read_number(const SourceLoc& loc) {
        std::size_t start = pos_;
        if (src_[pos_] == '-') advance();
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            digits();
        }
        std::string_view text = src_.substr(start, pos_ - start);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw SyntaxError("SyntaxError", "malformed number '" + std::string(text) + "'", loc);
        return value;
    }

    std::string_view src_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    SourceFile parse_file() {
        SourceFile out;
        while (!at_end()) {
            const Token& t = peek();
            if (is_ident("test") && !is_ident_at(1, "scenario")) {
                out.tests.push_back(parse_test());
            } else if (is_ident("scenario") || is_ident("component") ||
                       is_ident("intercomponent") || is_ident("test")) {
                out.scenarios.push_back(parse_scenario());
            } else {
                fail("expected 'scenario' or 'test', found " + describe(t), t.loc);
            }
        }
        return out;
    }

    EventTemplate parse_single_template() {
        EventTemplate t = parse_template();
        if (!at_end()) fail("unexpected " + describe(peek()) + " after event", peek().loc);
        return t;
    }

private:
    // -- token helpers ------------------------------------------------------
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at_end() const { return peek().type == Tok::End; }
    bool is_ident(std::string_view s) const { return is_ident_at(0, s); }
    bool is_ident_at(std::size_t ahead, std::string_view s) const {
        const Token& t = peek(ahead);
        return t.type == Tok::Ident && t.text == s;
    }
    bool is_symbol(std::string_view s) const {
        return peek().type == Tok::Symbol && peek().text == s;
    }
    Token take() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }

    [[noreturn]] static void fail(const std::string& message, const SourceLoc& loc) {
        throw SyntaxError("SyntaxError", message, loc);
    }

    static std::string describe(const Token& t) {
        switch (t.type) {
            case Tok::Ident: return "'" + t.text + "'";
            case Tok::String: return "string " + quote_text(t.text);
            case Tok::Number: return "number " + render_number(t.number);
            case Tok::Symbol: return "'" + t.text + "'";
            case Tok::End: return "end of input";
        }
        return "token";
    }

    void expect_symbol(std::string_view s) {
        if (!is_symbol(s)) fail("expected '" + std::string(s) + "', found " + describe(peek()), peek().loc);
        take();
    }

    void expect_keyword(std::string_view s) {
        if (!is_ident(s)) fail("expected '" + std::string(s) + "', found " + describe(peek()), peek().loc);
        take();
    }

    std::string expect_identifier(std::string_view what) {
        if (peek().type != Tok::Ident)
            fail("expected " + std::string(what) + ", found " + describe(peek()), peek().loc);
        return take().text;
    }

    // -- grammar ----------------------------------------------------------
    ScenarioDef parse_scenario() {
        ScenarioDef def;
        def.loc = peek().loc;
        if (is_ident("component")) {
            def.kind = ScenarioKind::Component;
            take();
        } else if (is_ident("intercomponent")) {
            take();
        } else if (is_ident("test")) {
            def.kind = ScenarioKind::Test;
            take();
        }
        expect_keyword("scenario");
        def.id = expect_identifier("scenario id");
        if (is_ident("on")) {
            take();
            def.trigger = parse_template();
        }
        expect_symbol("{");
        if (is_ident("label")) {
            take();
            if (peek().type != Tok::String) fail("label expects a string", peek().loc);
            def.label = take().text;
        }
        def.body = parse_body();
        return def;
    }

    // Statements up to and including the closing brace.
    std::vector<Statement> parse_body() {
        std::vector<Statement> body;
        while (!is_symbol("}")) {
            if (at_end()) fail("missing '}'", peek().loc);
            body.push_back(parse_statement());
        }
        take();
        return body;
    }

    Statement parse_statement() {
        Statement st;
        st.loc = peek().loc;
        if (peek().type != Tok::Ident) fail("expected statement, found " + describe(peek()), st.loc);
        std::string kw = take().text;
        if (kw == "request" || kw == "requestFlex") {
            st.node = RequestStmt{parse_template(), kw == "requestFlex"};
        } else if (kw == "waitFor") {
            st.node = WaitForStmt{parse_template()};
        } else if (kw == "block") {
            BlockStmt b{parse_template(), std::nullopt};
            if (is_ident("until")) {
                take();
                b.until = parse_template();
            }
            st.node = std::move(b);
        } else if (kw == "bind") {
            BindStmt b;
            b.variable = expect_identifier("variable name");
            expect_symbol("=");
            expect_keyword("param");
            const Token& n = peek();
            if (n.type != Tok::Number || n.number < 0 || n.number != static_cast<double>(static_cast<std::size_t>(n.number)))
                fail("bind expects a non-negative parameter index", n.loc);
            b.param_index = static_cast<std::size_t>(take().number);
            st.node = std::move(b);
        } else if (kw == "set") {
            SetStmt s;
            s.variable = expect_identifier("variable name");
            expect_symbol("=");
            s.value = parse_operand();
            st.node = std::move(s);
        } else if (kw == "when") {
            GuardStmt g;
            g.condition = parse_condition();
            expect_symbol("{");
            g.then_body = parse_body();
            if (is_ident("otherwise")) {
                take();
                expect_symbol("{");
                g.else_body = parse_body();
            }
            st.node = std::move(g);
        } else if (kw == "label") {
            fail("label must be the first line of a scenario body", st.loc);
        } else {
            fail("unknown statement '" + kw + "'", st.loc);
        }
        return st;
    }

    TestSpec parse_test() {
        TestSpec spec;
        spec.loc = peek().loc;
        expect_keyword("test");
        spec.id = expect_identifier("test id");
        if (peek().type == Tok::String) spec.name = take().text;
        expect_symbol("{");
        while (!is_symbol("}")) {
            if (at_end()) fail("missing '}'", peek().loc);
            Directive d;
            d.loc = peek().loc;
            std::string kw = expect_identifier("directive");
            if (kw == "trigger") d.kind = Directive::Kind::Trigger;
            else if (kw == "receive") d.kind = Directive::Kind::Receive;
            else if (kw == "eventually") d.kind = Directive::Kind::Eventually;
            else fail("unknown directive '" + kw + "'", d.loc);
            d.event = parse_template();
            spec.directives.push_back(std::move(d));
        }
        take();
        return spec;
    }

    std::optional<std::string> parse_endpoint() {
        if (is_symbol("*")) {
            take();
            return std::nullopt;
        }
        return expect_identifier("object name or '*'");
    }

    EventTemplate parse_template() {
        EventTemplate t;
        t.sender = parse_endpoint();
        expect_symbol("->");
        t.receiver = parse_endpoint();
        expect_symbol(".");
        t.message = expect_identifier("message name");
        expect_symbol("(");
        if (!is_symbol(")")) {
            while (true) {
                t.args.push_back(parse_arg());
                if (is_symbol(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        expect_symbol(")");
        return t;
    }

    TemplateArg parse_arg() {
        if (is_symbol("*")) {
            take();
            return TemplateArg::wildcard();
        }
        Operand op = parse_operand();
        return op.is_variable ? TemplateArg::var(op.variable) : TemplateArg::value(op.literal);
    }

    Operand parse_operand() {
        const Token& t = peek();
        Operand op;
        switch (t.type) {
            case Tok::String: op.literal = ParamValue::text(take().text); return op;
            case Tok::Number: op.literal = ParamValue::number(take().number); return op;
            case Tok::Ident:
                if (t.text == "true" || t.text == "false") {
                    op.literal = ParamValue::boolean(take().text == "true");
                    return op;
                }
                op.is_variable = true;
                op.variable = take().text;
                return op;
            default: fail("expected value or variable, found " + describe(t), t.loc);
        }
    }

    Condition parse_condition() {
        Condition first = parse_and();
        if (!is_ident("or")) return first;
        Condition node;
        node.kind = Condition::Kind::Or;
        node.children.push_back(std::move(first));
        while (is_ident("or")) {
            take();
            node.children.push_back(parse_and());
        }
        return node;
    }

    Condition parse_and() {
        Condition first = parse_unary();
        if (!is_ident("and")) return first;
        Condition node;
        node.kind = Condition::Kind::And;
        node.children.push_back(std::move(first));
        while (is_ident("and")) {
            take();
            node.children.push_back(parse_unary());
        }
        return node;
    }

    Condition parse_unary() {
        if (is_ident("not")) {
            take();
            Condition node;
            node.kind = Condition::Kind::Not;
            node.children.push_back(parse_unary());
            return node;
        }
        if (is_symbol("(")) {
            take();
            Condition inner = parse_condition();
            expect_symbol(")");
            return inner;
        }
        Condition cmp;
        cmp.lhs = parse_operand();
        const Token& op = peek();
        static constexpr std::array<std::pair<std::string_view, CompareOp>, 6> ops = {{
            {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<", CompareOp::Lt},
            {"<=", CompareOp::Le}, {">", CompareOp::Gt}, {">=", CompareOp::Ge},
        }};
        auto it = std::find_if(ops.begin(), ops.end(), [&](const auto& p) {
            return op.type == Tok::Symbol && op.text == p.first;
        });
        if (it == ops.end()) fail("expected comparison operator, found " + describe(op), op.loc);
        take();
        cmp.op = it->second;
        cmp.rhs = parse_operand();
        return cmp;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

bool is_reserved_word(std::string_view word) {
    return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

SourceFile parse_source(std::string_view text, std::string file_name) {
    Lexer lexer(text, std::move(file_name));
    Parser parser(lexer.run());
    return parser.parse_file();
}

std::vector<ScenarioDef> parse_scenario_source(std::string_view text, std::string file_name) {
    SourceFile file = parse_source(text, std::move(file_name));
    if (!file.tests.empty())
        throw SyntaxError("SyntaxError", "directive tests are not allowed in a scenario source",
                          file.tests.front().loc);
    return std::move(file.scenarios);
}

EventTemplate parse_event_template(std::string_view text) {
    Lexer lexer(text, "<event>");
    Parser parser(lexer.run());
    return parser.parse_single_template();
}

bool operator==(const GuardStmt& a, const GuardStmt& b) {
    return a.condition == b.condition && a.then_body == b.then_body && a.else_body == b.else_body;
}

}  // namespace scenarioforge
