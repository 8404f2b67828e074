#include "scenarioforge/requirements.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace scenarioforge::req {

std::string_view to_string(Category category) {
    switch (category) {
        case Category::Unclassified: return "Unclassified";
        case Category::FunctionalCausal: return "FunctionalCausal";
        case Category::FunctionalStatic: return "FunctionalStatic";
        case Category::Interface: return "Interface";
        case Category::Configuration: return "Configuration";
        case Category::VariableDefinition: return "VariableDefinition";
        case Category::Other: return "Other";
    }
    return "Other";
}

std::optional<Category> parse_category(std::string_view text) {
    for (Category c : {Category::Unclassified, Category::FunctionalCausal, Category::FunctionalStatic,
                       Category::Interface, Category::Configuration, Category::VariableDefinition,
                       Category::Other})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Collapses whitespace runs and strips trailing sentence punctuation.
std::string normalize(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += c;
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';')) out.pop_back();
    return trim(out);
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Position of `word` (a phrase of whole words) in `hay` at or after `from`.
std::size_t find_word(std::string_view hay, std::string_view word, std::size_t from = 0) {
    std::size_t pos = hay.find(word, from);
    while (pos != std::string_view::npos) {
        bool left = pos == 0 || !is_word_char(hay[pos - 1]);
        std::size_t end = pos + word.size();
        bool right = end >= hay.size() || !is_word_char(hay[end]);
        if (left && right) return pos;
        pos = hay.find(word, pos + 1);
    }
    return std::string_view::npos;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

// Splits on a whole-word separator such as "and".
std::vector<std::string> split_on_word(const std::string& s, std::string_view word) {
    std::vector<std::string> parts;
    std::string l = lower(s);
    std::size_t start = 0;
    std::size_t pos = find_word(l, word);
    while (pos != std::string::npos) {
        parts.push_back(trim(std::string_view(s).substr(start, pos - start)));
        start = pos + word.size();
        pos = find_word(l, word, start);
    }
    parts.push_back(trim(std::string_view(s).substr(start)));
    return parts;
}

[[noreturn]] void unparsable(const std::string& id, const std::string& why, std::string_view span) {
    throw Error("UnparsableCausal", id + ": " + why + " in \"" + std::string(span) + "\"");
}

// ---------------------------------------------------------------------------
// Delimited records
// ---------------------------------------------------------------------------

struct Record {
    std::vector<std::string> fields;
    int line = 0;
};

std::vector<Record> read_records(std::string_view text, const std::string& file_name) {
    std::vector<Record> records;
    Record cur;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    int line = 1;
    cur.line = 1;
    auto end_field = [&] {
        cur.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        bool blank = cur.fields.size() == 1 && trim(cur.fields[0]).empty();
        if (!blank) records.push_back(std::move(cur));
        cur = Record{};
        cur.line = line;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started && trim(field).empty()) {
            field.clear();
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            ++line;
            end_record();
        } else {
            field += c;
            if (!std::isspace(static_cast<unsigned char>(c))) field_started = true;
        }
    }
    if (quoted)
        throw Error("MalformedRecord", SourceLoc{file_name, cur.line, 1}.to_string() + ": unterminated quoted field");
    if (!field.empty() || !cur.fields.empty()) end_record();
    return records;
}

void check_unique(const std::vector<Requirement>& reqs) {
    std::set<std::string> seen;
    for (const Requirement& r : reqs)
        if (!seen.insert(r.id).second) throw Error("DuplicateId", "DuplicateId(" + r.id + ")");
}

}  // namespace

std::vector<Requirement> ingest_requirements(std::string_view document, std::string file_name) {
    std::vector<Record> records = read_records(document, file_name);
    std::vector<Requirement> out;
    if (records.empty()) return out;

    const Record& header = records.front();
    std::vector<std::string> cols;
    for (const std::string& f : header.fields) cols.push_back(lower(trim(f)));
    bool with_hint = cols.size() == 3 && cols[0] == "id" && cols[1] == "category_hint" && cols[2] == "text";
    bool without_hint = cols.size() == 2 && cols[0] == "id" && cols[1] == "text";
    if (!with_hint && !without_hint)
        throw Error("MalformedRecord", SourceLoc{file_name, header.line, 1}.to_string() +
                                           ": expected header 'id,category_hint,text' or 'id,text'");

    for (std::size_t i = 1; i < records.size(); ++i) {
        const Record& rec = records[i];
        if (rec.fields.size() != cols.size())
            throw Error("MalformedRecord", SourceLoc{file_name, rec.line, 1}.to_string() + ": expected " +
                                               std::to_string(cols.size()) + " fields, found " +
                                               std::to_string(rec.fields.size()));
        Requirement r;
        r.id = trim(rec.fields[0]);
        r.category_hint = with_hint ? trim(rec.fields[1]) : std::string();
        r.text = trim(rec.fields.back());
        r.line = rec.line;
        if (r.id.empty())
            throw Error("MalformedRecord", SourceLoc{file_name, rec.line, 1}.to_string() + ": empty id");
        if (r.text.empty()) throw Error("EmptyText", "EmptyText(" + r.id + ")");
        out.push_back(std::move(r));
    }
    check_unique(out);
    return out;
}

std::vector<Requirement> ingest_plain(std::string_view document) {
    std::vector<Requirement> out;
    std::istringstream in{std::string(document)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string text = trim(line);
        if (text.empty()) continue;
        Requirement r;
        r.id = "R" + std::to_string(out.size() + 1);
        r.text = std::move(text);
        r.line = n;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Requirement> ingest_requirements_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    bool plain = path.size() >= 4 && lower(path.substr(path.size() - 4)) == ".txt";
    return plain ? ingest_plain(buf.str()) : ingest_requirements(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Pattern table
// ---------------------------------------------------------------------------

const std::vector<PatternInfo>& pattern_table() {
    static const std::vector<PatternInfo> table = {
        {"P01", "if", true, "If <cause>, <effect>", "If the plug is connected, the OBC shall lock the plug."},
        {"P02", "if", true, "If <cause>[,] then <effect>", "If the plug is connected then the OBC shall lock the plug."},
        {"P03", "when", true, "When <cause>, <effect>", "When the plug is connected, the OBC shall lock the plug."},
        {"P04", "in case of", true, "In case of <cause>, <effect>", "In case of an overcurrent, the OBC shall open the relay."},
        {"P05", "as soon as", true, "As soon as <cause>, <effect>", "As soon as the plug is locked, the OBC shall start charging."},
        {"P06", "after", true, "After <cause>, <effect>", "After the session ended, the OBC shall unlock the plug."},
        {"P07", "while", true, "While <cause>, <effect>", "While charging is active, the OBC shall keep the plug locked."},
        {"P08", "if", false, "<effect> if <cause>", "The OBC shall lock the plug if the plug is connected."},
        {"P09", "when", false, "<effect> when <cause>", "The OBC shall lock the plug when the plug is connected."},
        {"P10", "in case of", false, "<effect> in case of <cause>", "The OBC shall open the relay in case of an overcurrent."},
        {"P11", "as soon as", false, "<effect> as soon as <cause>", "The OBC shall start charging as soon as the plug is locked."},
        {"P12", "after", false, "<effect> after <cause>", "The OBC shall unlock the plug after the session ended."},
        {"P13", "while", false, "<effect> while <cause>", "The OBC shall keep the plug locked while charging is active."},
    };
    return table;
}

namespace {

constexpr std::array<std::string_view, 6> kMarkers = {"in case of", "as soon as", "if", "when", "after", "while"};

std::string_view leading_id(std::string_view marker, bool then_form) {
    if (marker == "if") return then_form ? "P02" : "P01";
    if (marker == "when") return "P03";
    if (marker == "in case of") return "P04";
    if (marker == "as soon as") return "P05";
    if (marker == "after") return "P06";
    return "P07";
}

std::string_view trailing_id(std::string_view marker) {
    if (marker == "if") return "P08";
    if (marker == "when") return "P09";
    if (marker == "in case of") return "P10";
    if (marker == "as soon as") return "P11";
    if (marker == "after") return "P12";
    return "P13";
}

struct ModalHit {
    std::size_t pos = std::string::npos;
    std::string_view word;
};

ModalHit find_modal(std::string_view l, std::size_t from = 0) {
    ModalHit best;
    for (std::string_view m : {std::string_view("shall"), std::string_view("must")}) {
        std::size_t p = find_word(l, m, from);
        if (p < best.pos) best = {p, m};
    }
    return best;
}

struct MarkerHit {
    std::string_view marker;
    std::size_t pos = std::string::npos;
    bool leading = false;
};

std::optional<MarkerHit> find_marker(std::string_view l) {
    for (std::string_view m : kMarkers)
        if (l.size() > m.size() && l.substr(0, m.size()) == m && !is_word_char(l[m.size()]))
            return MarkerHit{m, 0, true};
    ModalHit modal = find_modal(l);
    if (modal.pos == std::string::npos) return std::nullopt;
    std::optional<MarkerHit> best;
    for (std::string_view m : kMarkers) {
        std::size_t p = find_word(l, m, modal.pos);
        if (p != std::string::npos && (!best || p < best->pos)) best = MarkerHit{m, p, false};
    }
    return best;
}

bool has_then_before_modal(std::string_view l) {
    ModalHit modal = find_modal(l);
    std::size_t t = find_word(l, "then");
    return t != std::string::npos && t < modal.pos;
}

std::optional<std::string_view> nested_marker(std::string_view l) {
    for (std::string_view m : kMarkers)
        if (find_word(l, m) != std::string::npos) return m;
    return std::nullopt;
}

bool contains_ci(const std::string& lower_text, const std::vector<std::string>& keys) {
    return std::any_of(keys.begin(), keys.end(),
                       [&](const std::string& k) { return lower_text.find(lower(k)) != std::string::npos; });
}

}  // namespace

std::optional<std::string> match_pattern(std::string_view text) {
    std::string l = lower(normalize(text));
    std::optional<MarkerHit> hit = find_marker(l);
    if (!hit) return std::nullopt;
    if (hit->leading) return std::string(leading_id(hit->marker, hit->marker == "if" && has_then_before_modal(l)));
    return std::string(trailing_id(hit->marker));
}

Category classify(const Requirement& req, const ClassificationRules& rules) {
    if (match_pattern(req.text)) return Category::FunctionalCausal;
    std::string l = lower(req.text);
    if (contains_ci(l, rules.variable_definition)) return Category::VariableDefinition;
    if (contains_ci(l, rules.configuration)) return Category::Configuration;
    if (contains_ci(l, rules.interface)) return Category::Interface;
    for (const std::string& w : rules.obligation)
        if (find_word(l, lower(w)) != std::string::npos) return Category::FunctionalStatic;
    return Category::Other;
}

std::vector<Requirement> classify_all(std::vector<Requirement> reqs, const ClassificationRules& rules) {
    for (Requirement& r : reqs) r.category = classify(r, rules);
    return reqs;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

CauseExpr CauseExpr::leaf(Phrase p) {
    CauseExpr e;
    e.kind = Kind::Leaf;
    e.phrase = std::move(p);
    return e;
}

CauseExpr CauseExpr::negate(CauseExpr child) {
    CauseExpr e;
    e.kind = Kind::Not;
    e.children.push_back(std::move(child));
    return e;
}

CauseExpr CauseExpr::gate(Kind kind, std::vector<CauseExpr> children) {
    CauseExpr e;
    e.kind = kind;
    e.children = std::move(children);
    return e;
}

std::string CauseExpr::render() const {
    if (kind == Kind::Leaf) return phrase.text;
    std::string out = kind == Kind::And ? "AND(" : kind == Kind::Or ? "OR(" : "NOT(";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += ", ";
        out += children[i].render();
    }
    return out + ")";
}

namespace {

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

Phrase make_phrase(const std::string& raw) {
    Phrase p;
    p.text = normalize(raw);
    std::string l = lower(p.text);
    std::size_t is = find_word(l, "is");
    if (is != std::string::npos) {
        std::vector<std::string> lhs = split_words(std::string_view(p.text).substr(0, is));
        std::string rhs = trim(std::string_view(p.text).substr(is + 2));
        if (!lhs.empty() && !rhs.empty()) {
            p.variable = lhs.back();
            p.value = strip_quotes(rhs);
        }
    }
    return p;
}

CauseExpr parse_not(const std::string& id, const std::string& s) {
    std::vector<std::string> words = split_words(s);
    std::size_t negations = 0;
    std::string rest;
    for (const std::string& w : words) {
        std::string lw = lower(w);
        if (lw == "not" || lw == "no") {
            ++negations;
            continue;
        }
        if (!rest.empty()) rest += ' ';
        rest += w;
    }
    if (normalize(rest).empty()) unparsable(id, "empty cause", s);
    CauseExpr e = CauseExpr::leaf(make_phrase(rest));
    for (std::size_t i = 0; i < negations; ++i) e = CauseExpr::negate(std::move(e));
    return e;
}

CauseExpr parse_and(const std::string& id, const std::string& s) {
    std::vector<std::string> parts = split_on_word(s, "and");
    if (parts.size() == 1) return parse_not(id, s);
    std::vector<CauseExpr> children;
    for (const std::string& p : parts) {
        if (p.empty()) unparsable(id, "dangling 'and'", s);
        children.push_back(parse_not(id, p));
    }
    return CauseExpr::gate(CauseExpr::Kind::And, std::move(children));
}

CauseExpr parse_or(const std::string& id, const std::string& s) {
    std::vector<std::string> parts = split_on_word(s, "or");
    if (parts.size() == 1) return parse_and(id, s);
    std::vector<CauseExpr> children;
    for (const std::string& p : parts) {
        if (p.empty()) unparsable(id, "dangling 'or'", s);
        children.push_back(parse_and(id, p));
    }
    return CauseExpr::gate(CauseExpr::Kind::Or, std::move(children));
}

// Comma lists ("A, B and C") take the connector of their final item.
CauseExpr parse_cause(const std::string& id, const std::string& raw) {
    std::string s = normalize(raw);
    if (s.empty()) unparsable(id, "empty condition", raw);
    std::vector<std::string> items;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) items.push_back(trim(item));
    if (items.size() > 1) {
        std::string last = items.back();
        std::string ll = lower(last);
        std::string connector;
        if (ll.rfind("and ", 0) == 0) connector = "and";
        else if (ll.rfind("or ", 0) == 0) connector = "or";
        if (!connector.empty()) {
            items.back() = trim(std::string_view(last).substr(connector.size()));
        } else {
            // "A, B or C": the last item carries the connector inside it
            std::size_t a = find_word(ll, "and");
            std::size_t o = find_word(ll, "or");
            if (a == std::string::npos && o == std::string::npos)
                unparsable(id, "comma-separated condition list without final 'and'/'or'", s);
            connector = a < o ? "and" : "or";
        }
        std::string joined;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].empty()) unparsable(id, "empty item in condition list", s);
            if (i) joined += " " + connector + " ";
            joined += items[i];
        }
        s = joined;
    }
    return parse_or(id, s);
}

Effect make_effect(const std::string& subject, std::string_view modal, std::string predicate) {
    Effect e;
    std::vector<std::string> words = split_words(predicate);
    if (!words.empty() && lower(words.front()) == "not") {
        e.negated = true;
        words.erase(words.begin());
    }
    predicate.clear();
    for (const std::string& w : words) predicate += (predicate.empty() ? "" : " ") + w;
    e.phrase.text = normalize(subject + " " + std::string(modal) + " " + predicate);

    std::string lp = lower(predicate);
    std::size_t to = find_word(lp, "to");
    if (lp.rfind("set ", 0) == 0 && to != std::string::npos) {
        std::vector<std::string> target = split_words(std::string_view(predicate).substr(4, to - 4));
        std::string value = normalize(std::string_view(predicate).substr(to + 2));
        if (!target.empty() && !value.empty()) {
            e.phrase.variable = target.back();
            e.phrase.value = strip_quotes(value);
        }
    } else if (lp.rfind("be set to ", 0) == 0) {
        std::vector<std::string> subj = split_words(subject);
        std::string value = normalize(std::string_view(predicate).substr(10));
        if (!subj.empty() && !value.empty()) {
            e.phrase.variable = subj.back();
            e.phrase.value = strip_quotes(value);
        }
    }
    return e;
}

std::vector<Effect> parse_effects(const std::string& id, const std::string& raw) {
    std::string s = normalize(raw);
    std::vector<std::string> parts = split_on_word(s, "and");
    std::vector<Effect> effects;
    std::string subject;
    std::string_view modal;
    for (const std::string& part : parts) {
        if (part.empty()) unparsable(id, "dangling 'and' in effect", s);
        std::string lp = lower(part);
        ModalHit hit = find_modal(lp);
        if (hit.pos != std::string::npos) {
            std::string subj = normalize(std::string_view(part).substr(0, hit.pos));
            if (subj.empty() && subject.empty()) unparsable(id, "effect without subject", part);
            if (!subj.empty()) subject = subj;
            modal = hit.word;
            effects.push_back(make_effect(subject, modal, trim(std::string_view(part).substr(hit.pos + hit.word.size()))));
        } else if (subject.empty()) {
            unparsable(id, "effect without 'shall'/'must'", part);
        } else {
            effects.push_back(make_effect(subject, modal, part));
        }
    }
    return effects;
}

}  // namespace

CausalExtraction extract_causal(const Requirement& req) {
    std::string text = normalize(req.text);
    std::string l = lower(text);
    std::optional<MarkerHit> hit = find_marker(l);
    if (!hit) throw Error("NotCausal", req.id + " has no causal marker");

    CausalExtraction out;
    out.requirement_id = req.id;
    std::string cause_text;
    std::string effect_text;

    if (hit->leading) {
        std::size_t body_start = hit->marker.size();
        ModalHit modal = find_modal(l, body_start);
        if (modal.pos == std::string::npos) unparsable(req.id, "no 'shall'/'must' effect clause", text);
        bool then_form = hit->marker == "if" && has_then_before_modal(l);
        if (then_form) {
            std::size_t t = find_word(l, "then");
            std::size_t last = t;
            while ((t = find_word(l, "then", t + 1)) != std::string::npos && t < modal.pos) last = t;
            cause_text = text.substr(body_start, last - body_start);
            effect_text = text.substr(last + 4);
        } else {
            std::size_t comma = l.rfind(',', modal.pos);
            if (comma == std::string::npos || comma < body_start)
                unparsable(req.id, "missing comma between condition and effect",
                           std::string_view(text).substr(0, modal.pos));
            cause_text = text.substr(body_start, comma - body_start);
            effect_text = text.substr(comma + 1);
        }
        out.pattern_id = std::string(leading_id(hit->marker, then_form));
    } else {
        effect_text = text.substr(0, hit->pos);
        cause_text = text.substr(hit->pos + hit->marker.size());
        out.pattern_id = std::string(trailing_id(hit->marker));
    }

    if (auto m = nested_marker(lower(cause_text)))
        unparsable(req.id, "nested conditional '" + std::string(*m) + "'", cause_text);
    if (auto m = nested_marker(lower(effect_text)))
        unparsable(req.id, "nested conditional '" + std::string(*m) + "'", effect_text);

    out.cause = parse_cause(req.id, cause_text);
    out.effects = parse_effects(req.id, effect_text);
    if (out.effects.empty()) unparsable(req.id, "no effect", effect_text);
    return out;
}

}  // namespace scenarioforge::req
