#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "scenarioforge/requirements.hpp"
#include "support.hpp"

using namespace scenarioforge;
using namespace scenarioforge::req;

namespace {

std::string ingest_error(const std::string& doc) {
    try {
        ingest_requirements(doc, "r.csv");
    } catch (const Error& e) {
        return e.code() + ": " + e.what();
    }
    return "";
}

CausalExtraction extract(const std::string& text) { return extract_causal(Requirement{"T", text, "", {}, 0}); }

std::string extract_error(const std::string& text) {
    try {
        extract(text);
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

Category category_of(const std::string& text, const ClassificationRules& rules = {}) {
    return classify(Requirement{"T", text, "", {}, 0}, rules);
}

}  // namespace

TEST(Ingest, DelimitedRecords) {
    auto reqs = ingest_requirements(
        "id,category_hint,text\n"
        "A1,x,plain text\n"
        "A2,,\"quoted, with comma and \"\"quotes\"\"\"\n"
        "A3,y,\"spans\ntwo lines\"\n"
        "\n"
        "A4,z,last\n",
        "r.csv");
    ASSERT_EQ(reqs.size(), 4u);
    EXPECT_EQ(reqs[1].text, "quoted, with comma and \"quotes\"");
    EXPECT_EQ(reqs[2].text, "spans\ntwo lines");
    EXPECT_EQ(reqs[0].category_hint, "x");
    EXPECT_EQ(reqs[3].line, 7);
    EXPECT_EQ(reqs[0].category, Category::Unclassified);

    auto two = ingest_requirements("id,text\nB1,only text\n");
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].text, "only text");
    EXPECT_TRUE(two[0].category_hint.empty());
}

TEST(Ingest, Errors) {
    EXPECT_EQ(ingest_error("id,text\nA,x\nA,y\n").substr(0, 11), "DuplicateId");
    EXPECT_EQ(ingest_error("id,text\nA,   \n").substr(0, 9), "EmptyText");
    std::string malformed = ingest_error("id,text\nA,x\nB,\"open\n");
    EXPECT_EQ(malformed.substr(0, 15), "MalformedRecord");
    EXPECT_NE(malformed.find("r.csv:3"), std::string::npos) << malformed;
    EXPECT_EQ(ingest_error("id,text\nA,x,extra,fields\n").substr(0, 15), "MalformedRecord");
    EXPECT_EQ(ingest_error("name,body\nA,x\n").substr(0, 15), "MalformedRecord");
}

TEST(Ingest, PlainTextMode) {
    auto reqs = ingest_plain("first line\n\n  second line  \n");
    ASSERT_EQ(reqs.size(), 2u);
    EXPECT_EQ(reqs[0].id, "R1");
    EXPECT_EQ(reqs[1].id, "R2");
    EXPECT_EQ(reqs[1].text, "second line");

    sftest::TempDir dir("ingest");
    std::ofstream(dir / "reqs.txt") << "If A is on, the B shall be set to C.\n";
    auto from_file = ingest_requirements_file((dir / "reqs.txt").string());
    ASSERT_EQ(from_file.size(), 1u);
    EXPECT_EQ(from_file[0].id, "R1");
    EXPECT_THROW(ingest_requirements_file((dir / "missing.csv").string()), Error);
}

TEST(Classify, Precedence) {
    EXPECT_EQ(category_of("If the plug is connected, the OBC shall provide the interface lock."),
              Category::FunctionalCausal);
    EXPECT_EQ(category_of("The value shall be defined as an integer and be configurable."),
              Category::VariableDefinition);
    EXPECT_EQ(category_of("The timeout shall be configurable at the interface."), Category::Configuration);
    EXPECT_EQ(category_of("The component shall provide the signal."), Category::Interface);
    EXPECT_EQ(category_of("The signal signalName shall be set to InitValue"), Category::FunctionalStatic);
    EXPECT_EQ(category_of("The motor must stop."), Category::FunctionalStatic);
    EXPECT_EQ(category_of("The motor is marshalling data."), Category::Other);
    EXPECT_EQ(category_of("The motor mustard stays."), Category::Other);
}

TEST(Classify, RulesAreOverridable) {
    ClassificationRules rules;
    rules.interface = {"port"};
    rules.obligation = {"will"};
    EXPECT_EQ(category_of("The component will expose port P.", rules), Category::Interface);
    EXPECT_EQ(category_of("The component will stop.", rules), Category::FunctionalStatic);
    EXPECT_EQ(category_of("The component shall stop.", rules), Category::Other);
}

TEST(Classify, BundledCorpusMatchesHandLabels) {
    auto reqs = classify_all(ingest_requirements_file(sftest::bundle("requirements/requirements.csv").string()));
    ASSERT_EQ(reqs.size(), 20u);
    std::map<Category, int> counts;
    for (const Requirement& r : reqs) {
        EXPECT_EQ(std::string(to_string(r.category)), r.category_hint) << r.id << ": " << r.text;
        ++counts[r.category];
    }
    EXPECT_EQ(counts[Category::FunctionalCausal], 8);
    EXPECT_EQ(counts[Category::FunctionalStatic], 5);
    EXPECT_EQ(counts[Category::Interface], 4);
    EXPECT_EQ(counts[Category::Configuration], 1);
    EXPECT_EQ(counts[Category::VariableDefinition], 2);
    auto r09 = std::find_if(reqs.begin(), reqs.end(), [](const Requirement& r) { return r.id == "R09"; });
    ASSERT_NE(r09, reqs.end());
    EXPECT_EQ(r09->text, "The signal signalName shall be set to InitValue");
}

TEST(Patterns, TableIsCompleteAndEveryExampleExtracts) {
    const auto& table = pattern_table();
    ASSERT_EQ(table.size(), 13u);
    std::set<std::string> ids;
    for (const PatternInfo& p : table) {
        ids.insert(p.id);
        EXPECT_FALSE(p.example.empty()) << p.id;
        EXPECT_EQ(match_pattern(p.example), p.id) << p.example;
        CausalExtraction x = extract(p.example);
        EXPECT_EQ(x.pattern_id, p.id);
        ASSERT_EQ(x.cause.kind, CauseExpr::Kind::Leaf) << p.id;
        ASSERT_EQ(x.effects.size(), 1u) << p.id;
        EXPECT_EQ(p.leading, x.effects[0].phrase.text.rfind("The ", 0) != 0) << p.id;
    }
    EXPECT_EQ(ids.size(), 13u);
    EXPECT_EQ(table.front().id, "P01");
    EXPECT_EQ(table.back().id, "P13");
}

TEST(Patterns, LeftmostMarkerWins) {
    EXPECT_EQ(match_pattern("After the motor stopped, the lock shall engage if power is on."), "P06");
    EXPECT_EQ(match_pattern("The OBC shall lock the plug when the plug is connected."), "P09");
    EXPECT_FALSE(match_pattern("The OBC shall lock the plug."));
    EXPECT_FALSE(match_pattern("The iffy whenever parameter."));
}

TEST(Extract, ConjunctionWithValues) {
    CausalExtraction x = extract(
        "If the signal status is RTE_E_OK and the signal value is 3.0, the component shall set the output to "
        "READY_WITH_VENT.");
    EXPECT_EQ(x.pattern_id, "P01");
    EXPECT_EQ(x.cause.render(), "AND(the signal status is RTE_E_OK, the signal value is 3.0)");
    EXPECT_EQ(x.cause.children[0].phrase.variable, "status");
    EXPECT_EQ(x.cause.children[0].phrase.value, "RTE_E_OK");
    EXPECT_EQ(x.cause.children[1].phrase.value, "3.0");
    ASSERT_EQ(x.effects.size(), 1u);
    EXPECT_EQ(x.effects[0].phrase.variable, "output");
    EXPECT_EQ(x.effects[0].phrase.value, "READY_WITH_VENT");
    EXPECT_FALSE(x.effects[0].negated);
}

TEST(Extract, OperatorPrecedenceAndLists) {
    EXPECT_EQ(extract("If the door is open or the light is on and the key is present, the alarm shall sound.").cause.render(),
              "OR(the door is open, AND(the light is on, the key is present))");
    EXPECT_EQ(extract("If A is 1, B is 2 or C is 3, the unit shall set mode to FAST.").cause.render(),
              "OR(A is 1, B is 2, C is 3)");
    EXPECT_EQ(extract("If the plug is connected, the socket is powered and no error is present, the OBC shall start.")
                  .cause.render(),
              "AND(the plug is connected, the socket is powered, NOT(error is present))");
    EXPECT_EQ(extract("When it is not not raining, the roof shall open.").cause.render(), "NOT(NOT(it is raining))");
}

TEST(Extract, EffectsSplitAndNegate) {
    CausalExtraction x = extract(
        "If the plug is not connected, the signal shall be set to IDLE and the OBC shall not lock the plug.");
    ASSERT_EQ(x.effects.size(), 2u);
    EXPECT_EQ(x.effects[0].phrase.variable, "signal");
    EXPECT_EQ(x.effects[0].phrase.value, "IDLE");
    EXPECT_TRUE(x.effects[1].negated);
    EXPECT_EQ(x.effects[1].phrase.text, "the OBC shall lock the plug");

    CausalExtraction y = extract(
        "If the proximity signal is invalid, the OBC shall unlock the charging plug and shall report a pilot error.");
    ASSERT_EQ(y.effects.size(), 2u);
    EXPECT_EQ(y.effects[1].phrase.text, "the OBC shall report a pilot error");
}

TEST(Extract, Errors) {
    EXPECT_EQ(extract_error("The OBC shall lock the plug."), "NotCausal");
    EXPECT_EQ(extract_error("If the plug is connected the OBC shall lock the plug."), "UnparsableCausal");
    EXPECT_EQ(extract_error("If the plug is connected when the power is on, the OBC shall lock the plug."),
              "UnparsableCausal");
    EXPECT_EQ(extract_error("If , the OBC shall lock."), "UnparsableCausal");
}

TEST(Extract, BundledCausalRequirements) {
    auto reqs = classify_all(ingest_requirements_file(sftest::bundle("requirements/requirements.csv").string()));
    std::map<std::string, std::string> patterns;
    for (const Requirement& r : reqs)
        if (r.category == Category::FunctionalCausal) patterns[r.id] = extract_causal(r).pattern_id;
    EXPECT_EQ(patterns, (std::map<std::string, std::string>{{"R01", "P01"}, {"R02", "P03"}, {"R03", "P03"},
                                                            {"R04", "P01"}, {"R05", "P11"}, {"R06", "P04"},
                                                            {"R07", "P06"}, {"R08", "P01"}}));
}
