#include <gtest/gtest.h>

#include <random>

#include "scenarioforge/kernel.hpp"
#include "support.hpp"

using namespace scenarioforge;
using sftest::event;
using sftest::toy_program;

namespace {

ParamValue num(double v) { return ParamValue::number(v); }
ParamValue txt(std::string v) { return ParamValue::text(std::move(v)); }

std::vector<std::string> rendered(const Trace& t) {
    std::vector<std::string> out;
    for (const TraceEntry& e : t) out.push_back(e.event.render());
    return out;
}

const char* kChain = R"(
    scenario first on env -> a.go() {
      request a -> b.ping(1.0)
      waitFor env -> a.note(*)
      request a -> c.go()
    }
    scenario second on a -> b.ping(*) {
      bind v = param 0
      request b -> c.ping(v)
    }
)";

}  // namespace

TEST(Kernel, TriggerSpawnsAndRequestsRunToQuiescence) {
    Program p = toy_program(kChain);
    p.post_external(event("env", "a", "go"));
    Trace t = p.run_to_quiescence();
    EXPECT_EQ(rendered(t), (std::vector<std::string>{"env -> a.go()", "a -> b.ping(1.0)", "b -> c.ping(1.0)"}));
    EXPECT_EQ(t[0].origin, Origin::Triggered);
    EXPECT_EQ(t[1].origin, Origin::Requested);
    EXPECT_TRUE(p.quiescent());

    auto states = p.scenario_states();
    ASSERT_EQ(states.size(), 2u);
    EXPECT_EQ(states[0].status, InstanceStatus::ActiveAtSync);
    EXPECT_EQ(states[0].position, std::vector<std::size_t>{1});
    EXPECT_EQ(states[1].status, InstanceStatus::Completed);
    ASSERT_EQ(states[1].bindings.size(), 1u);
    EXPECT_EQ(states[1].bindings[0].second, num(1.0));
    EXPECT_EQ(p.sync_points().size(), 1u);

    p.post_external(event("env", "a", "note", {txt("n")}));
    Trace t2 = p.run_to_quiescence();
    EXPECT_EQ(rendered(t2), (std::vector<std::string>{"env -> a.note(\"n\")", "a -> c.go()"}));
    EXPECT_EQ(t2[0].superstep, 1u);
    EXPECT_EQ(t2[1].superstep, 1u);
    EXPECT_EQ(t2[0].seq, 3u);
    EXPECT_EQ(p.scenario_states()[0].status, InstanceStatus::Completed);
    EXPECT_TRUE(p.sync_points().empty());
}

TEST(Kernel, ExternalEventsWaitForTheSuperstepToEnd) {
    Program p = toy_program(kChain);
    p.post_external(event("env", "a", "go"));
    p.post_external(event("env", "a", "note", {txt("early")}));
    auto head = p.choices();
    ASSERT_EQ(head.size(), 1u);
    EXPECT_TRUE(head[0].external);
    p.step();
    auto next = p.choices();
    ASSERT_EQ(next.size(), 1u);
    EXPECT_FALSE(next[0].external);
    EXPECT_EQ(next[0].event.render(), "a -> b.ping(1.0)");
    EXPECT_EQ(next[0].requesters, std::vector<std::string>{"first"});
    Trace t = p.run_to_quiescence();
    EXPECT_EQ(rendered(t).back(), "a -> c.go()");
    EXPECT_EQ(t[2].event.message, "note");
    EXPECT_EQ(t[2].superstep, 1u);
}

TEST(Kernel, PostExternalChecksDeclarations) {
    Program p = toy_program(kChain);
    EXPECT_THROW(p.post_external(event("env", "a", "ping", {ParamValue()})), Error);
    EXPECT_THROW(p.post_external(event("nobody", "a", "go")), Error);
    EXPECT_TRUE(p.pending_external().empty());
}

TEST(FlexibleResolution, RigidValuationAbsorbsMatchingFlexibleRequests) {
    Declarations d = sftest::toy_declarations();
    std::vector<Request> reqs = {
        {event("a", "b", "pair", {ParamValue(), num(2.0)}), true, 5, 0},
        {event("a", "b", "pair", {txt("x"), num(2.0)}), false, 7, 1},
        {event("a", "b", "pair", {txt("y"), num(3.0)}), false, 9, 2},
    };
    auto cands = resolve_flexible_requests(reqs, d);
    ASSERT_EQ(cands.size(), 2u);
    EXPECT_EQ(cands[0].event.render(), "a -> b.pair(\"x\", 2.0)");
    EXPECT_EQ(cands[0].requesters, (std::vector<std::size_t>{1, 0}));
    EXPECT_EQ(cands[0].rank, 5u);
    EXPECT_EQ(cands[1].requesters, std::vector<std::size_t>{2});
}

TEST(FlexibleResolution, FlexibleOnlyGroupsAreDefaultFilled) {
    Declarations d = sftest::toy_declarations();
    std::vector<Request> reqs = {
        {event("a", "b", "pair", {ParamValue(), ParamValue()}), true, 3, 0},
        {event("a", "b", "pair", {txt(""), ParamValue()}), true, 4, 1},
        {event("a", "b", "flag", {ParamValue()}), true, 1, 2},
    };
    auto cands = resolve_flexible_requests(reqs, d);
    ASSERT_EQ(cands.size(), 2u);
    EXPECT_EQ(cands[0].event.render(), "a -> b.flag(false)");
    EXPECT_EQ(cands[1].event.render(), "a -> b.pair(\"\", 0.0)");
    EXPECT_EQ(cands[1].requesters, (std::vector<std::size_t>{0, 1}));
}

TEST(FlexibleResolution, RigidThatDoesNotMatchLeavesFlexibleUnserved) {
    Declarations d = sftest::toy_declarations();
    std::vector<Request> reqs = {
        {event("a", "b", "ping", {num(4.0)}), false, 1, 0},
        {event("a", "b", "note", {ParamValue()}), true, 2, 1},
        {event("a", "b", "ping", {ParamValue()}), true, 3, 2},
    };
    auto cands = resolve_flexible_requests(reqs, d);
    ASSERT_EQ(cands.size(), 2u);
    EXPECT_EQ(cands[0].event.render(), "a -> b.ping(4.0)");
    EXPECT_EQ(cands[0].requesters, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(cands[1].event.render(), "a -> b.note(\"\")");
}

TEST(Kernel, TieBreakFollowsDefinitionOrder) {
    Program p = toy_program(R"(
        scenario late on env -> a.go() { request b -> c.note("late") }
        scenario early on env -> a.go() { request a -> c.note("early") }
    )");
    p.post_external(event("env", "a", "go"));
    p.step();
    auto cs = p.choices();
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(cs[0].requesters, std::vector<std::string>{"late"});
    EXPECT_EQ(rendered(p.run_to_quiescence()),
              (std::vector<std::string>{"b -> c.note(\"late\")", "a -> c.note(\"early\")"}));
}

TEST(Kernel, BlockedRequestsAreListedButNotSelected) {
    Program p = toy_program(R"(
        scenario guard on env -> a.go() {
          block a -> b.ping(*) until env -> a.note(*)
        }
        scenario want on env -> a.go() { request a -> b.ping(5.0) }
    )");
    p.post_external(event("env", "a", "go"));
    Trace t = p.run_to_quiescence();
    EXPECT_EQ(t.size(), 1u);
    auto cs = p.choices();
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_FALSE(cs[0].selectable());
    EXPECT_EQ(cs[0].blocked_by, std::vector<std::string>{"guard"});
    EXPECT_THROW(p.execute(cs[0]), Error);

    p.post_external(event("env", "a", "note", {txt("release")}));
    auto head = p.choices();
    ASSERT_EQ(head.size(), 2u);
    EXPECT_TRUE(head[0].external);
    EXPECT_FALSE(head[1].selectable());
    Trace t2 = p.run_to_quiescence();
    EXPECT_EQ(rendered(t2), (std::vector<std::string>{"env -> a.note(\"release\")", "a -> b.ping(5.0)"}));
}

TEST(Kernel, ExternalEventsIgnoreBlocking) {
    Program p = toy_program(R"(
        scenario guard on env -> a.go() { block env -> a.note(*) waitFor env -> b.go() }
    )");
    p.post_external(event("env", "a", "go"));
    p.post_external(event("env", "a", "note", {txt("x")}));
    EXPECT_EQ(p.run_to_quiescence().size(), 2u);
}

TEST(Kernel, RigidRequestAgainstOwnBlockIsViolated) {
    Program p = toy_program(R"(
        scenario self on env -> a.go() {
          block a -> b.go()
          request a -> b.go()
        }
    )");
    p.post_external(event("env", "a", "go"));
    p.run_to_quiescence();
    auto states = p.scenario_states();
    ASSERT_EQ(states.size(), 1u);
    EXPECT_EQ(states[0].status, InstanceStatus::Violated);
    EXPECT_TRUE(p.sync_points().empty());
}

TEST(Kernel, BlockingSafetyOnRandomPrograms) {
    // Whatever gets executed, no active sync point may block it at that moment.
    const char* messages[] = {"go()", "ping(1.0)", "ping(2.0)", "note(\"x\")", "flag(true)"};
    const char* objects[] = {"a", "b", "c"};
    std::mt19937_64 rng(99);
    auto pick = [&](auto& arr) { return arr[std::uniform_int_distribution<std::size_t>(0, std::size(arr) - 1)(rng)]; };
    int executed = 0;
    for (int round = 0; round < 200; ++round) {
        std::string src;
        for (int s = 0; s < 4; ++s) {
            src += "scenario s" + std::to_string(s) + " on env -> a.go() {\n";
            for (int k = 0; k < 4; ++k) {
                std::string ev = std::string(pick(objects)) + " -> " + pick(objects) + "." + pick(messages);
                switch (rng() % 4) {
                    case 0: src += "  request " + ev + "\n"; break;
                    case 1: src += "  block " + ev + "\n"; break;
                    case 2: src += "  block " + ev + " until a -> b.go()\n"; break;
                    default: src += "  waitFor " + ev + "\n"; break;
                }
            }
            src += "}\n";
        }
        Program p = toy_program(src);
        p.post_external(event("env", "a", "go"));
        p.step();
        for (int guard = 0; guard < 100; ++guard) {
            auto syncs = p.sync_points();
            auto e = p.step();
            if (!e) break;
            ++executed;
            for (const SyncPoint& sp : syncs)
                for (const EventPattern& b : sp.blocked)
                    ASSERT_FALSE(matches(b, e->event)) << src << "\nexecuted " << e->event.render();
        }
    }
    EXPECT_GT(executed, 100);
}

TEST(Kernel, SuperstepLimit) {
    const char* loop = R"(
        scenario start on env -> a.go() { request a -> b.go() }
        scenario again on a -> b.go() { request a -> b.go() }
    )";
    Program p = toy_program(loop);
    p.post_external(event("env", "a", "go"));
    try {
        p.run_to_quiescence();
        FAIL() << "expected SuperstepLimitExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "SuperstepLimitExceeded");
    }
    EXPECT_EQ(p.trace().size(), 10001u);

    ExecutionConfig small;
    small.max_events_per_superstep = 5;
    Program q = toy_program(loop, small);
    q.post_external(event("env", "a", "go"));
    EXPECT_THROW(q.run_to_quiescence(), Error);
    EXPECT_EQ(q.trace().size(), 6u);

    ExecutionConfig zero;
    zero.max_events_per_superstep = 0;
    EXPECT_THROW(toy_program(loop, zero), Error);
}

TEST(Kernel, GuardsChooseBranches) {
    const char* src = R"(
        scenario g on env -> a.pair(*, *) {
          bind t = param 0
          bind n = param 1
          when t == "ok" and n >= 3.0 {
            request a -> b.note("then")
          } otherwise {
            request a -> b.note("else")
          }
          request a -> b.go()
        }
    )";
    for (auto [status, value, expect] : {std::tuple{"ok", 3.0, "then"}, std::tuple{"ok", 2.0, "else"},
                                         std::tuple{"no", 9.0, "else"}, std::tuple{"ok", 3.0 + 1e-12, "then"}}) {
        Program p = toy_program(src);
        p.post_external(event("env", "a", "pair", {txt(status), num(value)}));
        Trace t = p.run_to_quiescence();
        ASSERT_EQ(t.size(), 3u);
        EXPECT_EQ(t[1].event.params[0], txt(expect));
        EXPECT_EQ(t[2].event.message, "go");
    }
}

TEST(Kernel, DeterministicAndCopyable) {
    auto run = [] {
        Program p = toy_program(kChain);
        p.post_external(event("env", "a", "go"));
        p.post_external(event("env", "a", "note", {txt("n")}));
        p.run_to_quiescence();
        return serialize_trace(p.trace());
    };
    EXPECT_EQ(run(), run());

    Program p = toy_program(kChain);
    p.post_external(event("env", "a", "go"));
    p.step();
    Program copy = p;
    p.run_to_quiescence();
    copy.run_to_quiescence();
    EXPECT_EQ(p.trace(), copy.trace());
}

TEST(Kernel, StartScenarioWithoutTrigger) {
    Program p = toy_program("scenario r on env -> a.go() { request a -> b.go() }");
    ScenarioDef t = parse_scenario_source("test scenario t { label \"t\" request env -> a.go() waitFor a -> b.go() }").at(0);
    std::size_t idx = p.add_scenario(t);
    p.start_scenario(idx);
    EXPECT_EQ(p.run_to_quiescence().size(), 2u);
    EXPECT_EQ(p.scenario_states().front().status, InstanceStatus::Completed);
    EXPECT_THROW(p.start_scenario(99), Error);
}

TEST(Trace, SerializeParseRoundTrip) {
    Program p = toy_program(kChain);
    p.post_external(event("env", "a", "go"));
    p.post_external(event("env", "a", "note", {txt("tab\tand \"quote\", comma")}));
    p.run_to_quiescence();
    std::string text = serialize_trace(p.trace());
    EXPECT_EQ(text.substr(0, text.find('\n')), "0\t0\ttriggered\tenv\ta\tgo\t");
    EXPECT_EQ(parse_trace(text), p.trace());
    EXPECT_EQ(serialize_trace(parse_trace(text)), text);
}

TEST(Trace, MalformedInput) {
    EXPECT_THROW(parse_trace("0\t0\ttriggered\ta\tb\n"), SyntaxError);
    EXPECT_THROW(parse_trace("x\t0\ttriggered\ta\tb\tgo\t\n"), SyntaxError);
    EXPECT_THROW(parse_trace("0\t0\tsideways\ta\tb\tgo\t\n"), SyntaxError);
    EXPECT_THROW(parse_trace("0\t0\ttriggered\ta\tb\tping\t*\n"), SyntaxError);
    EXPECT_TRUE(parse_trace("").empty());
}

TEST(Kernel, SingleRequestAfterPilotSignal) {
    // Control-pilot scenario shaped as a single signal-processing chain: after
    // the hardware signal is taken, its software forwarding is the only
    // enabled event.
    Declarations d;
    d.add_object({"chargingSocket", ObjectKind::External});
    d.add_object({"hardwareControl", ObjectKind::UnderSpecification});
    d.add_object({"controlPilot", ObjectKind::UnderSpecification});
    d.add_object({"application", ObjectKind::External});
    d.add_message({"cpSignalHW", {ParamKind::Text, ParamKind::Number}});
    d.add_message({"cpSignalSW", {ParamKind::Text, ParamKind::Number}});
    d.add_message({"evaluatedCpSignal", {ParamKind::Text}});
    auto defs = parse_scenario_source(R"(
        scenario cpSignalProcessing on chargingSocket -> hardwareControl.cpSignalHW(*, *) {
          bind cpStatus = param 0
          bind cpSignalValue = param 1
          requestFlex hardwareControl -> controlPilot.cpSignalSW(cpStatus, cpSignalValue)
          requestFlex controlPilot -> application.evaluatedCpSignal(*)
        }
    )");
    Program p = Program::load(defs, d);
    p.post_external(event("chargingSocket", "hardwareControl", "cpSignalHW", {txt("RTE_E_OK"), num(3.0)}));
    p.step();
    auto cs = p.choices();
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_EQ(cs[0].event.render(), "hardwareControl -> controlPilot.cpSignalSW(\"RTE_E_OK\", 3.0)");
    EXPECT_TRUE(cs[0].selectable());
}
