#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include "scenarioforge/service.hpp"
#include "support.hpp"

using namespace scenarioforge;
using nlohmann::json;

namespace {

service::RpcService bundled_service() {
    return service::RpcService(service::manifest_loader(sftest::bundle("project.json")));
}

json call(service::RpcService& rpc, const json& request) {
    std::string body = rpc.handle(request.dump());
    EXPECT_FALSE(body.empty());
    EXPECT_EQ(body.back(), '\n');
    return json::parse(body);
}

std::string error_code(const json& response) {
    EXPECT_FALSE(response.at("ok").get<bool>());
    return response.at("error").at("code").get<std::string>();
}

}  // namespace

TEST(Rpc, CreateSessionAndGetState) {
    auto rpc = bundled_service();
    json created = call(rpc, {{"kind", "createSession"}, {"mode", "manual"}});
    ASSERT_TRUE(created["ok"].get<bool>());
    EXPECT_EQ(created["sessionId"], "s1");
    EXPECT_EQ(created["mode"], "manual");
    EXPECT_EQ(created["revision"], 0);

    json state = call(rpc, {{"kind", "getState"}, {"sessionId", "s1"}});
    ASSERT_TRUE(state["ok"].get<bool>());
    EXPECT_EQ(state["revision"], 0);
    ASSERT_EQ(state["enabled"].size(), 1u);
    const json& head = state["enabled"][0];
    EXPECT_EQ(head["eventId"], "e0");
    EXPECT_TRUE(head["external"].get<bool>());
    EXPECT_EQ(head["event"]["message"], "connectChargingPlug");
    EXPECT_EQ(head["event"]["params"], json::array({"A", "A"}));
    EXPECT_EQ(head["event"]["text"], "vehicleUser -> chargingSocket.connectChargingPlug(\"A\", \"A\")");
    EXPECT_TRUE(state["trace"].empty());
    EXPECT_TRUE(state["scenarioStates"].is_array());
}

TEST(Rpc, StepAutoRunResetAndDiagram) {
    auto rpc = bundled_service();
    call(rpc, {{"kind", "createSession"}});

    json step = call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", 0}, {"eventId", "e0"}});
    ASSERT_TRUE(step["ok"].get<bool>());
    EXPECT_EQ(step["revision"], 1);
    EXPECT_EQ(step["executed"]["seq"], 0);
    EXPECT_EQ(step["executed"]["origin"], "triggered");
    EXPECT_TRUE(step["changed"].empty());  // nothing reacts to the plug event itself

    json second = call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", 1}, {"eventId", "e0"}});
    EXPECT_EQ(second["executed"]["event"]["message"], "cpSignalHW");
    EXPECT_FALSE(second["changed"].empty());

    json stale = call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", 0}});
    EXPECT_EQ(error_code(stale), "StaleRevision");
    EXPECT_EQ(stale["revision"], 2);

    json missing = call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", 2}, {"eventId", "e9"}});
    EXPECT_EQ(missing["revision"], 2);
    EXPECT_EQ(error_code(missing), "NotEnabled");

    json run = call(rpc, {{"kind", "autoRun"}, {"sessionId", "s1"}});
    EXPECT_EQ(run["revision"], 3);
    EXPECT_EQ(run["segment"].size(), 7u);

    json diagram = call(rpc, {{"kind", "getDiagram"}, {"sessionId", "s1"}});
    EXPECT_EQ(diagram["sequenceDiagram"], sftest::slurp(sftest::bundle("golden/sequence.puml")));
    EXPECT_EQ(diagram["componentGraph"], sftest::slurp(sftest::bundle("golden/components.dot")));

    json reset = call(rpc, {{"kind", "reset"}, {"sessionId", "s1"}});
    EXPECT_EQ(reset["revision"], 4);
    EXPECT_TRUE(call(rpc, {{"kind", "getState"}, {"sessionId", "s1"}})["trace"].empty());
}

TEST(Rpc, StepWithoutEventIdTakesTieBreak) {
    auto rpc = bundled_service();
    call(rpc, {{"kind", "createSession"}, {"mode", "auto"}});
    json step = call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", 0}});
    EXPECT_EQ(step["executed"]["event"]["message"], "connectChargingPlug");
}

TEST(Rpc, Errors) {
    auto rpc = bundled_service();
    EXPECT_EQ(error_code(json::parse(rpc.handle("{not json"))), "BadRequest");
    EXPECT_EQ(error_code(json::parse(rpc.handle("[1]"))), "BadRequest");
    EXPECT_EQ(error_code(call(rpc, {{"mode", "manual"}})), "BadRequest");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "dance"}, {"sessionId", "s1"}})), "UnknownSession");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "createSession"}, {"mode", "fast"}})), "BadRequest");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "createSession"}, {"projectRef", "/nonexistent/p.json"}})),
              "InvalidProject");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "createSession"}, {"driver", "ghost"}})), "UnknownDriver");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "getState"}, {"sessionId", "s9"}})), "UnknownSession");

    call(rpc, {{"kind", "createSession"}});
    json bad_kind = call(rpc, {{"kind", "dance"}, {"sessionId", "s1"}});
    EXPECT_EQ(error_code(bad_kind), "BadRequest");
    EXPECT_EQ(bad_kind["revision"], 0);
    EXPECT_EQ(error_code(call(rpc, {{"kind", "step"}, {"sessionId", "s1"}, {"revision", -1}})), "BadRequest");
    EXPECT_EQ(error_code(call(rpc, {{"kind", "step"}, {"sessionId", "s1"}})), "BadRequest");
    json null_rev = call(rpc, {{"kind", "getState"}, {"sessionId", 3}});
    EXPECT_EQ(error_code(null_rev), "BadRequest");
    EXPECT_TRUE(null_rev["revision"].is_null());
}

TEST(Rpc, SessionsAreIndependent) {
    auto rpc = bundled_service();
    call(rpc, {{"kind", "createSession"}});
    call(rpc, {{"kind", "createSession"}, {"driver", "plugInterlockTest"}});
    call(rpc, {{"kind", "autoRun"}, {"sessionId", "s1"}});
    EXPECT_EQ(call(rpc, {{"kind", "getState"}, {"sessionId", "s1"}})["revision"], 1);
    json s2 = call(rpc, {{"kind", "getState"}, {"sessionId", "s2"}});
    EXPECT_EQ(s2["revision"], 0);
    EXPECT_TRUE(s2["trace"].empty());
    ASSERT_FALSE(s2["enabled"].empty());
    EXPECT_FALSE(s2["enabled"][0]["external"].get<bool>());
    EXPECT_EQ(s2["enabled"][0]["requesters"], json::array({"plugInterlockTest"}));
}

TEST(Http, ServesRpcOverPost) {
    auto rpc = bundled_service();
    service::HttpServer server(rpc);
    int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    server.start();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/rpc", json{{"kind", "createSession"}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["sessionId"], "s1");

    auto state = client.Post("/rpc", json{{"kind", "getState"}, {"sessionId", "s1"}}.dump(), "application/json");
    ASSERT_TRUE(state);
    EXPECT_EQ(json::parse(state->body)["enabled"].size(), 1u);
    server.stop();
}

TEST(Http, BindFailures) {
    auto rpc = bundled_service();
    service::HttpServer first(rpc);
    int port = first.bind("127.0.0.1", 0);
    first.start();
    service::HttpServer second(rpc);
    try {
        second.bind("127.0.0.1", port);
        FAIL() << "second bind succeeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "BindFailure");
    }
    service::HttpServer unbound(rpc);
    EXPECT_THROW(unbound.start(), Error);
}
