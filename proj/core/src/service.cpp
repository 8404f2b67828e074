#include "scenarioforge/service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace scenarioforge::service {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

ProjectLoader manifest_loader(fs::path default_manifest) {
    return [default_manifest](const std::string& ref) {
        if (ref.empty() || ref == "default") return load_project(default_manifest);
        return load_project(fs::path(ref));
    };
}

namespace {

struct RpcError {
    std::string code;
    std::string message;
};

ordered_json param_json(const ParamValue& v) {
    if (v.is_text()) return v.as_text();
    if (v.is_number()) return v.as_number();
    if (v.is_boolean()) return v.as_boolean();
    return "*";
}

ordered_json event_json(const MessageEvent& e) {
    ordered_json j;
    j["sender"] = e.sender;
    j["receiver"] = e.receiver;
    j["message"] = e.message;
    j["params"] = ordered_json::array();
    for (const ParamValue& p : e.params) j["params"].push_back(param_json(p));
    j["text"] = e.render();
    return j;
}

ordered_json enabled_json(const std::vector<sim::EnabledEvent>& enabled) {
    ordered_json out = ordered_json::array();
    for (const sim::EnabledEvent& e : enabled) {
        ordered_json j;
        j["eventId"] = e.event_id;
        j["event"] = event_json(e.event);
        j["external"] = e.external;
        j["requesters"] = e.requesters;
        j["blockedBy"] = e.blocked_by;
        out.push_back(std::move(j));
    }
    return out;
}

ordered_json states_json(const std::vector<InstanceState>& states) {
    ordered_json out = ordered_json::array();
    for (const InstanceState& s : states) {
        ordered_json j;
        j["instance"] = s.instance;
        j["scenario"] = s.def_id;
        j["status"] = std::string(to_string(s.status));
        j["position"] = s.position;
        j["location"] = s.location.to_string();
        j["bindings"] = ordered_json::object();
        for (const auto& [name, value] : s.bindings) j["bindings"][name] = param_json(value);
        out.push_back(std::move(j));
    }
    return out;
}

ordered_json entry_json(const TraceEntry& e) {
    ordered_json j;
    j["seq"] = e.seq;
    j["superstep"] = e.superstep;
    j["origin"] = std::string(to_string(e.origin));
    j["event"] = event_json(e.event);
    return j;
}

ordered_json trace_json(const Trace& trace) {
    ordered_json out = ordered_json::array();
    for (const TraceEntry& e : trace) out.push_back(entry_json(e));
    return out;
}

const ordered_json& field(const ordered_json& req, const char* name) {
    if (!req.contains(name)) throw RpcError{"BadRequest", std::string("missing field '") + name + "'"};
    return req.at(name);
}

std::string string_field(const ordered_json& req, const char* name) {
    const ordered_json& v = field(req, name);
    if (!v.is_string()) throw RpcError{"BadRequest", std::string("field '") + name + "' must be a string"};
    return v.get<std::string>();
}

}  // namespace

RpcService::RpcService(ProjectLoader loader) : loader_(std::move(loader)) {}

std::string RpcService::handle(std::string_view request_body) {
    ordered_json response;
    std::shared_ptr<sim::SimSession> session;
    try {
        ordered_json req;
        try {
            req = ordered_json::parse(request_body);
        } catch (const nlohmann::json::exception& e) {
            throw RpcError{"BadRequest", e.what()};
        }
        if (!req.is_object()) throw RpcError{"BadRequest", "request must be a JSON object"};
        std::string kind = string_field(req, "kind");
        response["ok"] = true;
        response["kind"] = kind;

        if (kind == "createSession") {
            std::string mode_text = req.value("mode", "manual");
            std::optional<sim::Mode> mode = sim::parse_mode(mode_text);
            if (!mode) throw RpcError{"BadRequest", "unknown mode '" + mode_text + "'"};
            Project project;
            Program program = [&] {
                try {
                    project = loader_(req.value("projectRef", ""));
                    return project.program();
                } catch (const Error& e) {
                    throw RpcError{"InvalidProject", e.what()};
                }
            }();
            sim::Driver driver = sim::resolve_driver(project, req.value("driver", ""));
            session = sessions_.create(std::move(program), *mode, std::move(driver));
            response["sessionId"] = session->id();
            response["mode"] = std::string(sim::to_string(*mode));
            response["revision"] = session->revision();
            return response.dump() + "\n";
        }

        session = sessions_.get(string_field(req, "sessionId"));
        response["sessionId"] = session->id();
        if (kind == "getState") {
            sim::Snapshot snap = session->snapshot();
            response["revision"] = snap.revision;
            response["mode"] = std::string(sim::to_string(session->mode()));
            response["enabled"] = enabled_json(snap.enabled);
            response["scenarioStates"] = states_json(snap.states);
            response["trace"] = trace_json(snap.trace);
        } else if (kind == "step") {
            const ordered_json& rev = field(req, "revision");
            if (!rev.is_number_unsigned()) throw RpcError{"BadRequest", "field 'revision' must be a non-negative integer"};
            std::string event_id = req.contains("eventId") ? string_field(req, "eventId") : "auto";
            sim::StepResult r = session->step(rev.get<std::uint64_t>(), event_id);
            response["revision"] = r.revision;
            response["executed"] = entry_json(r.executed);
            response["enabled"] = enabled_json(r.enabled);
            response["changed"] = states_json(r.changed);
        } else if (kind == "autoRun") {
            Trace segment = session->auto_run();
            response["revision"] = session->revision();
            response["segment"] = trace_json(segment);
        } else if (kind == "reset") {
            response["revision"] = session->reset();
        } else if (kind == "getDiagram") {
            response["revision"] = session->revision();
            response["sequenceDiagram"] = session->sequence_diagram();
            response["componentGraph"] = session->component_graph();
        } else {
            throw RpcError{"BadRequest", "unknown kind '" + kind + "'"};
        }
        return response.dump() + "\n";
    } catch (const RpcError& e) {
        response = ordered_json{{"ok", false}};
        response["revision"] = session ? ordered_json(session->revision()) : ordered_json(nullptr);
        response["error"] = {{"code", e.code}, {"message", e.message}};
    } catch (const Error& e) {
        response = ordered_json{{"ok", false}};
        response["revision"] = session ? ordered_json(session->revision()) : ordered_json(nullptr);
        response["error"] = {{"code", e.code()}, {"message", e.what()}};
    } catch (const std::exception& e) {
        response = ordered_json{{"ok", false}};
        response["revision"] = session ? ordered_json(session->revision()) : ordered_json(nullptr);
        response["error"] = {{"code", "InternalError"}, {"message", e.what()}};
    }
    return response.dump() + "\n";
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    httplib::Server server;
    std::thread thread;
    bool bound = false;
};

HttpServer::HttpServer(RpcService& rpc, std::optional<fs::path> static_dir) : impl_(std::make_unique<Impl>()) {
    impl_->server.Post("/rpc", [&rpc](const httplib::Request& req, httplib::Response& res) {
        res.set_content(rpc.handle(req.body), "application/json");
    });
    // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which lets a
    // second server share an occupied port.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    if (static_dir) impl_->server.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error("BindFailure", "cannot bind " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void HttpServer::listen() {
    if (!impl_->bound) throw Error("BindFailure", "server is not bound");
    impl_->server.listen_after_bind();
}

void HttpServer::start() {
    if (!impl_->bound) throw Error("BindFailure", "server is not bound");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace scenarioforge::service
