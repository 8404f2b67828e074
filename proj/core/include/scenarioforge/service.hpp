#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "scenarioforge/project.hpp"
#include "scenarioforge/simulator.hpp"

namespace scenarioforge::service {

/// Maps a `projectRef` from a createSession request to a loaded project.
using ProjectLoader = std::function<Project(const std::string& project_ref)>;

/// Loader that serves `default_manifest` for an empty ref or "default" and
/// otherwise loads the ref as a manifest path.
ProjectLoader manifest_loader(std::filesystem::path default_manifest);

/// JSON request/response dispatcher for the simulator wire protocol:
/// createSession, getState, step, reset, getDiagram. Transport independent.
class RpcService {
public:
    explicit RpcService(ProjectLoader loader);

    /// Never throws; failures come back as {"ok": false, "error": {code, message}}.
    std::string handle(std::string_view request_body);

private:
    ProjectLoader loader_;
    sim::SessionManager sessions_;
};

/// HTTP transport: POST /rpc with a JSON body; optional static files at /.
class HttpServer {
public:
    explicit HttpServer(RpcService& rpc, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Returns the bound port.
    /// Throws Error("BindFailure").
    int bind(const std::string& host, int port);
    /// Serves until stop(); requires bind().
    void listen();
    /// listen() on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace scenarioforge::service
