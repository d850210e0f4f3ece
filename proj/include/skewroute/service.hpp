#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewroute/core.hpp"

namespace skewroute {

struct HttpReply {
    int status = 200;
    std::string body;  ///< JSON
};

/// Stateless request handlers for the routing sidecar. Configs are fixed at
/// construction; the first one is the default, the others are reachable
/// through the request's "metric" override. Safe for concurrent use.
class RouteService {
public:
    /// A service with no config answers 503 on every endpoint.
    RouteService() = default;
    explicit RouteService(std::vector<RouterConfig> configs, NegativePolicy policy = NegativePolicy::Reject);

    bool configured() const noexcept { return !configs_.empty(); }

    /// POST /route: {"scores": [...], "metric": optional name}
    ///   -> {"arm", "difficulty", "metric", "latency_us"}
    /// 400 on bad JSON or invalid scores, 422 on an unknown metric override.
    HttpReply handle_route(std::string_view body) const;

    /// GET /healthz: 200 with the loaded config digests, 503 before load.
    HttpReply handle_health() const;

private:
    std::vector<RouterConfig> configs_;
    std::vector<std::string> digests_;
    NegativePolicy policy_ = NegativePolicy::Reject;
};

struct ListenAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// Parses "host:port" (or ":port" / "port", host defaulting to 127.0.0.1).
std::optional<ListenAddress> parse_listen_address(std::string_view text);

/// The flag wins over the SKEWROUTE_LISTEN environment variable, which wins
/// over the default.
ListenAddress resolve_listen_address(const std::optional<std::string>& flag);

/// HTTP/1.1 front end over a RouteService.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<const RouteService> service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port, or -1.
    int bind(const ListenAddress& address);
    /// Blocks until stop() is called.
    bool listen_after_bind();
    void stop();
    /// Blocks until the server is accepting connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace skewroute
