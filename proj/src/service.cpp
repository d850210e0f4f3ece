#include "skewroute/service.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skewroute/io.hpp"
#include "skewroute/router.hpp"

namespace skewroute {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpReply error_reply(int status, std::string_view message) {
    return HttpReply{status, ordered_json{{"error", message}}.dump()};
}

}  // namespace

RouteService::RouteService(std::vector<RouterConfig> configs, NegativePolicy policy)
    : configs_(std::move(configs)), policy_(policy) {
    for (const RouterConfig& cfg : configs_) {
        digests_.push_back(config_digest(cfg));
    }
}

HttpReply RouteService::handle_route(std::string_view body) const {
    const auto started = std::chrono::steady_clock::now();
    if (!configured()) {
        return error_reply(503, "no router config loaded");
    }
    json request = json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (request.is_discarded() || !request.is_object()) {
        return error_reply(400, "request body must be a JSON object");
    }

    const RouterConfig* cfg = &configs_.front();
    if (request.contains("metric") && !request["metric"].is_null()) {
        if (!request["metric"].is_string()) {
            return error_reply(422, "metric override must be a string");
        }
        const std::string name = request["metric"].get<std::string>();
        const auto kind = parse_metric_kind(name);
        cfg = nullptr;
        if (kind) {
            for (const RouterConfig& candidate : configs_) {
                if (candidate.metric().kind() == *kind) {
                    cfg = &candidate;
                    break;
                }
            }
        }
        if (cfg == nullptr) {
            return error_reply(422, "no router config for metric '" + name + "'");
        }
    }

    if (!request.contains("scores") || !request["scores"].is_array()) {
        return error_reply(400, "field 'scores' must be an array of numbers");
    }
    std::vector<double> raw;
    raw.reserve(request["scores"].size());
    for (const json& v : request["scores"]) {
        if (!v.is_number()) {
            return error_reply(400, "field 'scores' must contain only numbers");
        }
        raw.push_back(v.get<double>());
    }

    Decision decision;
    try {
        decision = decide(validate_distribution(raw, policy_), *cfg);
    } catch (const Error& e) {
        return error_reply(400, e.what());
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;
    ordered_json reply;
    reply["arm"] = decision.arm_name;
    reply["difficulty"] = decision.difficulty.value;
    reply["metric"] = std::string(metric_name(decision.metric_kind));
    reply["latency_us"] = std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count();
    return HttpReply{200, reply.dump()};
}

HttpReply RouteService::handle_health() const {
    if (!configured()) {
        return error_reply(503, "no router config loaded");
    }
    ordered_json reply;
    reply["status"] = "ok";
    reply["config_digest"] = digests_.front();
    ordered_json metrics = ordered_json::array();
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        metrics.push_back({{"metric", std::string(metric_name(configs_[i].metric().kind()))}, {"digest", digests_[i]}});
    }
    reply["configs"] = metrics;
    return HttpReply{200, reply.dump()};
}

std::optional<ListenAddress> parse_listen_address(std::string_view text) {
    ListenAddress address;
    std::string_view port_text = text;
    if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
        if (colon > 0) {
            address.host = std::string(text.substr(0, colon));
        }
        port_text = text.substr(colon + 1);
    }
    if (port_text.empty() || port_text.size() > 5) {
        return std::nullopt;
    }
    int port = 0;
    for (char c : port_text) {
        if (c < '0' || c > '9') {
            return std::nullopt;
        }
        port = port * 10 + (c - '0');
    }
    if (port > 65535) {
        return std::nullopt;
    }
    address.port = port;
    return address;
}

ListenAddress resolve_listen_address(const std::optional<std::string>& flag) {
    if (flag) {
        if (auto parsed = parse_listen_address(*flag)) {
            return *parsed;
        }
        throw Error(Errc::InvalidConfig, "invalid listen address '" + *flag + "'");
    }
    if (const char* env = std::getenv("SKEWROUTE_LISTEN"); env != nullptr && *env != '\0') {
        if (auto parsed = parse_listen_address(env)) {
            return *parsed;
        }
        throw Error(Errc::InvalidConfig, std::string("invalid SKEWROUTE_LISTEN '") + env + "'");
    }
    return ListenAddress{};
}

struct HttpServer::Impl {
    std::shared_ptr<const RouteService> service;
    httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const RouteService> service) : impl_(std::make_unique<Impl>()) {
    impl_->service = std::move(service);
    const auto* svc = impl_->service.get();
    const auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    impl_->server.Post("/route", [svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc->handle_route(req.body));
    });
    impl_->server.Get("/healthz", [svc, send](const httplib::Request&, httplib::Response& res) {
        send(res, svc->handle_health());
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const ListenAddress& address) {
    if (address.port == 0) {
        return impl_->server.bind_to_any_port(address.host);
    }
    return impl_->server.bind_to_port(address.host, address.port) ? address.port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace skewroute
