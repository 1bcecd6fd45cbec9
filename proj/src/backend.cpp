#include "blindgate/backend.hpp"

#include "blindgate/errors.hpp"
#include "blindgate/sha384.hpp"
#include "http_util.hpp"

#include <httplib.h>
#include <json.hpp>

namespace blindgate::gateway {

std::string echo_answer(const std::string& query) {
    return "echo:" + to_hex(sha384(query)).substr(0, 16) + ":" + query;
}

namespace {

std::string proxy_answer(const BackendConfig& config, const std::string& query) {
    detail::SplitUrl url = detail::split_url(config.url, "/v1/chat/completions");
    httplib::Client client(url.base);
    client.set_connection_timeout(config.timeout_secs);
    client.set_read_timeout(config.timeout_secs);

    nlohmann::json body = {
        {"model", "default"},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", query}}})},
    };
    httplib::Result res = client.Post(url.path, body.dump(), "application/json");
    if (!res) {
        throw Error(Errc::backend_error, "backend unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(Errc::backend_error, "backend status " + std::to_string(res->status));
    }
    try {
        nlohmann::json reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::backend_error, std::string("unparseable backend reply: ") + e.what());
    }
}

} // namespace

std::string backend_complete(const BackendConfig& config, const std::string& query) {
    switch (config.kind) {
    case BackendKind::echo:
        return echo_answer(query);
    case BackendKind::http_proxy:
        if (config.url.empty()) throw Error(Errc::bad_config, "http_proxy backend needs a url");
        return proxy_answer(config, query);
    }
    throw Error(Errc::bad_config, "unknown backend kind");
}

} // namespace blindgate::gateway
