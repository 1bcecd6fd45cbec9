#pragma once

#include <string>

namespace blindgate::gateway {

enum class BackendKind { echo, http_proxy };

struct BackendConfig {
    BackendKind kind = BackendKind::echo;
    std::string url;          // http_proxy only; chat-completions endpoint
    int timeout_secs = 30;
};

/// Deterministic stand-in for a model: "echo:" + first 16 hex chars of
/// SHA-384(query) + ":" + query.
std::string echo_answer(const std::string& query);

/// Completes `query` against the configured backend. The http_proxy kind
/// POSTs an OpenAI-style chat-completions body and relays
/// choices[0].message.content verbatim. Throws BACKEND_ERROR on timeout,
/// non-success status or an unparseable upstream reply.
std::string backend_complete(const BackendConfig& config, const std::string& query);

} // namespace blindgate::gateway
