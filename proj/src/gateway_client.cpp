#include "blindgate/gateway_client.hpp"

#include "blindgate/encoding.hpp"

#include <httplib.h>
#include <json.hpp>

namespace blindgate::client {

using nlohmann::json;

namespace {

// The server names codes with the same strings errc_name() produces; map
// them back so callers can switch on Errc.
Errc errc_from_name(const std::string& name) {
    static const std::pair<const char*, Errc> table[] = {
        {"NOT_INVERTIBLE", Errc::not_invertible},
        {"DEGENERATE_MODULUS", Errc::degenerate_modulus},
        {"MALFORMED_BLINDED", Errc::malformed_blinded},
        {"INVALID_BLIND_SIGNATURE", Errc::invalid_blind_signature},
        {"MALFORMED_PLAN", Errc::malformed_plan},
        {"MALFORMED_INFO", Errc::malformed_info},
        {"AUTH_FAILED", Errc::auth_failed},
        {"CONFLICT", Errc::conflict},
        {"INSUFFICIENT_CREDITS", Errc::insufficient_credits},
        {"WRONG_DEADLINE", Errc::wrong_deadline},
        {"TOKEN_LIMIT", Errc::token_limit},
        {"INVALID_SIGNATURE", Errc::invalid_signature},
        {"DOUBLE_SPEND", Errc::double_spend},
        {"EXPIRED_INFO", Errc::expired_info},
        {"BACKEND_ERROR", Errc::backend_error},
        {"STORAGE_FAILURE", Errc::storage_failure},
        {"NETWORK", Errc::network},
        {"BAD_CONFIG", Errc::bad_config},
    };
    for (const auto& [n, c] : table) {
        if (name == n) return c;
    }
    return Errc::network;
}

std::string need_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw Error(Errc::network, std::string("server reply lacks string field ") + key);
    }
    return it->get<std::string>();
}

} // namespace

struct GatewayClient::Impl {
    httplib::Client http;

    Impl(const std::string& base_url, int timeout_secs) : http(base_url) {
        http.set_connection_timeout(timeout_secs, 0);
        http.set_read_timeout(timeout_secs, 0);
        http.set_write_timeout(timeout_secs, 0);
        http.enable_server_certificate_verification(false); // test deployments self-sign
    }

    json request(const std::string& path, const std::optional<json>& body,
                 std::size_t* request_bytes = nullptr, std::size_t* response_bytes = nullptr) {
        httplib::Result res;
        if (body) {
            std::string payload = body->dump();
            if (request_bytes) *request_bytes = payload.size();
            res = http.Post(path, payload, "application/json");
        } else {
            if (request_bytes) *request_bytes = 0;
            res = http.Get(path);
        }
        if (!res) {
            throw Error(Errc::network, "request to " + path + " failed: " +
                                           httplib::to_string(res.error()));
        }
        if (response_bytes) *response_bytes = res->body.size();
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(Errc::network, "non-JSON reply from " + path);
        }
        if (res->status < 200 || res->status >= 300) {
            std::string code = j.value("error", "");
            std::string message = j.value("message", "HTTP " + std::to_string(res->status));
            throw Error(errc_from_name(code), message);
        }
        return j;
    }
};

GatewayClient::GatewayClient(std::string base_url, int timeout_secs)
    : base_url_(std::move(base_url)), impl_(std::make_unique<Impl>(base_url_, timeout_secs)) {}

GatewayClient::~GatewayClient() = default;

ServerKey GatewayClient::fetch_pk() {
    json j = impl_->request("/v1/pk", std::nullopt);
    ServerKey key;
    auto bits = j.find("bits");
    if (bits == j.end() || !bits->is_number_unsigned()) {
        throw Error(Errc::network, "server key reply lacks bits");
    }
    key.pk.bits = bits->get<std::size_t>();
    try {
        key.pk.n = decode_int(need_string(j, "n"), key.pk.bits);
    } catch (const std::invalid_argument& e) {
        throw Error(Errc::network, std::string("bad modulus encoding: ") + e.what());
    }
    if (key.pk.n.bit_length() != key.pk.bits) {
        throw Error(Errc::network, "advertised bits disagree with modulus");
    }
    return key;
}

std::string GatewayClient::register_account(const std::string& user, const std::string& secret) {
    json j = impl_->request("/v1/account/register", json{{"user", user}, {"secret", secret}});
    return need_string(j, "session");
}

std::string GatewayClient::login(const std::string& user, const std::string& secret) {
    json j = impl_->request("/v1/account/login", json{{"user", user}, {"secret", secret}});
    return need_string(j, "session");
}

ApiPurchaseResult GatewayClient::purchase_api(const std::string& session,
                                              const std::string& model, std::uint32_t maxtok,
                                              const std::vector<pbrsa::BlindedMessage>& blinded,
                                              const pbrsa::PublicKey& pk) {
    json arr = json::array();
    for (const auto& b : blinded) arr.push_back(encode_int(b.value, pk.bits));
    json body{{"session", session},
              {"plan",
               {{"mode", "api"},
                {"model", model},
                {"maxtok", maxtok},
                {"count", blinded.size()}}},
              {"blinded", arr}};
    json j = impl_->request("/v1/purchase/api", body);

    ApiPurchaseResult out;
    out.info_canonical = need_string(j, "info");
    auto sigs = j.find("signatures");
    if (sigs == j.end() || !sigs->is_array() || sigs->size() != blinded.size()) {
        throw Error(Errc::network, "purchase reply has wrong signature count");
    }
    out.blind_signatures.reserve(blinded.size());
    for (const json& s : *sigs) {
        if (!s.is_string()) throw Error(Errc::network, "non-string signature in reply");
        try {
            out.blind_signatures.push_back(
                pbrsa::BlindSignature{decode_int(s.get<std::string>(), pk.bits)});
        } catch (const std::invalid_argument& e) {
            throw Error(Errc::network, std::string("bad signature encoding: ") + e.what());
        }
    }
    return out;
}

SubPurchaseResult GatewayClient::purchase_sub(const std::string& session,
                                              const std::string& model, std::uint32_t maxtok,
                                              plan::Period period,
                                              std::optional<plan::UtcSeconds> expected_deadline,
                                              const pbrsa::BlindedMessage& blinded,
                                              const pbrsa::PublicKey& pk) {
    json plan_obj{{"mode", "sub"},
                  {"model", model},
                  {"maxtok", maxtok},
                  {"period", period == plan::Period::monthly ? "monthly" : "yearly"}};
    if (expected_deadline) plan_obj["deadline"] = plan::format_rfc3339(*expected_deadline);
    json body{{"session", session},
              {"plan", plan_obj},
              {"blinded", encode_int(blinded.value, pk.bits)}};
    json j = impl_->request("/v1/purchase/sub", body);

    SubPurchaseResult out;
    out.info_canonical = need_string(j, "info");
    try {
        out.blind_signature.value = decode_int(need_string(j, "signature"), pk.bits);
    } catch (const std::invalid_argument& e) {
        throw Error(Errc::network, std::string("bad signature encoding: ") + e.what());
    }
    return out;
}

InferResult GatewayClient::infer(const std::string& info_canonical, const pbrsa::Ticket& ticket,
                                 const pbrsa::Signature& sig,
                                 const std::optional<pbrsa::BlindedMessage>& next_blinded,
                                 const std::string& query, const pbrsa::PublicKey& pk) {
    std::vector<std::uint8_t> ticket_bytes(ticket.value.begin(), ticket.value.end());
    json body{{"info", info_canonical},
              {"ticket", base64url_encode(ticket_bytes)},
              {"signature", encode_int(sig.value, pk.bits)},
              {"query", query}};
    if (next_blinded) body["next_blinded"] = encode_int(next_blinded->value, pk.bits);

    InferResult out;
    json j = impl_->request("/v1/infer", body, &out.request_bytes, &out.response_bytes);
    out.answer = need_string(j, "answer");
    if (j.contains("next_signature")) {
        try {
            out.next_signature =
                pbrsa::BlindSignature{decode_int(need_string(j, "next_signature"), pk.bits)};
        } catch (const std::invalid_argument& e) {
            throw Error(Errc::network, std::string("bad next_signature encoding: ") + e.what());
        }
    }
    return out;
}

} // namespace blindgate::client
