#pragma once

#include "blindgate/errors.hpp"
#include "blindgate/pbrsa.hpp"
#include "blindgate/plan.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blindgate::client {

/// Server's advertised verification key.
struct ServerKey {
    pbrsa::PublicKey pk;
};

struct ApiPurchaseResult {
    std::vector<pbrsa::BlindSignature> blind_signatures;
    std::string info_canonical;
};

struct SubPurchaseResult {
    pbrsa::BlindSignature blind_signature;
    std::string info_canonical;
};

struct InferResult {
    std::string answer;
    std::optional<pbrsa::BlindSignature> next_signature;
    // Exact body sizes of this exchange, for overhead accounting.
    std::size_t request_bytes = 0;
    std::size_t response_bytes = 0;
};

/// Thin typed wrapper over the gateway's HTTP surface. Transport problems
/// throw NETWORK; error bodies from the server are rethrown locally with
/// their original code so callers see the same Errc the gateway raised.
class GatewayClient {
public:
    explicit GatewayClient(std::string base_url, int timeout_secs = 30);
    ~GatewayClient();
    GatewayClient(const GatewayClient&) = delete;
    GatewayClient& operator=(const GatewayClient&) = delete;

    const std::string& base_url() const { return base_url_; }

    ServerKey fetch_pk();
    std::string register_account(const std::string& user, const std::string& secret);
    std::string login(const std::string& user, const std::string& secret);

    ApiPurchaseResult purchase_api(const std::string& session, const std::string& model,
                                   std::uint32_t maxtok,
                                   const std::vector<pbrsa::BlindedMessage>& blinded,
                                   const pbrsa::PublicKey& pk);

    SubPurchaseResult purchase_sub(const std::string& session, const std::string& model,
                                   std::uint32_t maxtok, plan::Period period,
                                   std::optional<plan::UtcSeconds> expected_deadline,
                                   const pbrsa::BlindedMessage& blinded,
                                   const pbrsa::PublicKey& pk);

    InferResult infer(const std::string& info_canonical, const pbrsa::Ticket& ticket,
                      const pbrsa::Signature& sig,
                      const std::optional<pbrsa::BlindedMessage>& next_blinded,
                      const std::string& query, const pbrsa::PublicKey& pk);

private:
    std::string base_url_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace blindgate::client
