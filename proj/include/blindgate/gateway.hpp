#pragma once

#include "blindgate/backend.hpp"
#include "blindgate/pbrsa.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace blindgate::gateway {

struct GatewayConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080; // 0 = pick an ephemeral port
    std::size_t bits = 2048;
    std::string key_path;     // empty = fresh key each start, never persisted
    std::string journal_path; // empty = in-memory only (tests)
    BackendConfig backend;
    std::string tls_cert;
    std::string tls_key;
    bool single_session = false;
    std::int64_t session_ttl_secs = 3600;
    // Test/deployment toggles not in the flat file's required set:
    bool auto_credit = true;      // simulate payment by crediting purchases
    bool allow_small_keys = false; // permit bits < 1024 (oracle tests only)
};

/// Flat key=value config file; '#' starts a comment. Unknown keys are
/// rejected (BAD_CONFIG), as are malformed values.
GatewayConfig parse_config(std::string_view text);
GatewayConfig load_config(const std::string& path);

/// Visible account state for tests and operations tooling.
struct AccountSnapshot {
    std::string user_id;
    std::uint64_t api_credits = 0;
    std::optional<std::string> active_subscription; // canonical info
};

class GatewayServer {
public:
    /// Loads the key from config.key_path or generates (and persists) one.
    explicit GatewayServer(GatewayConfig config);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    const pbrsa::PublicKey& public_key() const;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    void stop();
    bool running() const;
    std::string base_url() const; // http://host:port of the running server

    // Test hooks. The clock override feeds every deadline and session check.
    void credit_account(const std::string& user, std::uint64_t credits);
    std::optional<AccountSnapshot> account_snapshot(const std::string& user) const;
    void set_clock(std::function<std::int64_t()> now_utc);
    std::size_t used_ticket_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace blindgate::gateway
