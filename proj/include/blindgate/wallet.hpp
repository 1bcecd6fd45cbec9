#pragma once

#include "blindgate/errors.hpp"
#include "blindgate/pbrsa.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blindgate::client {

struct ApiCredential {
    pbrsa::Ticket ticket;
    pbrsa::Signature signature;
    std::string info; // canonical metadata string
    bool used = false;
};

struct SubCredential {
    pbrsa::Ticket ticket;
    pbrsa::Signature signature;
    std::string info;
};

/// A subscription next-ticket that has been blinded and possibly sent but
/// whose chained signature has not been banked yet. Persisted before the
/// request goes out so a crash loses no ticket: r, ticket and info are enough
/// to rebuild the full blinding state.
struct PendingBlind {
    Bigint r;
    pbrsa::Ticket ticket;
    std::string info;
    Bigint blinded;
};

struct Wallet {
    std::string server_url;
    pbrsa::PublicKey pinned; // bits == 0 until fetch-pk has run
    std::vector<ApiCredential> api_credentials;
    std::optional<SubCredential> sub_credential;
    std::optional<PendingBlind> pending_blind;

    std::size_t unused_api_count() const;
};

/// Exclusive handle on a wallet file. The sidecar "<path>.lock" is flocked
/// for the lifetime of the object; a second holder gets WALLET_LOCKED.
class WalletFile {
public:
    explicit WalletFile(std::string path);
    ~WalletFile();
    WalletFile(const WalletFile&) = delete;
    WalletFile& operator=(const WalletFile&) = delete;

    const std::string& path() const { return path_; }
    bool exists() const;

    /// Parses and validates: every stored signature must verify against its
    /// (ticket, info) under the pinned key. Anything off is CORRUPT_WALLET.
    Wallet load() const;

    /// Atomic replace: temp file, fsync, rename.
    void save(const Wallet& wallet) const;

private:
    std::string path_;
    int lock_fd_ = -1;
};

struct AskResult {
    std::string answer;
    plan::Mode mode_used = plan::Mode::api;
    std::size_t unused_api_remaining = 0;
};

struct WalletStatus {
    std::string server_url;
    std::size_t pinned_bits = 0;
    std::size_t api_unused = 0;
    std::size_t api_used = 0;
    std::optional<std::string> sub_info;
    std::optional<plan::UtcSeconds> sub_deadline;
    bool pending_blind = false;
};

// Command-level operations. Each takes the wallet lock, performs one
// network round (plus a key-pin recheck), and persists the outcome.

/// Creates the wallet if needed and pins the server key. Refuses to repin:
/// a changed server key is PIN_MISMATCH and the wallet is left untouched.
void op_fetch_pk(const std::string& wallet_path, const std::string& server_url);

/// Registers an account. Nothing account-related is stored in the wallet.
void op_register(const std::string& wallet_path, const std::string& user,
                 const std::string& secret);

/// Buys `count` API credits: generate, blind, submit, unblind, verify, bank.
/// Any bad blind signature aborts the whole purchase and the wallet keeps
/// its previous contents. The login session is discarded afterwards.
void op_purchase_api(const std::string& wallet_path, const std::string& user,
                     const std::string& secret, const std::string& model, std::uint32_t maxtok,
                     std::size_t count, RandomSource& rng);

/// Buys a subscription credential with the server-standardized deadline.
void op_purchase_sub(const std::string& wallet_path, const std::string& user,
                     const std::string& secret, const std::string& model, std::uint32_t maxtok,
                     plan::Period period, RandomSource& rng);

/// Sends one anonymous query. Prefers the subscription credential when one
/// is banked, otherwise picks an unused API credential uniformly at random.
/// NO_CREDENTIAL is raised before any network traffic.
AskResult op_ask(const std::string& wallet_path, const std::string& query, RandomSource& rng);

WalletStatus op_status(const std::string& wallet_path);

} // namespace blindgate::client
