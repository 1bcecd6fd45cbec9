#include "blindgate/wallet.hpp"

#include "blindgate/encoding.hpp"
#include "blindgate/gateway_client.hpp"

#include <json.hpp>

#include <sys/file.h>
#include <sys/stat.h>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace blindgate::client {

using nlohmann::json;

std::size_t Wallet::unused_api_count() const {
    std::size_t n = 0;
    for (const auto& c : api_credentials) {
        if (!c.used) ++n;
    }
    return n;
}

// ---- WalletFile ----

WalletFile::WalletFile(std::string path) : path_(std::move(path)) {
    std::string lock_path = path_ + ".lock";
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT, 0644);
    if (lock_fd_ < 0) {
        throw Error(Errc::wallet_locked,
                    "cannot open " + lock_path + ": " + std::strerror(errno));
    }
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        int err = errno;
        ::close(lock_fd_);
        lock_fd_ = -1;
        if (err == EWOULDBLOCK) {
            throw Error(Errc::wallet_locked, "wallet is in use by another process");
        }
        throw Error(Errc::wallet_locked,
                    "cannot lock " + lock_path + ": " + std::strerror(err));
    }
}

WalletFile::~WalletFile() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

bool WalletFile::exists() const {
    struct stat st{};
    return ::stat(path_.c_str(), &st) == 0;
}

namespace {

[[noreturn]] void corrupt(const std::string& why) {
    throw Error(Errc::corrupt_wallet, why);
}

std::string need_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) corrupt(std::string("missing field ") + key);
    return it->get<std::string>();
}

pbrsa::Ticket ticket_field(const json& j) {
    try {
        return pbrsa::Ticket::from_hex(need_string(j, "ticket"));
    } catch (const std::invalid_argument& e) {
        corrupt(std::string("bad ticket: ") + e.what());
    }
}

Bigint int_field(const json& j, const char* key, std::size_t bits) {
    try {
        return decode_int(need_string(j, key), bits);
    } catch (const std::invalid_argument& e) {
        corrupt(std::string("bad ") + key + ": " + e.what());
    }
}

void verify_or_corrupt(const pbrsa::Signature& sig, const pbrsa::Ticket& ticket,
                       const std::string& info, const pbrsa::PublicKey& pk) {
    pbrsa::InfoBytes info_bytes;
    try {
        info_bytes = pbrsa::InfoBytes::from_canonical(info);
        plan::decode_info(info); // must also be well-formed metadata
    } catch (const std::exception& e) {
        corrupt(std::string("bad credential metadata: ") + e.what());
    }
    if (!pbrsa::verify(sig, ticket, info_bytes, pk)) {
        corrupt("stored signature fails verification");
    }
}

} // namespace

Wallet WalletFile::load() const {
    std::ifstream in(path_, std::ios::binary);
    if (!in) corrupt("cannot read wallet file " + path_);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) corrupt("wallet file is not a JSON object");
    if (j.value("version", 0) != 1) corrupt("unsupported wallet version");

    Wallet w;
    w.server_url = need_string(j, "server_url");
    auto pinned = j.find("pinned");
    if (pinned == j.end() || !pinned->is_object()) corrupt("missing pinned key");
    auto bits = pinned->find("bits");
    if (bits == pinned->end() || !bits->is_number_unsigned()) corrupt("missing pinned bits");
    w.pinned.bits = bits->get<std::size_t>();
    w.pinned.n = int_field(*pinned, "n", w.pinned.bits);
    if (w.pinned.n.bit_length() != w.pinned.bits) corrupt("pinned modulus width mismatch");

    auto creds = j.find("api_credentials");
    if (creds == j.end() || !creds->is_array()) corrupt("missing api_credentials");
    for (const json& c : *creds) {
        if (!c.is_object()) corrupt("api credential is not an object");
        ApiCredential ac;
        ac.ticket = ticket_field(c);
        ac.signature.value = int_field(c, "signature", w.pinned.bits);
        ac.info = need_string(c, "info");
        auto used = c.find("used");
        if (used == c.end() || !used->is_boolean()) corrupt("missing used flag");
        ac.used = used->get<bool>();
        verify_or_corrupt(ac.signature, ac.ticket, ac.info, w.pinned);
        w.api_credentials.push_back(std::move(ac));
    }

    if (auto sc = j.find("sub_credential"); sc != j.end() && !sc->is_null()) {
        if (!sc->is_object()) corrupt("sub_credential is not an object");
        SubCredential s;
        s.ticket = ticket_field(*sc);
        s.signature.value = int_field(*sc, "signature", w.pinned.bits);
        s.info = need_string(*sc, "info");
        verify_or_corrupt(s.signature, s.ticket, s.info, w.pinned);
        w.sub_credential = std::move(s);
    }

    if (auto pb = j.find("pending_blind"); pb != j.end() && !pb->is_null()) {
        if (!pb->is_object()) corrupt("pending_blind is not an object");
        PendingBlind p;
        p.ticket = ticket_field(*pb);
        p.r = int_field(*pb, "r", w.pinned.bits);
        p.info = need_string(*pb, "info");
        p.blinded = int_field(*pb, "blinded", w.pinned.bits);
        // The blinded value is recomputable from (r, ticket, info); a
        // mismatch means the file was tampered with or torn.
        try {
            pbrsa::InfoBytes info_bytes = pbrsa::InfoBytes::from_canonical(p.info);
            Bigint m_h = pbrsa::hash_to_group(pbrsa::canonical_message(p.ticket, info_bytes),
                                              w.pinned);
            Bigint e_info = pbrsa::derive_info_exponent(info_bytes, w.pinned);
            if (pbrsa::blind_value(m_h, p.r, e_info, w.pinned.n) != p.blinded) {
                corrupt("pending blind does not reproduce");
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            corrupt(std::string("bad pending blind: ") + e.what());
        }
        w.pending_blind = std::move(p);
    }

    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "version" && key != "server_url" && key != "pinned" &&
            key != "api_credentials" && key != "sub_credential" && key != "pending_blind") {
            corrupt("unknown wallet field: " + key);
        }
    }
    return w;
}

void WalletFile::save(const Wallet& wallet) const {
    json creds = json::array();
    for (const auto& c : wallet.api_credentials) {
        creds.push_back(json{{"ticket", c.ticket.hex()},
                             {"signature", encode_int(c.signature.value, wallet.pinned.bits)},
                             {"info", c.info},
                             {"used", c.used}});
    }
    json j{{"version", 1},
           {"server_url", wallet.server_url},
           {"pinned",
            {{"n", encode_int(wallet.pinned.n, wallet.pinned.bits)},
             {"bits", wallet.pinned.bits}}},
           {"api_credentials", creds}};
    if (wallet.sub_credential) {
        j["sub_credential"] =
            json{{"ticket", wallet.sub_credential->ticket.hex()},
                 {"signature", encode_int(wallet.sub_credential->signature.value,
                                          wallet.pinned.bits)},
                 {"info", wallet.sub_credential->info}};
    }
    if (wallet.pending_blind) {
        j["pending_blind"] =
            json{{"ticket", wallet.pending_blind->ticket.hex()},
                 {"r", encode_int(wallet.pending_blind->r, wallet.pinned.bits)},
                 {"info", wallet.pending_blind->info},
                 {"blinded", encode_int(wallet.pending_blind->blinded, wallet.pinned.bits)}};
    }

    std::string body = j.dump(2);
    body += '\n';
    std::string tmp = path_ + ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0) {
        throw Error(Errc::storage_failure, "cannot write " + tmp + ": " + std::strerror(errno));
    }
    std::size_t done = 0;
    while (done < body.size()) {
        ssize_t n = ::write(fd, body.data() + done, body.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            int err = errno;
            ::close(fd);
            throw Error(Errc::storage_failure,
                        "wallet write failed: " + std::string(std::strerror(err)));
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        throw Error(Errc::storage_failure, "wallet flush failed");
    }
    if (std::rename(tmp.c_str(), path_.c_str()) != 0) {
        throw Error(Errc::storage_failure, "wallet rename failed");
    }
}

// ---- command-level operations ----

namespace {

Wallet load_initialized(const WalletFile& file) {
    if (!file.exists()) {
        throw Error(Errc::bad_config, "wallet not initialized; run fetch-pk first");
    }
    return file.load();
}

/// Every networked command re-checks the pin before doing anything else.
void check_pin(GatewayClient& http, const Wallet& wallet) {
    ServerKey key = http.fetch_pk();
    if (key.pk.n != wallet.pinned.n || key.pk.bits != wallet.pinned.bits) {
        throw Error(Errc::pin_mismatch, "server key differs from the pinned key");
    }
}

pbrsa::BlindingState rebuild_state(const PendingBlind& p, const pbrsa::PublicKey& pk) {
    pbrsa::BlindingState st;
    st.r = p.r;
    auto inv = invmod(p.r, pk.n);
    if (!inv) throw Error(Errc::corrupt_wallet, "pending blind factor not invertible");
    st.r_inv = *inv;
    st.ticket = p.ticket;
    st.info = pbrsa::InfoBytes::from_canonical(p.info);
    st.message_hash = pbrsa::hash_to_group(pbrsa::canonical_message(p.ticket, st.info), pk);
    return st;
}

} // namespace

void op_fetch_pk(const std::string& wallet_path, const std::string& server_url) {
    WalletFile file(wallet_path);
    GatewayClient http(server_url);
    ServerKey key = http.fetch_pk();
    if (file.exists()) {
        Wallet w = file.load();
        if (w.pinned.n != key.pk.n || w.pinned.bits != key.pk.bits) {
            throw Error(Errc::pin_mismatch, "server key differs from the pinned key");
        }
        if (w.server_url != server_url) {
            w.server_url = server_url; // same key, moved endpoint
            file.save(w);
        }
        return;
    }
    Wallet w;
    w.server_url = server_url;
    w.pinned = key.pk;
    file.save(w);
}

void op_register(const std::string& wallet_path, const std::string& user,
                 const std::string& secret) {
    WalletFile file(wallet_path);
    Wallet w = load_initialized(file);
    GatewayClient http(w.server_url);
    check_pin(http, w);
    http.register_account(user, secret); // session discarded on purpose
}

void op_purchase_api(const std::string& wallet_path, const std::string& user,
                     const std::string& secret, const std::string& model, std::uint32_t maxtok,
                     std::size_t count, RandomSource& rng) {
    WalletFile file(wallet_path);
    Wallet w = load_initialized(file);
    GatewayClient http(w.server_url);
    check_pin(http, w);

    plan::InfoFields fields;
    fields.mode = plan::Mode::api;
    fields.model_id = model;
    fields.max_tokens_per_request = maxtok;
    pbrsa::InfoBytes info = plan::encode_info(fields); // MALFORMED_PLAN before any traffic

    auto tickets = plan::generate_tickets(count, rng);
    std::vector<pbrsa::BlindedMessage> blinded;
    std::vector<pbrsa::BlindingState> states;
    blinded.reserve(count);
    states.reserve(count);
    for (const auto& t : tickets) {
        auto [b, s] = pbrsa::blind(t, info, w.pinned, rng);
        blinded.push_back(std::move(b));
        states.push_back(std::move(s));
    }

    std::string session = http.login(user, secret);
    ApiPurchaseResult result = http.purchase_api(session, model, maxtok, blinded, w.pinned);
    if (result.info_canonical != info.canonical) {
        throw Error(Errc::invalid_blind_signature, "server issued under different metadata");
    }
    // Unblind everything before banking anything: one bad signature aborts
    // the purchase with the wallet unchanged.
    std::vector<ApiCredential> fresh;
    fresh.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        pbrsa::Signature sig = pbrsa::unblind(result.blind_signatures[i], states[i], w.pinned);
        fresh.push_back(ApiCredential{tickets[i], sig, info.canonical, false});
    }
    for (auto& c : fresh) w.api_credentials.push_back(std::move(c));
    file.save(w);
}

void op_purchase_sub(const std::string& wallet_path, const std::string& user,
                     const std::string& secret, const std::string& model, std::uint32_t maxtok,
                     plan::Period period, RandomSource& rng) {
    WalletFile file(wallet_path);
    Wallet w = load_initialized(file);
    GatewayClient http(w.server_url);
    check_pin(http, w);

    // The deadline must be in the info before blinding, so the client
    // standardizes locally and asks the server to confirm the same value.
    std::int64_t now = std::time(nullptr);
    plan::InfoFields fields;
    fields.mode = plan::Mode::subscription;
    fields.model_id = model;
    fields.max_tokens_per_request = maxtok;
    fields.deadline = plan::standardize_deadline(now, period);
    pbrsa::InfoBytes info = plan::encode_info(fields);

    pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
    auto [blinded, state] = pbrsa::blind(ticket, info, w.pinned, rng);

    std::string session = http.login(user, secret);
    SubPurchaseResult result =
        http.purchase_sub(session, model, maxtok, period, fields.deadline, blinded, w.pinned);
    if (result.info_canonical != info.canonical) {
        throw Error(Errc::invalid_blind_signature, "server issued under different metadata");
    }
    pbrsa::Signature sig = pbrsa::unblind(result.blind_signature, state, w.pinned);
    w.sub_credential = SubCredential{ticket, sig, info.canonical};
    w.pending_blind.reset();
    file.save(w);
}

AskResult op_ask(const std::string& wallet_path, const std::string& query, RandomSource& rng) {
    WalletFile file(wallet_path);
    Wallet w = load_initialized(file);

    // Select the credential before touching the network.
    const bool use_sub = w.sub_credential.has_value();
    std::size_t api_index = 0;
    if (!use_sub) {
        std::size_t unused = w.unused_api_count();
        if (unused == 0) throw Error(Errc::no_credential, "wallet has no unused credential");
        std::size_t pick =
            unused == 1 ? 0
                        : random_below(rng, Bigint(static_cast<unsigned long>(unused))).to_u64();
        std::size_t seen = 0;
        for (std::size_t i = 0; i < w.api_credentials.size(); ++i) {
            if (w.api_credentials[i].used) continue;
            if (seen++ == pick) {
                api_index = i;
                break;
            }
        }
    }
    const std::string& info_canonical =
        use_sub ? w.sub_credential->info : w.api_credentials[api_index].info;
    plan::InfoFields fields = plan::decode_info(info_canonical);
    if (plan::count_tokens(query) > fields.max_tokens_per_request) {
        throw Error(Errc::token_limit,
                    "query exceeds " + std::to_string(fields.max_tokens_per_request) +
                        " tokens for this credential");
    }

    GatewayClient http(w.server_url);
    check_pin(http, w);

    AskResult out;
    if (use_sub) {
        pbrsa::InfoBytes info = pbrsa::InfoBytes::from_canonical(info_canonical);
        // Reuse a pending next-ticket from an interrupted ask, else mint one.
        if (!w.pending_blind || w.pending_blind->info != info_canonical) {
            pbrsa::Ticket next = pbrsa::random_ticket(rng);
            auto [blinded, state] = pbrsa::blind(next, info, w.pinned, rng);
            w.pending_blind = PendingBlind{state.r, next, info_canonical, blinded.value};
            file.save(w); // crash between here and the reply loses nothing
        }
        pbrsa::BlindingState state = rebuild_state(*w.pending_blind, w.pinned);

        InferResult r = http.infer(info_canonical, w.sub_credential->ticket,
                                   w.sub_credential->signature,
                                   pbrsa::BlindedMessage{w.pending_blind->blinded}, query,
                                   w.pinned);
        if (!r.next_signature) {
            throw Error(Errc::invalid_next_signature, "server sent no chained signature");
        }
        pbrsa::Signature next_sig;
        try {
            next_sig = pbrsa::unblind(*r.next_signature, state, w.pinned);
        } catch (const Error&) {
            // Credential and pending blind are retained for a retry.
            throw Error(Errc::invalid_next_signature,
                        "server's chained signature fails verification");
        }
        w.sub_credential = SubCredential{state.ticket, next_sig, info_canonical};
        w.pending_blind.reset();
        file.save(w);
        out.answer = std::move(r.answer);
        out.mode_used = plan::Mode::subscription;
    } else {
        ApiCredential& cred = w.api_credentials[api_index];
        try {
            InferResult r = http.infer(info_canonical, cred.ticket, cred.signature, std::nullopt,
                                       query, w.pinned);
            cred.used = true;
            file.save(w);
            out.answer = std::move(r.answer);
        } catch (const Error& e) {
            if (e.code() == Errc::double_spend) {
                // Server says this ticket is burned; never try it again.
                cred.used = true;
                file.save(w);
            }
            throw;
        }
        out.mode_used = plan::Mode::api;
    }
    out.unused_api_remaining = w.unused_api_count();
    return out;
}

WalletStatus op_status(const std::string& wallet_path) {
    WalletFile file(wallet_path);
    Wallet w = load_initialized(file);
    WalletStatus st;
    st.server_url = w.server_url;
    st.pinned_bits = w.pinned.bits;
    st.api_unused = w.unused_api_count();
    st.api_used = w.api_credentials.size() - st.api_unused;
    if (w.sub_credential) {
        st.sub_info = w.sub_credential->info;
        st.sub_deadline = plan::decode_info(w.sub_credential->info).deadline;
    }
    st.pending_blind = w.pending_blind.has_value();
    return st;
}

} // namespace blindgate::client
