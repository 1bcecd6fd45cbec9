#include "blindgate/gateway.hpp"

#include "blindgate/encoding.hpp"
#include "blindgate/errors.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"
#include "blindgate/ticket_store.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace blindgate::gateway {

using nlohmann::json;

namespace {

constexpr int kWorkerThreads = 16;
constexpr std::size_t kMaxRequestCount = 1000;

int http_status(Errc code) {
    switch (code) {
    case Errc::malformed_plan:
    case Errc::malformed_info:
    case Errc::malformed_blinded:
    case Errc::not_invertible:
    case Errc::wrong_deadline:
    case Errc::token_limit:
    case Errc::bad_config:
        return 400;
    case Errc::auth_failed:
        return 401;
    case Errc::insufficient_credits:
        return 402;
    case Errc::invalid_signature:
    case Errc::expired_info:
        return 403;
    case Errc::conflict:
    case Errc::double_spend:
        return 409;
    case Errc::backend_error:
        return 502;
    case Errc::storage_failure:
        return 503;
    default:
        return 500;
    }
}

void write_error(httplib::Response& res, Errc code, const std::string& message) {
    res.status = http_status(code);
    res.set_content(json{{"error", errc_name(code)}, {"message", message}}.dump(),
                    "application/json");
}

// Error::what() is "CODE: message"; peel the prefix back off for the body.
std::string strip_code_prefix(const Error& e) {
    std::string_view what = e.what();
    std::string_view name = errc_name(e.code());
    if (what.substr(0, name.size()) == name && what.substr(name.size(), 2) == ": ") {
        return std::string(what.substr(name.size() + 2));
    }
    return std::string(what);
}

bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(Errc::bad_config, "boolean expected for " + key);
}

// Strict accessors over request JSON: wrong shape maps to `code`.
std::string need_string(const json& j, const char* key, Errc code) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw Error(code, std::string("missing or non-string field: ") + key);
    }
    return it->get<std::string>();
}

std::uint64_t need_uint(const json& j, const char* key, Errc code) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_unsigned()) {
        throw Error(code, std::string("missing or non-integer field: ") + key);
    }
    return it->get<std::uint64_t>();
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         Errc code) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (std::string_view a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw Error(code, "unknown field: " + key);
    }
}

json parse_body(const httplib::Request& req, Errc code) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(code, "body is not a JSON object");
    return j;
}

std::int64_t system_now_utc() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

pbrsa::KeyPair load_or_generate_key(const GatewayConfig& cfg) {
    const std::size_t min_bits = cfg.allow_small_keys ? 16 : 1024;
    if (!cfg.key_path.empty()) {
        std::ifstream in(cfg.key_path);
        if (in) {
            json j = json::parse(in, nullptr, false);
            if (j.is_discarded()) throw Error(Errc::bad_config, "unparseable key file");
            pbrsa::KeyPair kp;
            try {
                kp.bits = j.at("bits").get<std::size_t>();
                kp.p = Bigint::from_decimal(j.at("p").get<std::string>());
                kp.q = Bigint::from_decimal(j.at("q").get<std::string>());
            } catch (const std::exception& e) {
                throw Error(Errc::bad_config, std::string("bad key file: ") + e.what());
            }
            kp.n = kp.p * kp.q;
            kp.lambda_n = lcm(kp.p - Bigint(1), kp.q - Bigint(1));
            if (!kp.p.probably_prime(64) || !kp.q.probably_prime(64) || kp.p == kp.q ||
                kp.n.bit_length() != kp.bits || kp.bits < min_bits) {
                throw Error(Errc::bad_config, "key file fails key invariants");
            }
            return kp;
        }
    }
    if (cfg.bits < min_bits) {
        throw Error(Errc::bad_config, "modulus below 1024 bits needs allow_small_keys");
    }
    SystemRandom rng;
    pbrsa::KeyPair kp = pbrsa::setup(cfg.bits, rng);
    if (!cfg.key_path.empty()) {
        json j{{"bits", kp.bits}, {"p", kp.p.to_decimal()}, {"q", kp.q.to_decimal()}};
        std::string tmp = cfg.key_path + ".tmp";
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << '\n';
        out.close();
        if (!out || std::rename(tmp.c_str(), cfg.key_path.c_str()) != 0) {
            throw Error(Errc::storage_failure, "cannot persist key to " + cfg.key_path);
        }
    }
    return kp;
}

} // namespace

GatewayConfig parse_config(std::string_view text) {
    GatewayConfig cfg;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
                s.remove_suffix(1);
            }
            return s;
        };
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::bad_config, "line " + std::to_string(lineno) + ": expected key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));

        auto to_int = [&](std::int64_t lo, std::int64_t hi) {
            try {
                std::size_t used = 0;
                std::int64_t v = std::stoll(value, &used);
                if (used != value.size() || v < lo || v > hi) throw std::invalid_argument("range");
                return v;
            } catch (const std::exception&) {
                throw Error(Errc::bad_config, "bad integer for " + key);
            }
        };

        if (key == "listen") {
            std::size_t colon = value.rfind(':');
            if (colon == std::string::npos || colon == 0) {
                throw Error(Errc::bad_config, "listen must be host:port");
            }
            cfg.listen_host = value.substr(0, colon);
            try {
                cfg.listen_port = static_cast<int>(std::stoi(value.substr(colon + 1)));
            } catch (const std::exception&) {
                throw Error(Errc::bad_config, "bad listen port");
            }
            if (cfg.listen_port < 0 || cfg.listen_port > 65535) {
                throw Error(Errc::bad_config, "bad listen port");
            }
        } else if (key == "bits") {
            cfg.bits = static_cast<std::size_t>(to_int(16, 1 << 20));
        } else if (key == "key_path") {
            cfg.key_path = value;
        } else if (key == "journal_path") {
            cfg.journal_path = value;
        } else if (key == "backend") {
            if (value == "echo") {
                cfg.backend.kind = BackendKind::echo;
            } else if (value == "http_proxy") {
                cfg.backend.kind = BackendKind::http_proxy;
            } else {
                throw Error(Errc::bad_config, "backend must be echo or http_proxy");
            }
        } else if (key == "backend_url") {
            cfg.backend.url = value;
        } else if (key == "backend_timeout_secs") {
            cfg.backend.timeout_secs = static_cast<int>(to_int(1, 3600));
        } else if (key == "tls_cert") {
            cfg.tls_cert = value;
        } else if (key == "tls_key") {
            cfg.tls_key = value;
        } else if (key == "single_session") {
            cfg.single_session = parse_bool(value, key);
        } else if (key == "session_ttl_secs") {
            cfg.session_ttl_secs = to_int(1, 86400 * 365);
        } else if (key == "auto_credit") {
            cfg.auto_credit = parse_bool(value, key);
        } else if (key == "allow_small_keys") {
            cfg.allow_small_keys = parse_bool(value, key);
        } else {
            throw Error(Errc::bad_config, "unknown config key: " + key);
        }
    }
    if (cfg.tls_cert.empty() != cfg.tls_key.empty()) {
        throw Error(Errc::bad_config, "tls_cert and tls_key must be set together");
    }
    if (cfg.backend.kind == BackendKind::http_proxy && cfg.backend.url.empty()) {
        throw Error(Errc::bad_config, "http_proxy backend needs backend_url");
    }
    return cfg;
}

GatewayConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::bad_config, "cannot read config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

struct GatewayServer::Impl {
    GatewayConfig cfg;
    pbrsa::KeyPair kp;
    pbrsa::PublicKey pk;
    std::function<std::int64_t()> now = system_now_utc;
    UsedTicketStore store;

    struct Account {
        Sha384Digest secret_hash{};
        std::uint64_t api_credits = 0;
        std::optional<std::string> active_subscription;
    };
    struct Session {
        std::string user;
        std::int64_t expires_at = 0;
    };
    mutable std::mutex accounts_mutex;
    std::map<std::string, Account> accounts;
    std::map<std::string, Session> sessions;

    std::unique_ptr<httplib::Server> server;
    std::thread serve_thread;
    int port = -1;

    explicit Impl(GatewayConfig config)
        : cfg(std::move(config)), kp(load_or_generate_key(cfg)), pk(kp.public_key()),
          store(cfg.journal_path) {}

    // ---- session helpers ----

    std::string open_session(const std::string& user) {
        SystemRandom rng;
        std::string token = base64url_encode(rng.bytes(32));
        sessions[token] = Session{user, now() + cfg.session_ttl_secs};
        return token;
    }

    // Caller must hold accounts_mutex.
    std::string authenticate(const std::string& token) {
        auto it = sessions.find(token);
        if (it == sessions.end()) throw Error(Errc::auth_failed, "unknown session");
        if (now() >= it->second.expires_at) {
            sessions.erase(it);
            throw Error(Errc::auth_failed, "session expired");
        }
        return it->second.user;
    }

    // ---- handlers ----

    void handle_pk(httplib::Response& res) {
        res.set_content(
            json{{"n", encode_int(pk.n, pk.bits)}, {"bits", pk.bits}}.dump(),
            "application/json");
    }

    void handle_register(const httplib::Request& req, httplib::Response& res, bool is_register) {
        json body = parse_body(req, Errc::auth_failed);
        reject_unknown_keys(body, {"user", "secret"}, Errc::auth_failed);
        std::string user = need_string(body, "user", Errc::auth_failed);
        std::string secret = need_string(body, "secret", Errc::auth_failed);
        if (user.empty() || secret.empty()) {
            throw Error(Errc::auth_failed, "user and secret must be non-empty");
        }
        Sha384Digest hash = sha384(secret);
        std::lock_guard lock(accounts_mutex);
        if (is_register) {
            auto [it, inserted] = accounts.try_emplace(user, Account{hash, 0, std::nullopt});
            if (!inserted) throw Error(Errc::conflict, "user already registered");
        } else {
            auto it = accounts.find(user);
            if (it == accounts.end() || it->second.secret_hash != hash) {
                throw Error(Errc::auth_failed, "bad user or secret");
            }
        }
        res.set_content(json{{"session", open_session(user)}}.dump(), "application/json");
    }

    void handle_purchase_api(const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req, Errc::malformed_plan);
        reject_unknown_keys(body, {"session", "plan", "blinded"}, Errc::malformed_plan);
        std::string token = need_string(body, "session", Errc::auth_failed);
        auto plan_it = body.find("plan");
        if (plan_it == body.end() || !plan_it->is_object()) {
            throw Error(Errc::malformed_plan, "missing plan object");
        }
        reject_unknown_keys(*plan_it, {"mode", "model", "maxtok", "count"}, Errc::malformed_plan);
        if (need_string(*plan_it, "mode", Errc::malformed_plan) != "api") {
            throw Error(Errc::malformed_plan, "mode must be api on this endpoint");
        }
        plan::InfoFields fields;
        fields.mode = plan::Mode::api;
        fields.model_id = need_string(*plan_it, "model", Errc::malformed_plan);
        std::uint64_t maxtok = need_uint(*plan_it, "maxtok", Errc::malformed_plan);
        if (maxtok == 0 || maxtok > 1'000'000'000) throw Error(Errc::malformed_plan, "bad maxtok");
        fields.max_tokens_per_request = static_cast<std::uint32_t>(maxtok);
        std::uint64_t count = need_uint(*plan_it, "count", Errc::malformed_plan);
        if (count < 1 || count > kMaxRequestCount) {
            throw Error(Errc::malformed_plan, "count must be in [1, 1000]");
        }
        pbrsa::InfoBytes info = plan::encode_info(fields);

        auto blinded_it = body.find("blinded");
        if (blinded_it == body.end() || !blinded_it->is_array() || blinded_it->size() != count) {
            throw Error(Errc::malformed_plan, "blinded must be an array of length count");
        }
        std::vector<pbrsa::BlindedMessage> blinded;
        blinded.reserve(count);
        for (const json& b : *blinded_it) {
            if (!b.is_string()) throw Error(Errc::malformed_blinded, "blinded entry not a string");
            try {
                blinded.push_back(pbrsa::BlindedMessage{decode_int(b.get<std::string>(), pk.bits)});
            } catch (const std::invalid_argument& e) {
                throw Error(Errc::malformed_blinded, e.what());
            }
        }

        std::string user;
        {
            std::lock_guard lock(accounts_mutex);
            user = authenticate(token);
            Account& acct = accounts.at(user);
            if (cfg.auto_credit) acct.api_credits += count; // simulated payment
            if (acct.api_credits < count) {
                throw Error(Errc::insufficient_credits,
                            "account holds " + std::to_string(acct.api_credits) + " credits");
            }
        }

        // Signing is stateless; do it outside the lock, then commit the debit.
        std::vector<std::string> signatures;
        signatures.reserve(count);
        for (const pbrsa::BlindedMessage& b : blinded) {
            signatures.push_back(encode_int(pbrsa::sign_blinded(b, info, kp).value, pk.bits));
        }
        {
            std::lock_guard lock(accounts_mutex);
            Account& acct = accounts.at(user);
            if (acct.api_credits < count) {
                throw Error(Errc::insufficient_credits, "credits were spent concurrently");
            }
            acct.api_credits -= count;
        }
        res.set_content(json{{"signatures", signatures}, {"info", info.canonical}}.dump(),
                        "application/json");
    }

    void handle_purchase_sub(const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req, Errc::malformed_plan);
        reject_unknown_keys(body, {"session", "plan", "blinded"}, Errc::malformed_plan);
        std::string token = need_string(body, "session", Errc::auth_failed);
        auto plan_it = body.find("plan");
        if (plan_it == body.end() || !plan_it->is_object()) {
            throw Error(Errc::malformed_plan, "missing plan object");
        }
        reject_unknown_keys(*plan_it, {"mode", "model", "maxtok", "period", "deadline"},
                            Errc::malformed_plan);
        if (need_string(*plan_it, "mode", Errc::malformed_plan) != "sub") {
            throw Error(Errc::malformed_plan, "mode must be sub on this endpoint");
        }
        std::string period_label = need_string(*plan_it, "period", Errc::malformed_plan);
        plan::Period period;
        if (period_label == "monthly") {
            period = plan::Period::monthly;
        } else if (period_label == "yearly") {
            period = plan::Period::yearly;
        } else {
            throw Error(Errc::malformed_plan, "period must be monthly or yearly");
        }
        plan::UtcSeconds deadline = plan::standardize_deadline(now(), period);
        // The client blinded under a deadline it computed locally; if it sent
        // one and it is not the server's standardized value, the blind would
        // never verify — reject it up front.
        if (auto it = plan_it->find("deadline"); it != plan_it->end()) {
            if (!it->is_string()) throw Error(Errc::malformed_plan, "deadline must be a string");
            std::optional<plan::UtcSeconds> sent = plan::parse_rfc3339(it->get<std::string>());
            if (!sent) throw Error(Errc::malformed_plan, "unparseable deadline");
            if (*sent != deadline) {
                throw Error(Errc::wrong_deadline,
                            "standardized deadline is " + plan::format_rfc3339(deadline));
            }
        }

        plan::InfoFields fields;
        fields.mode = plan::Mode::subscription;
        fields.model_id = need_string(*plan_it, "model", Errc::malformed_plan);
        std::uint64_t maxtok = need_uint(*plan_it, "maxtok", Errc::malformed_plan);
        if (maxtok == 0 || maxtok > 1'000'000'000) throw Error(Errc::malformed_plan, "bad maxtok");
        fields.max_tokens_per_request = static_cast<std::uint32_t>(maxtok);
        fields.deadline = deadline;
        pbrsa::InfoBytes info = plan::encode_info(fields);

        pbrsa::BlindedMessage blinded;
        try {
            blinded.value = decode_int(need_string(body, "blinded", Errc::malformed_plan), pk.bits);
        } catch (const std::invalid_argument& e) {
            throw Error(Errc::malformed_blinded, e.what());
        }

        std::string user;
        {
            std::lock_guard lock(accounts_mutex);
            user = authenticate(token);
        }
        pbrsa::BlindSignature bsig = pbrsa::sign_blinded(blinded, info, kp);
        {
            std::lock_guard lock(accounts_mutex);
            accounts.at(user).active_subscription = info.canonical;
        }
        res.set_content(
            json{{"signature", encode_int(bsig.value, pk.bits)}, {"info", info.canonical}}.dump(),
            "application/json");
    }

    void handle_infer(const httplib::Request& req, httplib::Response& res) {
        // Anonymous endpoint: no session is read and nothing here touches the
        // account table. Unknown fields are rejected so clients cannot leak
        // identifying extras.
        json body = parse_body(req, Errc::malformed_info);
        reject_unknown_keys(body, {"info", "ticket", "signature", "next_blinded", "query"},
                            Errc::malformed_info);
        std::string canonical = need_string(body, "info", Errc::malformed_info);
        plan::InfoFields fields = plan::decode_info(canonical); // MALFORMED_INFO
        pbrsa::InfoBytes info = pbrsa::InfoBytes::from_canonical(canonical);

        pbrsa::Ticket ticket;
        {
            std::vector<std::uint8_t> raw;
            try {
                raw = base64url_decode(need_string(body, "ticket", Errc::malformed_info));
            } catch (const std::invalid_argument& e) {
                throw Error(Errc::malformed_info, e.what());
            }
            if (raw.size() != pbrsa::kTicketLen) {
                throw Error(Errc::malformed_info, "ticket must be 32 bytes");
            }
            std::copy(raw.begin(), raw.end(), ticket.value.begin());
        }
        pbrsa::Signature sig;
        try {
            sig.value = decode_int(need_string(body, "signature", Errc::invalid_signature),
                                   pk.bits);
        } catch (const std::invalid_argument& e) {
            throw Error(Errc::invalid_signature, e.what());
        }
        std::string query = need_string(body, "query", Errc::malformed_info);

        const bool is_sub = fields.mode == plan::Mode::subscription;
        if (!is_sub && body.contains("next_blinded")) {
            throw Error(Errc::malformed_info, "next_blinded is subscription-only");
        }
        pbrsa::BlindedMessage next_blinded;
        if (is_sub) {
            if (plan::validate_info(fields, now()) == plan::InfoStatus::expired) {
                throw Error(Errc::expired_info,
                            "deadline " + plan::format_rfc3339(*fields.deadline) + " has passed");
            }
            try {
                next_blinded.value =
                    decode_int(need_string(body, "next_blinded", Errc::malformed_info), pk.bits);
            } catch (const std::invalid_argument& e) {
                throw Error(Errc::malformed_blinded, e.what());
            }
        }

        if (plan::count_tokens(query) > fields.max_tokens_per_request) {
            throw Error(Errc::token_limit,
                        "query exceeds " + std::to_string(fields.max_tokens_per_request) +
                            " tokens");
        }
        if (!pbrsa::verify(sig, ticket, info, pk)) {
            throw Error(Errc::invalid_signature, "credential does not verify");
        }
        // Commit point. API tickets always burn here; subscription tickets
        // only under single_session. Must precede the backend call.
        if (!is_sub || cfg.single_session) {
            if (!store.check_and_insert(used_ticket_digest(ticket, info), now())) {
                throw Error(Errc::double_spend, "ticket already redeemed");
            }
        }
        std::string answer = backend_complete(cfg.backend, query);

        json reply{{"answer", answer}};
        if (is_sub) {
            pbrsa::BlindSignature next = pbrsa::sign_blinded(next_blinded, info, kp);
            reply["next_signature"] = encode_int(next.value, pk.bits);
        }
        res.set_content(reply.dump(), "application/json");
    }

    void route(httplib::Server& s) {
        auto wrap = [this](void (Impl::*fn)(const httplib::Request&, httplib::Response&)) {
            return [this, fn](const httplib::Request& req, httplib::Response& res) {
                try {
                    (this->*fn)(req, res);
                } catch (const Error& e) {
                    write_error(res, e.code(), strip_code_prefix(e));
                } catch (const std::exception& e) {
                    res.status = 500;
                    res.set_content(json{{"error", "INTERNAL"}, {"message", e.what()}}.dump(),
                                    "application/json");
                }
            };
        };
        s.Get("/v1/pk", [this](const httplib::Request&, httplib::Response& res) {
            handle_pk(res);
        });
        s.Post("/v1/account/register",
               [this](const httplib::Request& req, httplib::Response& res) {
                   try {
                       handle_register(req, res, true);
                   } catch (const Error& e) {
                       write_error(res, e.code(), strip_code_prefix(e));
                   }
               });
        s.Post("/v1/account/login", [this](const httplib::Request& req, httplib::Response& res) {
            try {
                handle_register(req, res, false);
            } catch (const Error& e) {
                write_error(res, e.code(), strip_code_prefix(e));
            }
        });
        s.Post("/v1/purchase/api", wrap(&Impl::handle_purchase_api));
        s.Post("/v1/purchase/sub", wrap(&Impl::handle_purchase_sub));
        s.Post("/v1/infer", wrap(&Impl::handle_infer));
    }
};

GatewayServer::GatewayServer(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

GatewayServer::~GatewayServer() { stop(); }

const pbrsa::PublicKey& GatewayServer::public_key() const { return impl_->pk; }

int GatewayServer::start() {
    if (impl_->server) throw std::logic_error("GatewayServer already started");
    const GatewayConfig& cfg = impl_->cfg;
    if (!cfg.tls_cert.empty()) {
        auto ssl = std::make_unique<httplib::SSLServer>(cfg.tls_cert.c_str(), cfg.tls_key.c_str());
        if (!ssl->is_valid()) throw Error(Errc::bad_config, "bad TLS certificate or key");
        impl_->server = std::move(ssl);
    } else {
        impl_->server = std::make_unique<httplib::Server>();
    }
    httplib::Server& s = *impl_->server;
    s.new_task_queue = [] { return new httplib::ThreadPool(kWorkerThreads); };
    impl_->route(s);

    if (cfg.listen_port == 0) {
        impl_->port = s.bind_to_any_port(cfg.listen_host);
        if (impl_->port <= 0) throw Error(Errc::bad_config, "cannot bind " + cfg.listen_host);
    } else {
        if (!s.bind_to_port(cfg.listen_host, cfg.listen_port)) {
            throw Error(Errc::bad_config, "cannot bind " + cfg.listen_host + ":" +
                                              std::to_string(cfg.listen_port));
        }
        impl_->port = cfg.listen_port;
    }
    impl_->serve_thread = std::thread([&s] { s.listen_after_bind(); });
    s.wait_until_ready();
    return impl_->port;
}

void GatewayServer::stop() {
    if (impl_->server) {
        impl_->server->stop();
        if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
        impl_->server.reset();
        impl_->port = -1;
    }
}

bool GatewayServer::running() const { return impl_->server && impl_->server->is_running(); }

std::string GatewayServer::base_url() const {
    if (impl_->port < 0) throw std::logic_error("GatewayServer not started");
    const char* scheme = impl_->cfg.tls_cert.empty() ? "http" : "https";
    return std::string(scheme) + "://" + impl_->cfg.listen_host + ":" +
           std::to_string(impl_->port);
}

void GatewayServer::credit_account(const std::string& user, std::uint64_t credits) {
    std::lock_guard lock(impl_->accounts_mutex);
    auto it = impl_->accounts.find(user);
    if (it == impl_->accounts.end()) throw Error(Errc::auth_failed, "no such account");
    it->second.api_credits += credits;
}

std::optional<AccountSnapshot> GatewayServer::account_snapshot(const std::string& user) const {
    std::lock_guard lock(impl_->accounts_mutex);
    auto it = impl_->accounts.find(user);
    if (it == impl_->accounts.end()) return std::nullopt;
    return AccountSnapshot{user, it->second.api_credits, it->second.active_subscription};
}

void GatewayServer::set_clock(std::function<std::int64_t()> now_utc) {
    impl_->now = std::move(now_utc);
}

std::size_t GatewayServer::used_ticket_count() const { return impl_->store.size(); }

} // namespace blindgate::gateway
