#include <doctest.h>

#include "blindgate/encoding.hpp"
#include "blindgate/errors.hpp"
#include "blindgate/gateway.hpp"
#include "blindgate/gateway_client.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace blindgate;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("blindgate-gw-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

gateway::GatewayConfig small_config() {
    gateway::GatewayConfig cfg;
    cfg.listen_port = 0;
    cfg.bits = 512;
    cfg.allow_small_keys = true;
    return cfg;
}

struct LiveGateway {
    gateway::GatewayServer server;
    int port;
    client::GatewayClient http;
    pbrsa::PublicKey pk;

    explicit LiveGateway(gateway::GatewayConfig cfg = small_config())
        : server(std::move(cfg)), port(server.start()), http(server.base_url()),
          pk(server.public_key()) {}
};

struct Credential {
    pbrsa::Ticket ticket;
    pbrsa::Signature sig;
    std::string info;
};

// Buys `count` API credits in one purchase and unblinds them.
std::vector<Credential> buy_api(LiveGateway& gw, const std::string& session,
                                const std::string& model, std::uint32_t maxtok,
                                std::size_t count, RandomSource& rng) {
    auto fields = plan::InfoFields{};
    fields.mode = plan::Mode::api;
    fields.model_id = model;
    fields.max_tokens_per_request = maxtok;
    pbrsa::InfoBytes info = plan::encode_info(fields);

    auto tickets = plan::generate_tickets(count, rng);
    std::vector<pbrsa::BlindedMessage> blinded;
    std::vector<pbrsa::BlindingState> states;
    for (const auto& t : tickets) {
        auto [b, s] = pbrsa::blind(t, info, gw.pk, rng);
        blinded.push_back(b);
        states.push_back(s);
    }
    auto result = gw.http.purchase_api(session, model, maxtok, blinded, gw.pk);
    REQUIRE(result.info_canonical == info.canonical);

    std::vector<Credential> out;
    for (std::size_t i = 0; i < count; ++i) {
        pbrsa::Signature sig = pbrsa::unblind(result.blind_signatures[i], states[i], gw.pk);
        REQUIRE(pbrsa::verify(sig, tickets[i], info, gw.pk));
        out.push_back(Credential{tickets[i], sig, info.canonical});
    }
    return out;
}

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::network;
}

// Raw POST for malformed-body cases the typed client cannot produce.
std::pair<int, json> raw_post(LiveGateway& gw, const std::string& path, const json& body) {
    httplib::Client c(gw.server.base_url());
    auto res = c.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
}

} // namespace

TEST_CASE("pk endpoint advertises the exact verification key") {
    LiveGateway gw;
    auto key = gw.http.fetch_pk();
    CHECK(key.pk.bits == 512);
    CHECK(key.pk.n == gw.pk.n);
    CHECK(gw.server.running());
}

TEST_CASE("account lifecycle: register, duplicate, login, bad secret") {
    LiveGateway gw;
    std::string session = gw.http.register_account("alice", "hunter2");
    CHECK(!session.empty());

    CHECK(code_of([&] { gw.http.register_account("alice", "other"); }) == Errc::conflict);

    std::string session2 = gw.http.login("alice", "hunter2");
    CHECK(!session2.empty());
    CHECK(session2 != session);

    CHECK(code_of([&] { gw.http.login("alice", "wrong"); }) == Errc::auth_failed);
    CHECK(code_of([&] { gw.http.login("nobody", "hunter2"); }) == Errc::auth_failed);
    CHECK(code_of([&] { gw.http.register_account("", "x"); }) == Errc::auth_failed);
}

TEST_CASE("purchase requires a live session") {
    LiveGateway gw;
    SystemRandom rng;
    CHECK(code_of([&] {
              buy_api(gw, "bogus-session", "gpt2", 64, 1, rng);
          }) == Errc::auth_failed);
}

TEST_CASE("sessions expire on the server clock") {
    auto cfg = small_config();
    cfg.session_ttl_secs = 100;
    LiveGateway gw(cfg);
    std::atomic<std::int64_t> now{1'000'000};
    gw.server.set_clock([&] { return now.load(); });

    std::string session = gw.http.register_account("alice", "pw");
    SystemRandom rng;
    buy_api(gw, session, "gpt2", 64, 1, rng); // fresh session works
    now = 1'000'100;                          // ttl elapsed
    CHECK(code_of([&] { buy_api(gw, session, "gpt2", 64, 1, rng); }) == Errc::auth_failed);
}

TEST_CASE("api flow: purchase, infer, double spend") {
    LiveGateway gw;
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");
    auto creds = buy_api(gw, session, "gpt2", 64, 3, rng);

    for (const auto& c : creds) {
        auto r = gw.http.infer(c.info, c.ticket, c.sig, std::nullopt, "hello world", gw.pk);
        CHECK(r.answer.substr(0, 5) == "echo:");
        CHECK(r.answer.substr(r.answer.size() - 11) == "hello world");
        CHECK(!r.next_signature.has_value());
    }
    CHECK(gw.server.used_ticket_count() == 3);

    // Replaying any of them is a double spend, even with a different query.
    CHECK(code_of([&] {
              gw.http.infer(creds[0].info, creds[0].ticket, creds[0].sig, std::nullopt, "again",
                            gw.pk);
          }) == Errc::double_spend);
    CHECK(gw.server.used_ticket_count() == 3);
}

TEST_CASE("infer rejects bad credentials without consuming tickets") {
    LiveGateway gw;
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");
    auto creds = buy_api(gw, session, "gpt2", 4, 1, rng);
    const auto& c = creds[0];

    SUBCASE("tampered info fails verification") {
        std::string other = "v1|mode=api|model=gpt2|maxtok=5";
        CHECK(code_of([&] {
                  gw.http.infer(other, c.ticket, c.sig, std::nullopt, "q", gw.pk);
              }) == Errc::invalid_signature);
    }
    SUBCASE("malformed info string") {
        CHECK(code_of([&] {
                  gw.http.infer("v1|mode=api|model=gpt2|maxtok=04", c.ticket, c.sig, std::nullopt,
                                "q", gw.pk);
              }) == Errc::malformed_info);
    }
    SUBCASE("over the token limit") {
        CHECK(code_of([&] {
                  gw.http.infer(c.info, c.ticket, c.sig, std::nullopt, "a b c d e", gw.pk);
              }) == Errc::token_limit);
    }
    SUBCASE("garbage signature") {
        pbrsa::Signature bad{c.sig.value + Bigint(1)};
        CHECK(code_of([&] {
                  gw.http.infer(c.info, c.ticket, bad, std::nullopt, "q", gw.pk);
              }) == Errc::invalid_signature);
    }
    SUBCASE("next_blinded is rejected in api mode") {
        CHECK(code_of([&] {
                  gw.http.infer(c.info, c.ticket, c.sig, pbrsa::BlindedMessage{Bigint(5)}, "q",
                                gw.pk);
              }) == Errc::malformed_info);
    }

    // None of the failures above consumed the ticket.
    CHECK(gw.server.used_ticket_count() == 0);
    auto r = gw.http.infer(c.info, c.ticket, c.sig, std::nullopt, "q", gw.pk);
    CHECK(r.answer.substr(0, 5) == "echo:");
    CHECK(gw.server.used_ticket_count() == 1);
}

TEST_CASE("infer endpoint rejects identifying extras") {
    LiveGateway gw;
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");
    auto creds = buy_api(gw, session, "gpt2", 64, 1, rng);
    const auto& c = creds[0];

    std::vector<std::uint8_t> ticket_bytes(c.ticket.value.begin(), c.ticket.value.end());
    json body{{"info", c.info},
              {"ticket", base64url_encode(ticket_bytes)},
              {"signature", encode_int(c.sig.value, gw.pk.bits)},
              {"query", "q"},
              {"session", session}};
    auto [status, reply] = raw_post(gw, "/v1/infer", body);
    CHECK(status == 400);
    CHECK(reply.at("error") == "MALFORMED_INFO");
    CHECK(gw.server.used_ticket_count() == 0);
}

TEST_CASE("malformed purchases") {
    LiveGateway gw;
    std::string session = gw.http.register_account("alice", "pw");
    json good_blinded = json::array({encode_int(Bigint(12345), gw.pk.bits)});

    auto expect = [&](const json& body, int status, const std::string& code) {
        auto [got_status, reply] = raw_post(gw, "/v1/purchase/api", body);
        CHECK(got_status == status);
        CHECK(reply.at("error") == code);
    };

    // count disagrees with the blinded array
    expect(json{{"session", session},
                {"plan", {{"mode", "api"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 2}}},
                {"blinded", good_blinded}},
           400, "MALFORMED_PLAN");
    // zero count
    expect(json{{"session", session},
                {"plan", {{"mode", "api"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 0}}},
                {"blinded", json::array()}},
           400, "MALFORMED_PLAN");
    // bad model id
    expect(json{{"session", session},
                {"plan", {{"mode", "api"}, {"model", "bad model"}, {"maxtok", 64}, {"count", 1}}},
                {"blinded", good_blinded}},
           400, "MALFORMED_PLAN");
    // unknown plan field
    expect(json{{"session", session},
                {"plan",
                 {{"mode", "api"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 1}, {"x", 1}}},
                {"blinded", good_blinded}},
           400, "MALFORMED_PLAN");
    // sub plan on the api endpoint
    expect(json{{"session", session},
                {"plan", {{"mode", "sub"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 1}}},
                {"blinded", good_blinded}},
           400, "MALFORMED_PLAN");
    // non-canonical blinded width
    expect(json{{"session", session},
                {"plan", {{"mode", "api"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 1}}},
                {"blinded", json::array({"AAA"})}},
           400, "MALFORMED_BLINDED");
    // blinded value outside the unit group (multiple of p stays malformed)
    expect(json{{"session", session},
                {"plan", {{"mode", "api"}, {"model", "gpt2"}, {"maxtok", 64}, {"count", 1}}},
                {"blinded", json::array({encode_int(Bigint(0), gw.pk.bits)})}},
           400, "MALFORMED_BLINDED");
}

TEST_CASE("credits gate purchases when auto_credit is off") {
    auto cfg = small_config();
    cfg.auto_credit = false;
    LiveGateway gw(cfg);
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");

    CHECK(code_of([&] { buy_api(gw, session, "gpt2", 64, 2, rng); }) ==
          Errc::insufficient_credits);

    gw.server.credit_account("alice", 5);
    buy_api(gw, session, "gpt2", 64, 2, rng);
    auto snap = gw.server.account_snapshot("alice");
    REQUIRE(snap.has_value());
    CHECK(snap->api_credits == 3);
    CHECK_FALSE(snap->active_subscription.has_value());
}

TEST_CASE("subscription flow: deadline, chaining, expiry") {
    LiveGateway gw;
    std::atomic<std::int64_t> now{1741944413}; // 2025-03-14T09:26:53Z
    gw.server.set_clock([&] { return now.load(); });
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");

    plan::InfoFields fields;
    fields.mode = plan::Mode::subscription;
    fields.model_id = "gpt2";
    fields.max_tokens_per_request = 64;
    fields.deadline = plan::standardize_deadline(now.load(), plan::Period::monthly);
    CHECK(*fields.deadline == 1743465600); // 2025-04-01T00:00:00Z
    pbrsa::InfoBytes info = plan::encode_info(fields);

    // A deadline the client computed differently is refused outright.
    {
        pbrsa::Ticket t = pbrsa::random_ticket(rng);
        auto [b, s] = pbrsa::blind(t, info, gw.pk, rng);
        CHECK(code_of([&] {
                  gw.http.purchase_sub(session, "gpt2", 64, plan::Period::monthly,
                                       plan::UtcSeconds{1746057600}, b, gw.pk);
              }) == Errc::wrong_deadline);
    }

    pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
    auto [blinded, state] = pbrsa::blind(ticket, info, gw.pk, rng);
    auto purchase = gw.http.purchase_sub(session, "gpt2", 64, plan::Period::monthly,
                                         fields.deadline, blinded, gw.pk);
    CHECK(purchase.info_canonical == info.canonical);
    pbrsa::Signature sig = pbrsa::unblind(purchase.blind_signature, state, gw.pk);
    REQUIRE(pbrsa::verify(sig, ticket, info, gw.pk));

    auto snap = gw.server.account_snapshot("alice");
    REQUIRE(snap.has_value());
    CHECK(snap->active_subscription == info.canonical);

    // Chain five asks; each reply must sign the next blinded ticket.
    for (int i = 0; i < 5; ++i) {
        pbrsa::Ticket next_ticket = pbrsa::random_ticket(rng);
        auto [next_blinded, next_state] = pbrsa::blind(next_ticket, info, gw.pk, rng);
        auto r = gw.http.infer(info.canonical, ticket, sig, next_blinded,
                               "ask " + std::to_string(i), gw.pk);
        CHECK(r.answer.substr(0, 5) == "echo:");
        REQUIRE(r.next_signature.has_value());
        pbrsa::Signature next_sig = pbrsa::unblind(*r.next_signature, next_state, gw.pk);
        REQUIRE(pbrsa::verify(next_sig, next_ticket, info, gw.pk));
        ticket = next_ticket;
        sig = next_sig;
    }
    // single_session is off: nothing was journaled.
    CHECK(gw.server.used_ticket_count() == 0);

    // Missing next_blinded on a subscription ask.
    CHECK(code_of([&] {
              gw.http.infer(info.canonical, ticket, sig, std::nullopt, "q", gw.pk);
          }) == Errc::malformed_info);

    // At the deadline the credential is dead and consumes nothing.
    now = *fields.deadline;
    pbrsa::Ticket spare = pbrsa::random_ticket(rng);
    auto [spare_blinded, spare_state] = pbrsa::blind(spare, info, gw.pk, rng);
    CHECK(code_of([&] {
              gw.http.infer(info.canonical, ticket, sig, spare_blinded, "q", gw.pk);
          }) == Errc::expired_info);
    CHECK(gw.server.used_ticket_count() == 0);

    // One second before the deadline it still works.
    now = *fields.deadline - 1;
    auto r = gw.http.infer(info.canonical, ticket, sig, spare_blinded, "q", gw.pk);
    CHECK(r.answer.substr(0, 5) == "echo:");
}

TEST_CASE("single_session makes subscription replays double spends") {
    auto cfg = small_config();
    cfg.single_session = true;
    LiveGateway gw(cfg);
    std::atomic<std::int64_t> now{1741944413};
    gw.server.set_clock([&] { return now.load(); });
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");

    plan::InfoFields fields;
    fields.mode = plan::Mode::subscription;
    fields.model_id = "gpt2";
    fields.max_tokens_per_request = 64;
    fields.deadline = plan::standardize_deadline(now.load(), plan::Period::monthly);
    pbrsa::InfoBytes info = plan::encode_info(fields);

    pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
    auto [blinded, state] = pbrsa::blind(ticket, info, gw.pk, rng);
    auto purchase =
        gw.http.purchase_sub(session, "gpt2", 64, plan::Period::monthly, std::nullopt, blinded,
                             gw.pk);
    pbrsa::Signature sig = pbrsa::unblind(purchase.blind_signature, state, gw.pk);

    pbrsa::Ticket next = pbrsa::random_ticket(rng);
    auto [nb, ns] = pbrsa::blind(next, info, gw.pk, rng);
    auto r = gw.http.infer(info.canonical, ticket, sig, nb, "q", gw.pk);
    REQUIRE(r.next_signature.has_value());
    CHECK(gw.server.used_ticket_count() == 1);

    CHECK(code_of([&] {
              gw.http.infer(info.canonical, ticket, sig, nb, "q", gw.pk);
          }) == Errc::double_spend);
}

TEST_CASE("key persists across restarts") {
    TempDir dir;
    auto cfg = small_config();
    cfg.key_path = dir.file("key.json");
    Bigint n_first;
    {
        gateway::GatewayServer server(cfg);
        n_first = server.public_key().n;
        CHECK(fs::exists(cfg.key_path));
    }
    {
        gateway::GatewayServer server(cfg);
        CHECK(server.public_key().n == n_first);
    }
    // A corrupt key file refuses to load rather than silently regenerating.
    {
        std::ofstream out(cfg.key_path, std::ios::trunc);
        out << "{\"bits\": 512, \"p\": \"15\", \"q\": \"9\"}";
    }
    CHECK(code_of([&] { gateway::GatewayServer server(cfg); }) == Errc::bad_config);
}

TEST_CASE("journal makes double spends stick across restarts") {
    TempDir dir;
    auto cfg = small_config();
    cfg.key_path = dir.file("key.json");
    cfg.journal_path = dir.file("journal");

    pbrsa::Ticket ticket;
    pbrsa::Signature sig;
    std::string info_canonical;
    pbrsa::PublicKey pk;
    {
        LiveGateway gw(cfg);
        pk = gw.pk;
        SystemRandom rng;
        std::string session = gw.http.register_account("alice", "pw");
        auto creds = buy_api(gw, session, "gpt2", 64, 2, rng);
        ticket = creds[0].ticket;
        sig = creds[0].sig;
        info_canonical = creds[0].info;
        auto r = gw.http.infer(info_canonical, ticket, sig, std::nullopt, "q", gw.pk);
        CHECK(r.answer.substr(0, 5) == "echo:");
        gw.server.stop();
    }
    {
        LiveGateway gw(cfg);
        REQUIRE(gw.pk.n == pk.n); // same key, old credentials still meaningful
        CHECK(gw.server.used_ticket_count() == 1);
        CHECK(code_of([&] {
                  gw.http.infer(info_canonical, ticket, sig, std::nullopt, "q", gw.pk);
              }) == Errc::double_spend);
    }
}

TEST_CASE("concurrent redemption of one credential has exactly one winner") {
    LiveGateway gw;
    SystemRandom rng;
    std::string session = gw.http.register_account("alice", "pw");
    auto creds = buy_api(gw, session, "gpt2", 64, 1, rng);
    const auto& c = creds[0];

    constexpr int kThreads = 16;
    std::atomic<int> ready{0}, wins{0}, double_spends{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> threads;
    for (int i = 0; i < kThreads; ++i) {
        threads.emplace_back([&] {
            client::GatewayClient http(gw.server.base_url());
            ready.fetch_add(1);
            while (!go.load()) std::this_thread::yield();
            try {
                http.infer(c.info, c.ticket, c.sig, std::nullopt, "q", gw.pk);
                wins.fetch_add(1);
            } catch (const Error& e) {
                if (e.code() == Errc::double_spend) double_spends.fetch_add(1);
            }
        });
    }
    while (ready.load() < kThreads) std::this_thread::yield();
    go.store(true);
    for (auto& t : threads) t.join();

    CHECK(wins.load() == 1);
    CHECK(double_spends.load() == kThreads - 1);
    CHECK(gw.server.used_ticket_count() == 1);
}

TEST_CASE("config parser") {
    SUBCASE("full file") {
        auto cfg = gateway::parse_config("# gateway config\n"
                                         "listen = 0.0.0.0:9000\n"
                                         "bits = 1024\n"
                                         "key_path = /tmp/key.json # inline comment\n"
                                         "journal_path = /tmp/journal\n"
                                         "backend = http_proxy\n"
                                         "backend_url = http://127.0.0.1:8000\n"
                                         "backend_timeout_secs = 5\n"
                                         "single_session = true\n"
                                         "session_ttl_secs = 60\n"
                                         "auto_credit = false\n"
                                         "allow_small_keys = false\n");
        CHECK(cfg.listen_host == "0.0.0.0");
        CHECK(cfg.listen_port == 9000);
        CHECK(cfg.bits == 1024);
        CHECK(cfg.key_path == "/tmp/key.json");
        CHECK(cfg.backend.kind == gateway::BackendKind::http_proxy);
        CHECK(cfg.backend.url == "http://127.0.0.1:8000");
        CHECK(cfg.backend.timeout_secs == 5);
        CHECK(cfg.single_session);
        CHECK(cfg.session_ttl_secs == 60);
        CHECK_FALSE(cfg.auto_credit);
    }
    SUBCASE("defaults") {
        auto cfg = gateway::parse_config("");
        CHECK(cfg.listen_host == "127.0.0.1");
        CHECK(cfg.listen_port == 8080);
        CHECK(cfg.bits == 2048);
        CHECK(cfg.backend.kind == gateway::BackendKind::echo);
        CHECK(cfg.auto_credit);
    }
    SUBCASE("rejects") {
        auto code = [](const char* text) {
            try {
                gateway::parse_config(text);
            } catch (const Error& e) {
                return e.code();
            }
            return Errc::network;
        };
        CHECK(code("unknown_key = 1\n") == Errc::bad_config);
        CHECK(code("bits\n") == Errc::bad_config);
        CHECK(code("bits = twelve\n") == Errc::bad_config);
        CHECK(code("listen = nocolon\n") == Errc::bad_config);
        CHECK(code("single_session = maybe\n") == Errc::bad_config);
        CHECK(code("backend = other\n") == Errc::bad_config);
        CHECK(code("backend = http_proxy\n") == Errc::bad_config); // url missing
        CHECK(code("tls_cert = /tmp/c.pem\n") == Errc::bad_config); // key missing
    }
    SUBCASE("small keys need the explicit flag") {
        auto cfg = small_config();
        cfg.allow_small_keys = false;
        try {
            gateway::GatewayServer server(cfg);
            FAIL_CHECK("expected BAD_CONFIG");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::bad_config);
        }
    }
}
