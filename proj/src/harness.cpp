#include "blindgate/harness.hpp"

#include "blindgate/backend.hpp"
#include "blindgate/encoding.hpp"
#include "blindgate/errors.hpp"
#include "blindgate/gateway.hpp"
#include "blindgate/gateway_client.hpp"
#include "blindgate/pbrsa_batch.hpp"
#include "blindgate/plan.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace blindgate::harness {

using nlohmann::json;

namespace {

Bigint absdiff(const Bigint& a, const Bigint& b) { return a < b ? b - a : a - b; }

pbrsa::InfoBytes default_info() {
    plan::InfoFields fields;
    fields.mode = plan::Mode::api;
    fields.model_id = "gpt2";
    fields.max_tokens_per_request = 64;
    return plan::encode_info(fields);
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

// ---- GAME A ----------------------------------------------------------------

Distinguisher make_random_guess(RandomSource& rng) {
    return [&rng](const SignerView&) {
        std::uint8_t byte;
        rng.fill({&byte, 1});
        return byte & 1;
    };
}

Distinguisher make_nearest_value() {
    return [](const SignerView& view) {
        Bigint h0 = pbrsa::hash_to_group(pbrsa::canonical_message(view.message0, view.info),
                                         view.pk);
        Bigint h1 = pbrsa::hash_to_group(pbrsa::canonical_message(view.message1, view.info),
                                         view.pk);
        return absdiff(view.blinded_first, h0) < absdiff(view.blinded_first, h1) ? 0 : 1;
    };
}

Distinguisher make_cheating() {
    return [](const SignerView& view) {
        // With the first session's blinding factor in hand the view unblinds
        // trivially: m_h = blinded / r^e_info.
        Bigint e_info = pbrsa::derive_info_exponent(view.info, view.pk);
        Bigint mask = powmod(view.cheat_r_first, e_info, view.pk.n);
        auto inv = invmod(mask, view.pk.n);
        if (!inv) return 0; // cannot happen for honest transcripts
        Bigint m_h = mulmod(view.blinded_first, *inv, view.pk.n);
        Bigint h0 = pbrsa::hash_to_group(pbrsa::canonical_message(view.message0, view.info),
                                         view.pk);
        return m_h == h0 ? 0 : 1;
    };
}

double run_game_a(std::size_t trials, const Distinguisher& distinguisher, std::size_t bits,
                  RandomSource& rng) {
    if (trials < 100) throw std::invalid_argument("run_game_a needs at least 100 trials");
    pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
    pbrsa::PublicKey pk = kp.public_key();
    pbrsa::InfoBytes info = default_info();

    std::size_t correct = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        pbrsa::Ticket t0 = pbrsa::random_ticket(rng);
        pbrsa::Ticket t1 = pbrsa::random_ticket(rng);
        std::uint8_t byte;
        rng.fill({&byte, 1});
        const int b = byte & 1;

        auto [blinded0, state0] = pbrsa::blind(t0, info, pk, rng);
        auto [blinded1, state1] = pbrsa::blind(t1, info, pk, rng);

        // Interaction order: the first signing session belongs to message b.
        const auto& first = b == 0 ? blinded0 : blinded1;
        const auto& second = b == 0 ? blinded1 : blinded0;
        pbrsa::BlindSignature bsig_first = pbrsa::sign_blinded(first, info, kp);
        pbrsa::BlindSignature bsig_second = pbrsa::sign_blinded(second, info, kp);
        const auto& bsig0 = b == 0 ? bsig_first : bsig_second;
        const auto& bsig1 = b == 0 ? bsig_second : bsig_first;

        pbrsa::Signature sig0 = pbrsa::unblind(bsig0, state0, pk);
        pbrsa::Signature sig1 = pbrsa::unblind(bsig1, state1, pk);

        SignerView view;
        view.blinded_first = first.value;
        view.blinded_second = second.value;
        view.bsig_first = bsig_first.value;
        view.bsig_second = bsig_second.value;
        view.message0 = t0;
        view.message1 = t1;
        view.sig0 = sig0.value;
        view.sig1 = sig1.value;
        view.info = info;
        view.pk = pk;
        view.cheat_r_first = b == 0 ? state0.r : state1.r;

        if (distinguisher(view) == b) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(trials);
}

// ---- blindness witness -------------------------------------------------------

TranscriptPair make_honest_pair(const pbrsa::KeyPair& kp, const pbrsa::InfoBytes& info,
                                RandomSource& rng) {
    pbrsa::PublicKey pk = kp.public_key();
    TranscriptPair pair;
    pair.info0 = info;
    pair.info1 = info;
    pair.ticket0 = pbrsa::random_ticket(rng);
    pair.ticket1 = pbrsa::random_ticket(rng);

    auto [blinded0, state0] = pbrsa::blind(pair.ticket0, info, pk, rng);
    auto [blinded1, state1] = pbrsa::blind(pair.ticket1, info, pk, rng);
    pair.blinded0 = blinded0.value;
    pair.blinded1 = blinded1.value;
    pbrsa::BlindSignature bsig0 = pbrsa::sign_blinded(blinded0, info, kp);
    pbrsa::BlindSignature bsig1 = pbrsa::sign_blinded(blinded1, info, kp);
    pair.bsig0 = bsig0.value;
    pair.bsig1 = bsig1.value;
    pair.sig0 = pbrsa::unblind(bsig0, state0, pk).value;
    pair.sig1 = pbrsa::unblind(bsig1, state1, pk).value;
    return pair;
}

bool blindness_witness(const TranscriptPair& pair, const pbrsa::KeyPair& kp) {
    if (pair.info0.canonical != pair.info1.canonical) {
        throw std::invalid_argument("blindness witness requires identical infos");
    }
    pbrsa::PublicKey pk = kp.public_key();
    Bigint e_info = pbrsa::derive_info_exponent(pair.info0, pk);
    Bigint d_info = pbrsa::derive_info_secret(e_info, kp);
    Bigint h0 = pbrsa::hash_to_group(pbrsa::canonical_message(pair.ticket0, pair.info0), pk);
    Bigint h1 = pbrsa::hash_to_group(pbrsa::canonical_message(pair.ticket1, pair.info1), pk);

    // Recover the blinding factor this pairing would require and test it.
    auto witnessed = [&](const Bigint& blinded, const Bigint& m_h) {
        auto m_h_inv = invmod(m_h, pk.n);
        if (!m_h_inv) return false;
        Bigint r_prime = powmod(mulmod(blinded, *m_h_inv, pk.n), d_info, pk.n);
        return mulmod(m_h, powmod(r_prime, e_info, pk.n), pk.n) == blinded;
    };
    bool straight = witnessed(pair.blinded0, h0) && witnessed(pair.blinded1, h1);
    bool swapped = witnessed(pair.blinded0, h1) && witnessed(pair.blinded1, h0);
    return straight && swapped;
}

// ---- forgery suite -----------------------------------------------------------

namespace {

/// Tampered variants of a subscription info string. Index 0 is the classic
/// moved-deadline attack; the rest cycle through the other fields.
std::string tampered_info(const std::string& canonical, std::size_t variant) {
    plan::InfoFields fields = plan::decode_info(canonical);
    switch (variant % 4) {
    case 0: { // deadline pushed one month out
        if (fields.deadline) {
            fields.deadline = plan::standardize_deadline(*fields.deadline, plan::Period::monthly);
        } else {
            fields.max_tokens_per_request += 1;
        }
        break;
    }
    case 1:
        fields.max_tokens_per_request += 1;
        break;
    case 2:
        fields.model_id = fields.model_id == "gpt2" ? "gpt3" : "gpt2";
        break;
    default:
        if (fields.mode == plan::Mode::subscription) {
            fields.mode = plan::Mode::api;
            fields.deadline.reset();
        } else {
            fields.mode = plan::Mode::subscription;
            fields.deadline = plan::UtcSeconds{1743465600}; // first of a month
        }
        break;
    }
    return plan::encode_info(fields).canonical;
}

} // namespace

ForgeryReport run_forgery_suite(std::size_t bits, RandomSource& rng, std::size_t random_trials,
                                std::size_t tamper_trials, std::size_t wrong_key_trials,
                                std::size_t issued) {
    ForgeryReport report;
    pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
    pbrsa::PublicKey pk = kp.public_key();
    pbrsa::InfoBytes api_info = default_info();

    // (a) random values as signatures
    report.random_trials = random_trials;
    for (std::size_t i = 0; i < random_trials; ++i) {
        pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
        pbrsa::Signature guess{random_below(rng, pk.n)};
        if (pbrsa::verify(guess, ticket, api_info, pk)) ++report.random_accepts;
    }

    // (b) valid signature replayed under modified metadata
    plan::InfoFields sub_fields;
    sub_fields.mode = plan::Mode::subscription;
    sub_fields.model_id = "gpt2";
    sub_fields.max_tokens_per_request = 64;
    sub_fields.deadline = plan::UtcSeconds{1743465600}; // a month boundary
    pbrsa::InfoBytes sub_info = plan::encode_info(sub_fields);

    report.tamper_trials = tamper_trials;
    for (std::size_t i = 0; i < tamper_trials; ++i) {
        const pbrsa::InfoBytes& info = i % 2 == 0 ? sub_info : api_info;
        pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
        auto [blinded, state] = pbrsa::blind(ticket, info, pk, rng);
        pbrsa::Signature sig = pbrsa::unblind(pbrsa::sign_blinded(blinded, info, kp), state, pk);

        pbrsa::InfoBytes altered =
            pbrsa::InfoBytes::from_canonical(tampered_info(info.canonical, i));
        if (pbrsa::verify(sig, ticket, altered, pk)) ++report.tamper_accepts;
    }

    // (c) signature from a different key
    pbrsa::KeyPair other = pbrsa::setup(bits, rng);
    pbrsa::PublicKey other_pk = other.public_key();
    report.wrong_key_trials = wrong_key_trials;
    for (std::size_t i = 0; i < wrong_key_trials; ++i) {
        pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
        auto [blinded, state] = pbrsa::blind(ticket, api_info, other_pk, rng);
        pbrsa::Signature sig =
            pbrsa::unblind(pbrsa::sign_blinded(blinded, api_info, other), state, other_pk);
        if (pbrsa::verify(sig, ticket, api_info, pk)) ++report.wrong_key_accepts;
    }

    // (d) one-more count against a live gateway
    gateway::GatewayConfig cfg;
    cfg.listen_port = 0;
    cfg.bits = bits;
    cfg.allow_small_keys = bits < 1024;
    gateway::GatewayServer server(cfg);
    server.start();
    client::GatewayClient http(server.base_url());
    pbrsa::PublicKey live_pk = http.fetch_pk().pk;

    std::string session = http.register_account("forgery-suite", "secret");
    auto tickets = plan::generate_tickets(issued, rng);
    std::vector<pbrsa::BlindedMessage> blinded;
    std::vector<pbrsa::BlindingState> states;
    for (const auto& t : tickets) {
        auto [b, s] = pbrsa::blind(t, api_info, live_pk, rng);
        blinded.push_back(b);
        states.push_back(s);
    }
    auto purchase = http.purchase_api(session, "gpt2", 64, blinded, live_pk);
    report.issued = issued;
    std::vector<pbrsa::Signature> sigs;
    for (std::size_t i = 0; i < issued; ++i) {
        sigs.push_back(pbrsa::unblind(purchase.blind_signatures[i], states[i], live_pk));
    }
    for (std::size_t i = 0; i < issued; ++i) {
        try {
            http.infer(api_info.canonical, tickets[i], sigs[i], std::nullopt,
                       "q " + std::to_string(i), live_pk);
            ++report.redeemed;
        } catch (const Error&) {
            // a failed redemption only hurts the count, never the bound
        }
    }
    try {
        http.infer(api_info.canonical, tickets[0], sigs[0], std::nullopt, "once more", live_pk);
    } catch (const Error& e) {
        report.extra_attempt_rejected = e.code() == Errc::double_spend;
    }
    server.stop();
    return report;
}

std::string format_forgery(const ForgeryReport& r) {
    std::ostringstream out;
    out << "forgery suite\n"
        << "  random signatures     " << r.random_accepts << "/" << r.random_trials
        << " accepted\n"
        << "  tampered metadata     " << r.tamper_accepts << "/" << r.tamper_trials
        << " accepted\n"
        << "  wrong-key signatures  " << r.wrong_key_accepts << "/" << r.wrong_key_trials
        << " accepted\n"
        << "  one-more bound        " << r.redeemed << "/" << r.issued << " redeemed, extra "
        << (r.extra_attempt_rejected ? "rejected" : "NOT rejected") << "\n"
        << "  verdict               " << (r.pass() ? "pass" : "FAIL") << "\n";
    return out.str();
}

// ---- operation-count audit ---------------------------------------------------

namespace {

PhaseCounts phase_delta(const OpCounts& before, const OpCounts& after) {
    OpCounts d = opcount_delta(before, after);
    PhaseCounts p;
    p.modmul_full = d.modmul_full;
    p.modmul_reduced = d.modmul_reduced;
    p.modexp_full = d.modexp_full;
    p.modexp_reduced = d.modexp_reduced;
    p.hash_to_group = d.hash_to_group;
    return p;
}

PhaseCounts phase_sum(const PhaseCounts& a, const PhaseCounts& b) {
    PhaseCounts s;
    s.modmul_full = a.modmul_full + b.modmul_full;
    s.modmul_reduced = a.modmul_reduced + b.modmul_reduced;
    s.modexp_full = a.modexp_full + b.modexp_full;
    s.modexp_reduced = a.modexp_reduced + b.modexp_reduced;
    s.hash_to_group = a.hash_to_group + b.hash_to_group;
    return s;
}

void note_deviation(std::vector<std::string>& out, const char* phase, const PhaseCounts& got,
                    std::uint64_t want_mul, std::uint64_t want_exp, std::uint64_t want_hash) {
    if (got.modmul_full != want_mul || got.modexp_total() != want_exp ||
        got.hash_to_group != want_hash) {
        std::ostringstream s;
        s << phase << ": measured " << got.modmul_full << " mul / " << got.modexp_total()
          << " exp / " << got.hash_to_group << " hash, cost model states " << want_mul << " / "
          << want_exp << " / " << want_hash;
        out.push_back(s.str());
    }
}

} // namespace

AuditReport opcount_audit(std::size_t bits, RandomSource& rng) {
    AuditReport report;
    report.bits = bits;
    pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
    pbrsa::PublicKey pk = kp.public_key();
    pbrsa::InfoBytes info = default_info();
    pbrsa::Ticket ticket = pbrsa::random_ticket(rng);

    opcount_set_full_width_floor(bits);
    OpCounts s0 = opcount_snapshot();
    auto [blinded, state] = pbrsa::blind(ticket, info, pk, rng);
    OpCounts s1 = opcount_snapshot();
    pbrsa::BlindSignature bsig = pbrsa::sign_blinded(blinded, info, kp);
    OpCounts s2 = opcount_snapshot();
    pbrsa::Signature sig = pbrsa::unblind(bsig, state, pk);
    OpCounts s3 = opcount_snapshot();
    bool ok = pbrsa::verify(sig, ticket, info, pk);
    OpCounts s4 = opcount_snapshot();
    opcount_set_full_width_floor(0);
    if (!ok) throw std::logic_error("audit cycle failed to verify");

    report.blind = phase_delta(s0, s1);
    report.sign = phase_delta(s1, s2);
    report.unblind = phase_delta(s2, s3);
    report.verify = phase_delta(s3, s4);
    report.total = phase_sum(phase_sum(report.blind, report.sign),
                             phase_sum(report.unblind, report.verify));
    report.within_budget = report.total.modmul_full <= 2 && report.total.modexp_total() <= 5 &&
                           report.total.hash_to_group == 2;

    // Stated per-phase split: blind 1 mul + 1 exp, sign 2 exp (the CRT pair),
    // unblind 1 mul + 1 exp (its internal check), verify 1 exp.
    note_deviation(report.deviations, "blind", report.blind, 1, 1, 1);
    note_deviation(report.deviations, "sign", report.sign, 0, 2, 0);
    note_deviation(report.deviations, "unblind", report.unblind, 1, 1, 0);
    note_deviation(report.deviations, "verify", report.verify, 0, 1, 1);
    return report;
}

std::string format_audit(const AuditReport& r) {
    std::ostringstream out;
    auto row = [&](const char* name, const PhaseCounts& p) {
        out << "  " << name;
        for (std::size_t i = std::string(name).size(); i < 9; ++i) out << ' ';
        out << p.modmul_full << " full-mul  " << p.modmul_reduced << " half-mul  "
            << p.modexp_full << " full-exp  " << p.modexp_reduced << " half-exp  "
            << p.hash_to_group << " H_M\n";
    };
    out << "operation counts per signature cycle (" << r.bits << "-bit modulus)\n";
    row("blind", r.blind);
    row("sign", r.sign);
    row("unblind", r.unblind);
    row("verify", r.verify);
    row("total", r.total);
    out << "  budget   " << r.total.modmul_full << "/2 full-width multiplications, "
        << r.total.modexp_total() << "/5 exponentiations, " << r.total.hash_to_group
        << "/2 H_M calls -> " << (r.within_budget ? "within budget" : "OVER BUDGET") << "\n";
    for (const auto& d : r.deviations) out << "  note: " << d << "\n";
    return out.str();
}

// ---- benchmark -----------------------------------------------------------------

namespace {

/// Bare completion service: the query is the request body, the answer is the
/// response body. This is the no-credential baseline the gateway overhead is
/// measured against.
struct BaselineBackend {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    BaselineBackend() {
        server.Post("/complete", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content(gateway::echo_answer(req.body), "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        if (port <= 0) throw Error(Errc::network, "cannot bind baseline backend");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~BaselineBackend() {
        server.stop();
        thread.join();
    }
};

} // namespace

BenchReport run_bench(const BenchConfig& config) {
    BenchReport report;
    report.bits = config.bits;
    report.reps = config.reps;
    SystemRandom rng;
    const std::string query = "What is the capital of the smallest country by area";

    BaselineBackend baseline;

    std::unique_ptr<gateway::GatewayServer> local;
    std::string url = config.server_url;
    if (url.empty()) {
        gateway::GatewayConfig cfg;
        cfg.listen_port = 0;
        cfg.bits = config.bits;
        cfg.allow_small_keys = config.bits < 1024;
        local = std::make_unique<gateway::GatewayServer>(cfg);
        local->start();
        url = local->base_url();
    }
    client::GatewayClient http(url);
    pbrsa::PublicKey pk = http.fetch_pk().pk;
    report.bits = pk.bits;

    std::string user = "bench-" + to_hex(rng.bytes(8));
    std::string session = http.register_account(user, "bench-secret");

    // baseline rows
    {
        httplib::Client direct("http://127.0.0.1:" + std::to_string(baseline.port));
        double total = 0.0;
        std::size_t req_bytes = 0, resp_bytes = 0;
        for (int i = 0; i < config.reps; ++i) {
            double t0 = now_ms();
            auto res = direct.Post("/complete", query, "text/plain");
            double t1 = now_ms();
            if (!res || res->status != 200) throw Error(Errc::network, "baseline request failed");
            total += t1 - t0;
            req_bytes += query.size();
            resp_bytes += res->body.size();
        }
        report.baseline.mode = "baseline";
        report.baseline.mean_ms = total / config.reps;
        report.baseline.request_bytes = req_bytes / config.reps;
        report.baseline.response_bytes = resp_bytes / config.reps;
    }

    pbrsa::InfoBytes api_info;
    {
        plan::InfoFields fields;
        fields.mode = plan::Mode::api;
        fields.model_id = config.model;
        fields.max_tokens_per_request = config.maxtok;
        api_info = plan::encode_info(fields);
    }

    // api rows: one credential per repetition, purchased up front
    {
        auto tickets = plan::generate_tickets(static_cast<std::size_t>(config.reps), rng);
        std::vector<pbrsa::BlindedMessage> blinded;
        std::vector<pbrsa::BlindingState> states;
        for (const auto& t : tickets) {
            auto [b, s] = pbrsa::blind(t, api_info, pk, rng);
            blinded.push_back(b);
            states.push_back(s);
        }
        auto purchase = http.purchase_api(session, config.model, config.maxtok, blinded, pk);
        std::vector<pbrsa::Signature> sigs;
        for (int i = 0; i < config.reps; ++i) {
            sigs.push_back(pbrsa::unblind(purchase.blind_signatures[i], states[i], pk));
        }

        double total = 0.0;
        std::size_t req_bytes = 0, resp_bytes = 0;
        for (int i = 0; i < config.reps; ++i) {
            double t0 = now_ms();
            auto r = http.infer(api_info.canonical, tickets[i], sigs[i], std::nullopt, query, pk);
            double t1 = now_ms();
            total += t1 - t0;
            req_bytes += r.request_bytes;
            resp_bytes += r.response_bytes;
        }
        report.api.mode = "api";
        report.api.mean_ms = total / config.reps;
        report.api.request_bytes = req_bytes / config.reps;
        report.api.response_bytes = resp_bytes / config.reps;
    }

    // subscription rows: a single credential chained through the repetitions
    {
        plan::InfoFields fields;
        fields.mode = plan::Mode::subscription;
        fields.model_id = config.model;
        fields.max_tokens_per_request = config.maxtok;
        fields.deadline = plan::standardize_deadline(std::time(nullptr), plan::Period::monthly);
        pbrsa::InfoBytes sub_info = plan::encode_info(fields);

        pbrsa::Ticket ticket = pbrsa::random_ticket(rng);
        auto [blinded, state] = pbrsa::blind(ticket, sub_info, pk, rng);
        auto purchase = http.purchase_sub(session, config.model, config.maxtok,
                                          plan::Period::monthly, fields.deadline, blinded, pk);
        if (purchase.info_canonical != sub_info.canonical) {
            throw Error(Errc::wrong_deadline, "server standardized a different deadline");
        }
        pbrsa::Signature sig = pbrsa::unblind(purchase.blind_signature, state, pk);

        double total = 0.0;
        std::size_t req_bytes = 0, resp_bytes = 0;
        for (int i = 0; i < config.reps; ++i) {
            pbrsa::Ticket next = pbrsa::random_ticket(rng);
            auto [next_blinded, next_state] = pbrsa::blind(next, sub_info, pk, rng);
            double t0 = now_ms();
            auto r = http.infer(sub_info.canonical, ticket, sig, next_blinded, query, pk);
            double t1 = now_ms();
            if (!r.next_signature) throw Error(Errc::network, "missing chained signature");
            total += t1 - t0;
            req_bytes += r.request_bytes;
            resp_bytes += r.response_bytes;
            sig = pbrsa::unblind(*r.next_signature, next_state, pk);
            ticket = next;
        }
        report.sub.mode = "sub";
        report.sub.mean_ms = total / config.reps;
        report.sub.request_bytes = req_bytes / config.reps;
        report.sub.response_bytes = resp_bytes / config.reps;
    }

    report.overhead_api_ms = report.api.mean_ms - report.baseline.mean_ms;
    report.overhead_sub_ms = report.sub.mean_ms - report.baseline.mean_ms;

    // batch issuance: generate, blind, purchase, unblind, verify
    {
        report.batch_count = config.batch_count;
        double t0 = now_ms();
        auto tickets = plan::generate_tickets(config.batch_count, rng);
        auto [blinded, states] =
            pbrsa::blind_batch(tickets, api_info, pk, system_random_factory(), pbrsa::Exec::parallel);
        auto purchase = http.purchase_api(session, config.model, config.maxtok, blinded, pk);
        auto sigs = pbrsa::unblind_batch(purchase.blind_signatures, states, pk, pbrsa::Exec::parallel);
        auto oks = pbrsa::verify_batch(sigs, tickets, api_info, pk, pbrsa::Exec::parallel);
        double t1 = now_ms();
        report.batch_ms = t1 - t0;
        report.batch_all_verify = true;
        for (auto ok : oks) {
            if (!ok) report.batch_all_verify = false;
        }
    }

    report.audit = opcount_audit(pk.bits, rng);

    if (local) local->stop();
    if (!config.out_path.empty()) write_bench_json(report, config.out_path);
    return report;
}

std::string format_bench(const BenchReport& r) {
    std::ostringstream out;
    out << "request benchmark (" << r.bits << "-bit key, " << r.reps << " repetitions per mode)\n";
    out << "  mode       mean ms    request B   response B\n";
    auto row = [&](const BenchRow& b) {
        char line[96];
        std::snprintf(line, sizeof(line), "  %-9s %9.2f %11zu %12zu\n", b.mode.c_str(), b.mean_ms,
                      b.request_bytes, b.response_bytes);
        out << line;
    };
    row(r.baseline);
    row(r.api);
    row(r.sub);
    char line[96];
    std::snprintf(line, sizeof(line), "  gateway overhead: api %+.2f ms, sub %+.2f ms\n",
                  r.overhead_api_ms, r.overhead_sub_ms);
    out << line;
    std::snprintf(line, sizeof(line), "  batch of %zu issued end-to-end in %.2f ms (%s)\n",
                  r.batch_count, r.batch_ms, r.batch_all_verify ? "all verify" : "FAILURES");
    out << line;
    out << "  size deltas: api-baseline request " << '+'
        << (r.api.request_bytes - r.baseline.request_bytes) << " B, sub-api request " << '+'
        << (r.sub.request_bytes - r.api.request_bytes) << " B, api-baseline response " << '+'
        << (r.api.response_bytes - r.baseline.response_bytes) << " B, sub-api response " << '+'
        << (r.sub.response_bytes - r.api.response_bytes) << " B\n";
    out << format_audit(r.audit);
    return out.str();
}

void write_bench_json(const BenchReport& r, const std::string& path) {
    auto row = [](const BenchRow& b) {
        return json{{"mode", b.mode},
                    {"mean_ms", b.mean_ms},
                    {"request_bytes", b.request_bytes},
                    {"response_bytes", b.response_bytes}};
    };
    auto phase = [](const PhaseCounts& p) {
        return json{{"modmul_full", p.modmul_full},
                    {"modmul_reduced", p.modmul_reduced},
                    {"modexp_full", p.modexp_full},
                    {"modexp_reduced", p.modexp_reduced},
                    {"hash_to_group", p.hash_to_group}};
    };
    json j{{"bits", r.bits},
           {"reps", r.reps},
           {"modes", json::array({row(r.baseline), row(r.api), row(r.sub)})},
           {"overhead_ms", {{"api", r.overhead_api_ms}, {"sub", r.overhead_sub_ms}}},
           {"batch", {{"count", r.batch_count}, {"ms", r.batch_ms}, {"all_verify", r.batch_all_verify}}},
           {"opcounts",
            {{"blind", phase(r.audit.blind)},
             {"sign", phase(r.audit.sign)},
             {"unblind", phase(r.audit.unblind)},
             {"verify", phase(r.audit.verify)},
             {"total", phase(r.audit.total)},
             {"within_budget", r.audit.within_budget},
             {"deviations", r.audit.deviations}}}};
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw Error(Errc::storage_failure, "cannot write bench report to " + path);
}

} // namespace blindgate::harness
