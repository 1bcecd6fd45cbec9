// Races the serial reference batch kernels against the OpenMP path and
// verifies they produce identical outputs. Run with a deterministic seed so
// both paths consume exactly the same randomness.

#include "blindgate/pbrsa.hpp"
#include "blindgate/pbrsa_batch.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <vector>

using namespace blindgate;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct PhaseTimes {
    double blind = 0, sign = 0, unblind = 0, verify = 0;
    double total() const { return blind + sign + unblind + verify; }
};

struct RunResult {
    PhaseTimes times;
    std::vector<pbrsa::BlindedMessage> blinded;
    std::vector<pbrsa::BlindSignature> blind_sigs;
    std::vector<pbrsa::Signature> sigs;
    std::vector<std::uint8_t> valid;
};

RunResult run_once(const std::vector<pbrsa::Ticket>& tickets, const pbrsa::InfoBytes& info,
                   const pbrsa::KeyPair& kp, std::uint64_t seed, pbrsa::Exec exec) {
    pbrsa::PublicKey pk = kp.public_key();
    RunResult r;
    auto t0 = Clock::now();
    auto [blinded, states] = pbrsa::blind_batch(tickets, info, pk,
                                                deterministic_random_factory(seed), exec);
    r.times.blind = ms_since(t0);

    t0 = Clock::now();
    r.blind_sigs = pbrsa::sign_blinded_batch(blinded, info, kp, exec);
    r.times.sign = ms_since(t0);

    t0 = Clock::now();
    r.sigs = pbrsa::unblind_batch(r.blind_sigs, states, pk, exec);
    r.times.unblind = ms_since(t0);

    t0 = Clock::now();
    r.valid = pbrsa::verify_batch(r.sigs, tickets, info, pk, exec);
    r.times.verify = ms_since(t0);

    r.blinded = std::move(blinded);
    return r;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch kernel benchmark: serial reference vs OpenMP"};
    std::size_t bits = 2048, count = 64, reps = 3;
    std::uint64_t seed = 7;
    app.add_option("--bits", bits)->capture_default_str();
    app.add_option("--count", count, "batch size")->capture_default_str();
    app.add_option("--reps", reps, "repetitions (best time kept)")->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        DeterministicRandom rng(seed);
        pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
        plan::InfoFields fields;
        fields.mode = plan::Mode::api;
        fields.model_id = "gpt2";
        fields.max_tokens_per_request = 256;
        pbrsa::InfoBytes info = plan::encode_info(fields);
        std::vector<pbrsa::Ticket> tickets = plan::generate_tickets(count, rng);

        PhaseTimes best_serial, best_parallel;
        best_serial.blind = best_parallel.blind = 1e18;
        RunResult serial, parallel;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            RunResult s = run_once(tickets, info, kp, seed, pbrsa::Exec::serial);
            RunResult p = run_once(tickets, info, kp, seed, pbrsa::Exec::parallel);
            if (s.times.total() < best_serial.total() || rep == 0) {
                best_serial = s.times;
                serial = std::move(s);
            }
            if (p.times.total() < best_parallel.total() || rep == 0) {
                best_parallel = p.times;
                parallel = std::move(p);
            }
        }

        // Same seed, same factory: the two paths must agree element for element.
        bool identical = serial.valid == parallel.valid && serial.sigs.size() == parallel.sigs.size();
        for (std::size_t i = 0; identical && i < serial.sigs.size(); ++i) {
            identical = serial.blinded[i].value == parallel.blinded[i].value &&
                        serial.blind_sigs[i].value == parallel.blind_sigs[i].value &&
                        serial.sigs[i].value == parallel.sigs[i].value;
        }
        bool all_valid = true;
        for (std::uint8_t v : serial.valid) all_valid = all_valid && v == 1;

        std::printf("batch of %zu, %zu-bit key, best of %zu reps\n", count, bits, reps);
        std::printf("%-8s %12s %12s %9s\n", "phase", "serial ms", "openmp ms", "speedup");
        auto row = [](const char* name, double s, double p) {
            std::printf("%-8s %12.2f %12.2f %8.2fx\n", name, s, p, p > 0 ? s / p : 0.0);
        };
        row("blind", best_serial.blind, best_parallel.blind);
        row("sign", best_serial.sign, best_parallel.sign);
        row("unblind", best_serial.unblind, best_parallel.unblind);
        row("verify", best_serial.verify, best_parallel.verify);
        row("total", best_serial.total(), best_parallel.total());
        std::printf("outputs identical: %s, all signatures valid: %s\n",
                    identical ? "yes" : "NO", all_valid ? "yes" : "NO");
        return identical && all_valid ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    }
}
