#pragma once

#include "blindgate/bigint.hpp"
#include "blindgate/pbrsa.hpp"
#include "blindgate/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace blindgate::harness {

/// Everything the signer legitimately sees in one unlinkability game round:
/// the two blinding sessions in interaction order, then both finished
/// message/signature pairs in message order. `cheat_r_first` is the first
/// session's blinding factor, passed out of band purely so the cheating
/// self-test can prove the game plumbing is sound; honest distinguishers
/// must not read it.
struct SignerView {
    Bigint blinded_first;
    Bigint blinded_second;
    Bigint bsig_first;
    Bigint bsig_second;
    pbrsa::Ticket message0;
    pbrsa::Ticket message1;
    Bigint sig0;
    Bigint sig1;
    pbrsa::InfoBytes info;
    pbrsa::PublicKey pk;
    Bigint cheat_r_first;
};

/// Guesses which message the first session blinded: 0 or 1.
using Distinguisher = std::function<int(const SignerView&)>;

Distinguisher make_random_guess(RandomSource& rng);
Distinguisher make_nearest_value();
Distinguisher make_cheating();

/// Plays `trials` rounds of the unlinkability game against one fresh signer
/// key of `bits` and returns the fraction of correct guesses.
double run_game_a(std::size_t trials, const Distinguisher& distinguisher, std::size_t bits,
                  RandomSource& rng);

/// One complete pair of honest issuance transcripts under a shared info.
struct TranscriptPair {
    pbrsa::Ticket ticket0;
    pbrsa::Ticket ticket1;
    pbrsa::InfoBytes info0;
    pbrsa::InfoBytes info1;
    Bigint blinded0;
    Bigint blinded1;
    Bigint bsig0;
    Bigint bsig1;
    Bigint sig0;
    Bigint sig1;
};

TranscriptPair make_honest_pair(const pbrsa::KeyPair& kp, const pbrsa::InfoBytes& info,
                                RandomSource& rng);

/// The algebraic heart of the blindness argument: recovers a blinding factor
/// r' for BOTH pairings of (blinded message, finished message) and checks it
/// explains the transcript. True iff both pairings admit a witness.
/// Mismatched infos violate the game's precondition: std::invalid_argument.
bool blindness_witness(const TranscriptPair& pair, const pbrsa::KeyPair& kp);

struct ForgeryReport {
    std::size_t random_trials = 0;
    std::size_t random_accepts = 0;
    std::size_t tamper_trials = 0;
    std::size_t tamper_accepts = 0;
    std::size_t wrong_key_trials = 0;
    std::size_t wrong_key_accepts = 0;
    std::size_t issued = 0;            // one-more test, against a live gateway
    std::size_t redeemed = 0;
    bool extra_attempt_rejected = false;

    bool pass() const {
        return random_accepts == 0 && tamper_accepts == 0 && wrong_key_accepts == 0 &&
               redeemed <= issued && extra_attempt_rejected;
    }
};

/// Negative suite: random signatures, metadata tampering (including the
/// moved-deadline attack), wrong-key signatures, and a one-more redemption
/// count against an in-process gateway.
ForgeryReport run_forgery_suite(std::size_t bits, RandomSource& rng,
                                std::size_t random_trials = 1000,
                                std::size_t tamper_trials = 1000,
                                std::size_t wrong_key_trials = 100, std::size_t issued = 10);

std::string format_forgery(const ForgeryReport& report);

struct PhaseCounts {
    std::uint64_t modmul_full = 0;
    std::uint64_t modmul_reduced = 0;
    std::uint64_t modexp_full = 0;
    std::uint64_t modexp_reduced = 0;
    std::uint64_t hash_to_group = 0;

    std::uint64_t modmul_total() const { return modmul_full + modmul_reduced; }
    std::uint64_t modexp_total() const { return modexp_full + modexp_reduced; }
};

struct AuditReport {
    std::size_t bits = 0;
    PhaseCounts blind;
    PhaseCounts sign;
    PhaseCounts unblind;
    PhaseCounts verify;
    PhaseCounts total;
    /// Per-phase reality vs. the stated cost model; informational only.
    std::vector<std::string> deviations;
    bool within_budget = false; // <= 2 full-width muls, <= 5 exps, exactly 2 H_M
};

/// Instruments one full blind/sign/unblind/verify cycle. Half-width CRT
/// exponentiations count toward the exponentiation total (the cost model
/// states signing as two exponentiations); the budget's multiplication
/// bound is on full-width multiplications.
AuditReport opcount_audit(std::size_t bits, RandomSource& rng);

std::string format_audit(const AuditReport& report);

struct BenchRow {
    std::string mode;
    double mean_ms = 0.0;
    std::size_t request_bytes = 0;  // mean body size over the repetitions
    std::size_t response_bytes = 0;
};

struct BenchReport {
    std::size_t bits = 0;
    int reps = 0;
    BenchRow baseline;
    BenchRow api;
    BenchRow sub;
    double overhead_api_ms = 0.0; // mode mean minus baseline mean
    double overhead_sub_ms = 0.0;
    double batch_ms = 0.0;        // end-to-end issuance of `batch_count` credentials
    std::size_t batch_count = 0;
    bool batch_all_verify = false;
    AuditReport audit;
};

struct BenchConfig {
    std::string server_url; // empty: run an in-process gateway
    std::size_t bits = 2048;
    int reps = 10;
    std::size_t batch_count = 10;
    std::string model = "gpt2";
    std::uint32_t maxtok = 256;
    std::string out_path; // empty: no file written
};

/// Times the three request modes against a real HTTP round trip each, plus
/// one batch issuance; sizes are the exact encoded bodies. The baseline row
/// talks to a bare echo completion service with no credential layer.
BenchReport run_bench(const BenchConfig& config);

std::string format_bench(const BenchReport& report);
void write_bench_json(const BenchReport& report, const std::string& path);

} // namespace blindgate::harness
