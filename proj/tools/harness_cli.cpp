// Security-property harness CLI: blindness game, witness check, forgery
// suite, operation-count audit, and the three-mode benchmark.

#include "blindgate/errors.hpp"
#include "blindgate/harness.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

using namespace blindgate;
using namespace blindgate::harness;

int main(int argc, char** argv) {
    CLI::App app{"blindgate harness"};
    app.require_subcommand(1);

    std::size_t trials = 0;
    std::size_t bits = 2048;
    std::string distinguisher_name = "random";

    auto* game = app.add_subcommand("game-a", "empirical blindness distinguisher game");
    game->add_option("--trials", trials, "number of trials (>= 100)")->required();
    game->add_option("--distinguisher", distinguisher_name, "random, nearest or cheat")
        ->check(CLI::IsMember({"random", "nearest", "cheat"}))
        ->capture_default_str();
    game->add_option("--bits", bits)->capture_default_str();

    auto* witness = app.add_subcommand("witness", "algebraic blindness witness over honest pairs");
    witness->add_option("--trials", trials, "number of transcript pairs")->required();
    witness->add_option("--bits", bits)->capture_default_str();

    auto* forgery = app.add_subcommand("forgery", "negative forgery suite incl. one-more game");
    forgery->add_option("--bits", bits)->capture_default_str();

    auto* audit = app.add_subcommand("audit", "per-phase modular operation counts");
    audit->add_option("--bits", bits)->capture_default_str();

    auto* bench = app.add_subcommand("bench", "three-mode latency/size benchmark");
    BenchConfig bench_cfg;
    bench->add_option("--server", bench_cfg.server_url, "gateway URL (default: in-process)");
    bench->add_option("--out", bench_cfg.out_path, "write the report as JSON here");
    bench->add_option("--bits", bench_cfg.bits)->capture_default_str();
    bench->add_option("--reps", bench_cfg.reps)->capture_default_str();
    bench->add_option("--batch", bench_cfg.batch_count)->capture_default_str();
    bench->add_option("--model", bench_cfg.model)->capture_default_str();
    bench->add_option("--maxtok", bench_cfg.maxtok)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        SystemRandom rng;
        if (game->parsed()) {
            Distinguisher d;
            if (distinguisher_name == "random") {
                d = make_random_guess(rng);
            } else if (distinguisher_name == "nearest") {
                d = make_nearest_value();
            } else {
                d = make_cheating();
            }
            double rate = run_game_a(trials, d, bits, rng);
            std::printf("game-a  %s distinguisher, %zu trials, %zu-bit key: success rate %.4f\n",
                        distinguisher_name.c_str(), trials, bits, rate);
            // The cheating distinguisher is plumbing self-test: it must win always.
            if (distinguisher_name == "cheat" && rate != 1.0) return 1;
            return 0;
        }
        if (witness->parsed()) {
            pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
            std::size_t ok = 0;
            for (std::size_t i = 0; i < trials; ++i) {
                plan::InfoFields fields;
                fields.mode = i % 2 == 0 ? plan::Mode::api : plan::Mode::subscription;
                fields.model_id = "gpt2";
                fields.max_tokens_per_request = 1 + static_cast<std::uint32_t>(i % 4096);
                if (fields.mode == plan::Mode::subscription) {
                    fields.deadline = plan::standardize_deadline(
                        1735689600 + static_cast<plan::UtcSeconds>(i) * 86400,
                        plan::Period::monthly);
                }
                TranscriptPair pair = make_honest_pair(kp, plan::encode_info(fields), rng);
                if (blindness_witness(pair, kp)) ++ok;
            }
            std::printf("witness  %zu/%zu honest pairs admit blinding factors for both pairings\n",
                        ok, trials);
            return ok == trials ? 0 : 1;
        }
        if (forgery->parsed()) {
            ForgeryReport report = run_forgery_suite(bits, rng);
            std::cout << format_forgery(report);
            return report.pass() ? 0 : 1;
        }
        if (audit->parsed()) {
            AuditReport report = opcount_audit(bits, rng);
            std::cout << format_audit(report);
            return report.within_budget ? 0 : 1;
        }
        if (bench->parsed()) {
            BenchReport report = run_bench(bench_cfg);
            std::cout << format_bench(report);
            if (!bench_cfg.out_path.empty()) {
                std::cout << "report written to " << bench_cfg.out_path << std::endl;
            }
            return 0;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL: " << e.what() << std::endl;
        return 1;
    }
}
