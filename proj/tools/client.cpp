// Wallet-driven command line client. Every command is one wallet operation;
// errors come out as a single "CODE: message" line and a nonzero exit.

#include "blindgate/errors.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"
#include "blindgate/wallet.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

using namespace blindgate;
using namespace blindgate::client;

int main(int argc, char** argv) {
    CLI::App app{"blindgate client"};
    app.require_subcommand(1);

    std::string wallet_path = "wallet.json";
    app.add_option("--wallet", wallet_path, "wallet file")->capture_default_str();

    auto* fetch = app.add_subcommand("fetch-pk", "pin the server's verification key");
    std::string server_url;
    fetch->add_option("--server", server_url, "gateway base URL")->required();

    auto* reg = app.add_subcommand("register", "create an account on the pinned server");
    std::string user, secret;
    reg->add_option("--user", user)->required();
    reg->add_option("--secret", secret)->required();

    auto* purchase = app.add_subcommand("purchase", "buy credentials");
    std::string mode, model, period_name = "monthly";
    std::uint32_t maxtok = 0;
    std::size_t count = 0;
    purchase->add_option("--mode", mode, "api or sub")
        ->required()
        ->check(CLI::IsMember({"api", "sub"}));
    purchase->add_option("--model", model, "model identifier")->required();
    purchase->add_option("--maxtok", maxtok, "token cap per request")->required();
    auto* count_opt = purchase->add_option("--count", count, "api credits to buy");
    auto* period_opt = purchase->add_option("--period", period_name, "monthly or yearly")
                           ->check(CLI::IsMember({"monthly", "yearly"}));
    purchase->add_option("--user", user)->required();
    purchase->add_option("--secret", secret)->required();

    auto* ask = app.add_subcommand("ask", "send one anonymous query");
    std::string query;
    ask->add_option("query", query, "query text")->required();

    auto* status = app.add_subcommand("status", "show wallet contents");

    CLI11_PARSE(app, argc, argv);

    try {
        SystemRandom rng;
        if (fetch->parsed()) {
            op_fetch_pk(wallet_path, server_url);
            WalletStatus st = op_status(wallet_path);
            std::cout << "pinned " << st.pinned_bits << "-bit key from " << st.server_url
                      << std::endl;
        } else if (reg->parsed()) {
            op_register(wallet_path, user, secret);
            std::cout << "registered " << user << std::endl;
        } else if (purchase->parsed()) {
            if (mode == "api") {
                if (!count_opt->count() || period_opt->count()) {
                    throw Error(Errc::malformed_plan, "api purchases take --count, not --period");
                }
                op_purchase_api(wallet_path, user, secret, model, maxtok, count, rng);
                std::cout << "banked " << count << " api credential" << (count == 1 ? "" : "s")
                          << " (model " << model << ", maxtok " << maxtok << ")" << std::endl;
            } else {
                if (!period_opt->count() || count_opt->count()) {
                    throw Error(Errc::malformed_plan, "sub purchases take --period, not --count");
                }
                plan::Period period =
                    period_name == "yearly" ? plan::Period::yearly : plan::Period::monthly;
                op_purchase_sub(wallet_path, user, secret, model, maxtok, period, rng);
                WalletStatus st = op_status(wallet_path);
                std::cout << "banked subscription credential";
                if (st.sub_deadline) {
                    std::cout << " valid until " << plan::format_rfc3339(*st.sub_deadline);
                }
                std::cout << std::endl;
            }
        } else if (ask->parsed()) {
            AskResult result = op_ask(wallet_path, query, rng);
            std::cout << result.answer << std::endl;
            if (result.mode_used == plan::Mode::api) {
                std::cerr << result.unused_api_remaining << " api credential"
                          << (result.unused_api_remaining == 1 ? "" : "s") << " left"
                          << std::endl;
            }
        } else if (status->parsed()) {
            WalletStatus st = op_status(wallet_path);
            std::cout << "server:       " << st.server_url << "\n"
                      << "pinned key:   " << st.pinned_bits << "-bit\n"
                      << "api unused:   " << st.api_unused << "\n"
                      << "api used:     " << st.api_used << "\n";
            if (st.sub_info) {
                std::cout << "subscription: " << *st.sub_info << "\n";
                if (st.sub_deadline) {
                    std::cout << "deadline:     " << plan::format_rfc3339(*st.sub_deadline)
                              << "\n";
                }
            } else {
                std::cout << "subscription: none\n";
            }
            std::cout << "pending:      " << (st.pending_blind ? "1 blinded ticket in flight" : "none")
                      << std::endl;
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
