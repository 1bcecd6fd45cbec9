// Gateway daemon: loads a flat key=value config, serves until SIGINT/SIGTERM.

#include "blindgate/errors.hpp"
#include "blindgate/gateway.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

namespace {
std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"blindgate gateway"};
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    CLI11_PARSE(app, argc, argv);

    try {
        blindgate::gateway::GatewayConfig cfg = blindgate::gateway::load_config(config_path);
        blindgate::gateway::GatewayServer server(cfg);
        server.start();
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::cout << "serving on " << server.base_url() << " (" << cfg.bits << "-bit key, "
                  << (cfg.journal_path.empty() ? "in-memory journal" : cfg.journal_path.c_str())
                  << ")" << std::endl;
        while (!g_stop && server.running()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
        }
        server.stop();
        std::cout << "stopped" << std::endl;
        return 0;
    } catch (const blindgate::Error& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL: " << e.what() << std::endl;
        return 1;
    }
}
