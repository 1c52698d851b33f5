// visrisk: headless pipeline entry points.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure. Failures print
// one JSON line on stderr.

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "visrisk/error.hpp"
#include "visrisk/pipeline.hpp"
#include "visrisk/server.hpp"
#include "visrisk/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
namespace pl = visrisk::pipeline;

visrisk::ApiServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int fail(const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json j{{"error", message}, {"kind", kind}, {"exit", code}};
    std::cerr << j.dump() << std::endl;
    return code;
}

void report(const std::string& command, const fs::path& artifact) {
    nlohmann::ordered_json j{{"command", command}, {"artifact", artifact.string()}};
    std::cout << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"visrisk: macroprudential data cube, maps and networks"};
    app.require_subcommand(1);

    std::string config_path, data_dir = "data";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_path, "JSON config file")->required();
        sub->add_option("--data-dir,-d", data_dir, "artifact directory");
    };

    auto* ingest = app.add_subcommand("ingest", "build cube.json from the configured CSV files");
    auto* som = app.add_subcommand("train-som", "train the 2-D map on the pooled panel");
    auto* sotm = app.add_subcommand("train-sotm", "train the time map, one 1-D map per time slice");
    auto* net = app.add_subcommand("network", "co-occurrence network and force layout");
    auto* fit = app.add_subcommand("ewm-fit", "fit the early-warning logistic model");
    auto* score = app.add_subcommand("ewm-score", "score the early-warning model over the cube");
    for (auto* sub : {ingest, som, sotm, net, fit, score}) add_common(sub);

    auto* serve = app.add_subcommand("serve", "serve artifacts over HTTP");
    add_common(serve);
    int port = 8080;
    std::string host = "127.0.0.1";
    serve->add_option("--port,-p", port, "TCP port (0 = any free port)");
    serve->add_option("--host", host, "bind address");

    auto* exp = app.add_subcommand("export", "render a view to SVG");
    add_common(exp);
    std::string view, token, out_path;
    exp->add_option("view", view, "dashboard|ewm|fsm|fsmt|bim")->required();
    exp->add_option("--state", token, "permalink token");
    exp->add_option("--out,-o", out_path, "output SVG path")->required();

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset and config");
    visrisk::synthetic::Options syn;
    std::string synth_dir;
    synth->add_option("--out,-o", synth_dir, "output directory")->required();
    synth->add_option("--entities", syn.entities);
    synth->add_option("--quarters", syn.quarters);
    synth->add_option("--indicators", syn.indicators);
    synth->add_option("--seed", syn.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (synth->parsed()) {
            report("synth", visrisk::synthetic::write_dataset(syn, synth_dir));
            return 0;
        }
        const auto cfg = pl::load_config(config_path);
        const fs::path dir(data_dir);
        if (ingest->parsed()) report("ingest", pl::run_ingest(cfg, dir));
        else if (som->parsed()) report("train-som", pl::run_train_som(cfg, dir));
        else if (sotm->parsed()) report("train-sotm", pl::run_train_sotm(cfg, dir));
        else if (net->parsed()) report("network", pl::run_network(cfg, dir));
        else if (score->parsed()) report("ewm-score", pl::run_ewm_score(cfg, dir));
        else if (fit->parsed()) {
            std::optional<std::string> warning;
            const auto path = pl::run_ewm_fit(cfg, dir, &warning);
            if (warning) std::cerr << nlohmann::ordered_json{{"warning", *warning}}.dump() << std::endl;
            report("ewm-fit", path);
        } else if (exp->parsed()) {
            pl::run_export(cfg, dir, view, token, out_path);
            report("export", out_path);
        } else if (serve->parsed()) {
            visrisk::ApiServer server(pl::load_workspace(cfg, dir));
            const int bound = server.bind(host, port);
            if (bound < 0) return fail("usage", "cannot bind " + host + ":" + std::to_string(port), 2);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << nlohmann::ordered_json{{"listening", host}, {"port", bound}}.dump() << std::endl;

            // Republish when a pipeline stage rewrites an artifact. A failed load
            // keeps the previous workspace.
            std::mutex mu;
            std::condition_variable cv;
            bool done = false;
            std::thread watcher([&] {
                auto sig = pl::artifact_signature(dir);
                std::unique_lock lock(mu);
                while (!cv.wait_for(lock, std::chrono::milliseconds(500), [&] { return done; })) {
                    const auto now = pl::artifact_signature(dir);
                    if (now == sig) continue;
                    try {
                        server.publish(pl::load_workspace(cfg, dir));
                        sig = now;
                        std::cout << nlohmann::ordered_json{{"reloaded", dir.string()}}.dump() << std::endl;
                    } catch (const std::exception& e) {
                        std::cerr << nlohmann::ordered_json{{"warning", std::string("reload failed: ") + e.what()}}.dump()
                                  << std::endl;
                    }
                }
            });
            server.listen_after_bind();
            {
                std::lock_guard lock(mu);
                done = true;
            }
            cv.notify_one();
            watcher.join();
            g_server = nullptr;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        return fail("usage", e.what(), 2);
    } catch (const visrisk::NumericError& e) {
        return fail("numeric", e.what(), 4);
    } catch (const visrisk::DataError& e) {
        return fail("data", e.what(), 3);
    } catch (const visrisk::NotFoundError& e) {
        return fail("data", e.what(), 3);
    } catch (const visrisk::InvalidRequestError& e) {
        return fail("usage", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("data", e.what(), 3);
    }
}
