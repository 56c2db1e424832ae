#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermoguard/attack_harness.hpp"
#include "thermoguard/client_sim.hpp"
#include "thermoguard/error.hpp"
#include "thermoguard/http_frontend.hpp"
#include "thermoguard/server_config.hpp"
#include "thermoguard/state_store.hpp"

namespace tg = thermoguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAttackAccepted = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct ServeArgs {
    std::optional<std::string> config;
    std::optional<int> port;
};

int serve(const ServeArgs& args) {
    tg::ServerConfig cfg = tg::ServerConfig::load(args.config);
    tg::CaptchaService service(cfg, tg::open_store(cfg.storage_path));
    tg::HttpFrontend frontend(service, tg::now_utc, cfg.worker_threads);

    // Block the stop signals before any server thread exists so that only
    // the sigtimedwait loop below sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    frontend.bind(cfg.listen_host, args.port.value_or(cfg.listen_port));
    frontend.start();
    std::cout << "listening on " << frontend.base_url() << std::endl;

    const timespec purge_interval{30, 0};
    for (;;) {
        const int sig = sigtimedwait(&stop_signals, nullptr, &purge_interval);
        if (sig == SIGINT || sig == SIGTERM) break;
        service.purge_expired(tg::now_utc());
    }
    frontend.stop();
    std::cerr << "stopped after issuing " << service.tokens_issued() << " tokens\n";
    return kExitOk;
}

struct GenFrameArgs {
    std::string kind = "human";
    std::uint64_t seed = 0;
    std::string out;
    double angle = 90.0;
    double distance = 3.0;
    double tilt = 90.0;
    std::uint16_t width = tg::kDefaultFrameWidth;
    std::uint16_t height = tg::kDefaultFrameHeight;
};

int gen_frame(const GenFrameArgs& args) {
    const auto type = tg::parse_scene_type(args.kind);
    if (!type) throw CLI::ValidationError("--kind", "unknown scene kind " + args.kind);
    const tg::SceneKind kind = *type == tg::SceneType::human ? tg::SceneKind::human(args.angle, args.distance, args.tilt)
                                                              : tg::SceneKind::of(*type);
    const tg::Bytes bytes = tg::encode_frame(tg::generate_scene(kind, args.seed, args.width, args.height));
    write_file(args.out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    return kExitOk;
}

struct SolveArgs {
    std::string server;
    std::string kind = "human";
    std::uint64_t seed = 0;
    std::int64_t offset_ms = 0;
    std::string ip = "198.51.100.7";
};

int solve(const SolveArgs& args) {
    const auto type = tg::parse_scene_type(args.kind);
    if (!type) throw CLI::ValidationError("--kind", "unknown scene kind " + args.kind);

    tg::ApiClient api(args.server);
    const tg::WebsiteContext site = tg::WebsiteContext::random("solve.example");
    api.register_site(site.registration());
    const tg::ClientContext client(args.ip, tg::gen_keypair(), args.offset_ms);

    const tg::SolveResult solved = tg::solve_captcha(client, site, tg::SceneKind::of(*type), args.seed, api);
    const tg::VerifyDecision decision = tg::forward_and_verify(site, solved.token, client, api);

    nlohmann::ordered_json out{{"uid", client.uid()},
                               {"token_bytes", solved.token.ciphertext.size()},
                               {"latency_ms", static_cast<double>(solved.latency.count()) / 1000.0},
                               {"score", decision.score},
                               {"accepted", decision.accepted}};
    std::cout << out.dump(2) << "\n";
    return decision.accepted ? kExitOk : kExitFailure;
}

struct AttackArgs {
    std::string cls;
    std::size_t n = 500;
    std::uint64_t seed = 0;
    std::string server;
    std::optional<std::string> out;
    std::size_t parallel = 4;
    std::string format = "table";
};

int attack(const AttackArgs& args) {
    std::vector<tg::AttackClass> classes;
    if (args.cls == "mitm") {
        classes.assign(std::begin(tg::kMitmClasses), std::end(tg::kMitmClasses));
    } else if (args.cls == "misuse") {
        classes.assign(std::begin(tg::kMisuseClasses), std::end(tg::kMisuseClasses));
    } else if (args.cls == "all") {
        classes.assign(std::begin(tg::kMitmClasses), std::end(tg::kMitmClasses));
        classes.push_back(tg::AttackClass::token_forward);
        classes.insert(classes.end(), std::begin(tg::kMisuseClasses), std::end(tg::kMisuseClasses));
    } else if (auto c = tg::parse_attack_class(args.cls)) {
        classes.push_back(*c);
    } else {
        throw CLI::ValidationError("--class", "unknown attack class " + args.cls);
    }

    tg::AttackHarness harness(args.server, tg::HarnessOptions{args.parallel, "harness.example"});
    std::vector<tg::AttackReport> reports;
    for (auto c : classes) reports.push_back(harness.run(c, args.n, args.seed));

    const auto format = args.format == "json" ? tg::ReportFormat::json : tg::ReportFormat::table;
    std::cout << tg::render_report(reports, format);
    if (args.out) write_file(*args.out, tg::render_report(reports, tg::ReportFormat::json));

    bool accepted = false;
    bool inconclusive = false;
    for (const auto& r : reports) {
        accepted = accepted || r.accepted > 0;
        inconclusive = inconclusive || r.inconclusive;
    }
    if (accepted) return kExitAttackAccepted;
    if (inconclusive) {
        std::cerr << "honest control failed; results inconclusive\n";
        return kExitFailure;
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> files;
    std::string format = "table";
};

int report(const ReportArgs& args) {
    std::vector<tg::AttackReport> all;
    for (const auto& path : args.files) {
        auto parsed = tg::parse_reports(read_file(path));
        all.insert(all.end(), parsed.begin(), parsed.end());
    }
    std::cout << tg::render_report(all, args.format == "json" ? tg::ReportFormat::json : tg::ReportFormat::table);
    return kExitOk;
}

struct KeygenArgs {
    std::string type = "keypair";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> private_out;
    std::optional<std::string> public_out;
};

int keygen(const KeygenArgs& args) {
    if (args.type == "secret") {
        std::cout << tg::to_hex(tg::random_key()) << "\n";
        return kExitOk;
    }
    const tg::KeyPair keys = tg::gen_keypair(args.seed);
    const std::string priv = keys.signing.to_pem();
    const std::string pub = keys.verification.to_pem();
    if (args.private_out) write_file(*args.private_out, priv);
    if (args.public_out) write_file(*args.public_out, pub);
    if (!args.private_out) std::cout << priv;
    if (!args.public_out) std::cout << pub;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal-presence CAPTCHA service, client simulator and attack harness", "thermoguard"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Run the verification server");
    serve_cmd->add_option("--config", serve_args.config, "Config file (THERMOGUARD_CONFIG takes precedence)");
    serve_cmd->add_option("--port", serve_args.port, "Override the configured port (0 picks a free one)")
        ->check(CLI::Range(0, 65535));

    GenFrameArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen-frame", "Write a synthetic .thermo frame");
    gen_cmd->add_option("--kind", gen_args.kind, "human|hot_object|cold_object|vacuum_robot|pet|ambient_empty")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen_args.seed)->capture_default_str();
    gen_cmd->add_option("--out", gen_args.out)->required();
    gen_cmd->add_option("--angle", gen_args.angle, "Degrees, human only")->capture_default_str();
    gen_cmd->add_option("--distance", gen_args.distance, "Feet, human only")->capture_default_str();
    gen_cmd->add_option("--tilt", gen_args.tilt, "Degrees, human only")->capture_default_str();
    gen_cmd->add_option("--width", gen_args.width)->capture_default_str();
    gen_cmd->add_option("--height", gen_args.height)->capture_default_str();

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Run one honest capture and verification");
    solve_cmd->add_option("--server", solve_args.server, "Base URL, e.g. http://127.0.0.1:8470")->required();
    solve_cmd->add_option("--kind", solve_args.kind)->capture_default_str();
    solve_cmd->add_option("--seed", solve_args.seed)->capture_default_str();
    solve_cmd->add_option("--offset-ms", solve_args.offset_ms, "Client clock offset")->capture_default_str();
    solve_cmd->add_option("--ip", solve_args.ip)->capture_default_str();

    AttackArgs attack_args;
    auto* attack_cmd = app.add_subcommand("attack", "Run an attack campaign");
    attack_cmd->add_option("--class", attack_args.cls, "Attack class, or mitm|misuse|all")->required();
    attack_cmd->add_option("--n", attack_args.n, "Attempts (per sub-kind for misuse classes)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    attack_cmd->add_option("--seed", attack_args.seed)->capture_default_str();
    attack_cmd->add_option("--server", attack_args.server)->required();
    attack_cmd->add_option("--out", attack_args.out, "Write the JSON report here");
    attack_cmd->add_option("--parallel", attack_args.parallel)->capture_default_str()->check(CLI::Range(1, 256));
    attack_cmd->add_option("--format", attack_args.format)
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "json"}));

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Render saved JSON reports");
    report_cmd->add_option("files", report_args.files)->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--format", report_args.format)
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "json"}));

    KeygenArgs keygen_args;
    auto* keygen_cmd = app.add_subcommand("keygen", "Emit a client keypair or a server secret");
    keygen_cmd->add_option("--type", keygen_args.type)
        ->capture_default_str()
        ->check(CLI::IsMember({"keypair", "secret"}));
    keygen_cmd->add_option("--seed", keygen_args.seed, "Deterministic keypair (testing only)");
    keygen_cmd->add_option("--private-out", keygen_args.private_out);
    keygen_cmd->add_option("--public-out", keygen_args.public_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return kExitUsage;
    }

    try {
        if (*serve_cmd) return serve(serve_args);
        if (*gen_cmd) return gen_frame(gen_args);
        if (*solve_cmd) return solve(solve_args);
        if (*attack_cmd) return attack(attack_args);
        if (*report_cmd) return report(report_args);
        if (*keygen_cmd) return keygen(keygen_args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const tg::Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
