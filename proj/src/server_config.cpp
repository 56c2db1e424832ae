#include "thermoguard/server_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "thermoguard/error.hpp"

namespace thermoguard {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw Error(Errc::ConfigError, std::string(key) + ": bad number");
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    // from_chars for double is unavailable on older libstdc++
    std::string buf(value);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) throw Error(Errc::ConfigError, std::string(key) + ": bad number");
    return v;
}

void parse_listen_addr(ServerConfig& cfg, std::string_view value) {
    const auto colon = value.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw Error(Errc::ConfigError, "listen_addr must be host:port");
    cfg.listen_host = std::string(value.substr(0, colon));
    cfg.listen_port = parse_number<std::uint16_t>("listen_addr", value.substr(colon + 1));
}

} // namespace

ServerConfig ServerConfig::parse(std::string_view text) {
    ServerConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));

        if (key == "listen_addr") {
            parse_listen_addr(cfg, value);
        } else if (key == "validity_ms") {
            cfg.validity_ms = parse_number<std::uint64_t>(key, value);
        } else if (key == "skew_ms") {
            cfg.skew_ms = parse_number<std::uint64_t>(key, value);
        } else if (key == "storage_path") {
            cfg.storage_path = std::string(value);
        } else if (key == "worker_threads") {
            cfg.worker_threads = parse_number<std::size_t>(key, value);
        } else if (key == "server_secret_key") {
            auto raw = from_hex(value);
            if (!raw || raw->size() != kKeySize) throw Error(Errc::ConfigError, "server_secret_key must be 64 hex chars");
            std::copy(raw->begin(), raw->end(), cfg.server_secret_key.begin());
        } else if (key == "core_temp_low") {
            cfg.detector.core_temp_low_c = parse_real(key, value);
        } else if (key == "core_temp_high") {
            cfg.detector.core_temp_high_c = parse_real(key, value);
        } else if (key == "min_area_frac") {
            cfg.detector.min_area_frac = parse_real(key, value);
        } else if (key == "aspect_low") {
            cfg.detector.aspect_low = parse_real(key, value);
        } else if (key == "aspect_high") {
            cfg.detector.aspect_high = parse_real(key, value);
        } else if (key == "gradient_min") {
            cfg.detector.gradient_min = parse_real(key, value);
        } else {
            throw Error(Errc::ConfigError, "unknown key '" + std::string(key) + "'");
        }
    }
    try {
        cfg.detector.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    if (cfg.validity_ms == 0) throw Error(Errc::ConfigError, "validity_ms must be positive");
    if (cfg.worker_threads == 0) throw Error(Errc::ConfigError, "worker_threads must be positive");
    return cfg;
}

ServerConfig ServerConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

ServerConfig ServerConfig::load(const std::optional<std::string>& path) {
    if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) return load_file(env);
    if (path) return load_file(*path);
    return ServerConfig{};
}

} // namespace thermoguard
