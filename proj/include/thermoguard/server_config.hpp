#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "thermoguard/crypto.hpp"
#include "thermoguard/presence_detector.hpp"

namespace thermoguard {

inline constexpr std::uint64_t kDefaultValidityMs = 120'000;
inline constexpr std::uint64_t kDefaultSkewMs = 30'000;
inline constexpr std::string_view kConfigEnvVar = "THERMOGUARD_CONFIG";

struct ServerConfig {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 8470;
    std::uint64_t validity_ms = kDefaultValidityMs;
    std::uint64_t skew_ms = kDefaultSkewMs;
    DetectorConfig detector{};
    std::string storage_path; // empty: in-memory
    Key256 server_secret_key = random_key();
    std::size_t worker_threads = 16;

    /// Line-oriented `key = value`; '#' starts a comment. Unknown keys and
    /// malformed values throw Error(ConfigError).
    static ServerConfig parse(std::string_view text);
    static ServerConfig load_file(const std::string& path);

    /// THERMOGUARD_CONFIG, when set, wins over `path`; with neither the
    /// defaults are returned.
    static ServerConfig load(const std::optional<std::string>& path);
};

} // namespace thermoguard
