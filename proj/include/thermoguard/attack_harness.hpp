#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermoguard/client_sim.hpp"

namespace thermoguard {

enum class AttackClass {
    replay,
    stale_timestamp,
    nonce_reuse,
    modified_binary,
    modified_metadata,
    token_forward,
    non_thermal_upload,
    tampered_client,
    non_human_scene,
};

inline constexpr AttackClass kMitmClasses[] = {AttackClass::replay, AttackClass::stale_timestamp,
                                               AttackClass::nonce_reuse, AttackClass::modified_binary,
                                               AttackClass::modified_metadata};
inline constexpr AttackClass kMisuseClasses[] = {AttackClass::non_thermal_upload, AttackClass::tampered_client,
                                                 AttackClass::non_human_scene};

std::string_view attack_class_name(AttackClass c) noexcept;
std::optional<AttackClass> parse_attack_class(std::string_view name) noexcept;
bool is_mitm(AttackClass c) noexcept;
bool is_misuse(AttackClass c) noexcept;

struct AttackReport {
    std::string attack; // class name, optionally qualified, e.g. "non_human_scene:pet"
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    double success_pct = 0.0;
    std::map<std::string, std::uint64_t> errors;
    std::uint64_t seed = 0;
    bool inconclusive = false; // an honest control failed

    bool operator==(const AttackReport&) const = default;
};

struct HarnessOptions {
    std::size_t parallelism = 4;
    std::string domain = "harness.example";
};

struct MitmOptions {
    bool preconsume_nonce = true; // nonce_reuse only; false gives the acceptance control
};

struct ForwardOptions {
    bool verify_from_worker = false; // control: redeem from the issuing context
};

/// Drives attack campaigns against a live server over its HTTP API. Registers
/// its own relying site on construction. Report counts depend only on the
/// campaign, n and seed.
class AttackHarness {
public:
    explicit AttackHarness(std::string server_url, HarnessOptions options = {});

    AttackReport run_mitm_campaign(AttackClass cls, std::size_t n, std::uint64_t seed, MitmOptions opts = {});
    AttackReport run_token_forward_campaign(std::size_t n, std::uint64_t seed, ForwardOptions opts = {});
    AttackReport run_misuse_campaign(AttackClass cls, std::size_t n_per_kind, std::uint64_t seed);

    /// `width` simultaneous submissions that share one never-used nonce.
    /// Exactly one should be accepted.
    AttackReport run_nonce_burst(std::size_t width, std::uint64_t seed);

    /// Dispatches on the class; `n` is per sub-kind for misuse classes.
    AttackReport run(AttackClass cls, std::size_t n, std::uint64_t seed);

    const WebsiteContext& site() const noexcept { return site_; }

private:
    std::string url_;
    HarnessOptions options_;
    WebsiteContext site_;
};

enum class ReportFormat { table, json };

std::string render_report(const std::vector<AttackReport>& reports, ReportFormat format);

/// Accepts the JSON rendering (array or single object). Throws
/// Error(BadRequest) on schema violations.
std::vector<AttackReport> parse_reports(std::string_view json_text);

AttackReport make_report(std::string attack, std::uint64_t seed, std::uint64_t accepted,
                         std::map<std::string, std::uint64_t> errors, bool inconclusive = false);

} // namespace thermoguard
