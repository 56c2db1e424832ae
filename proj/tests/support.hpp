#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "thermoguard/captcha_service.hpp"
#include "thermoguard/client_sim.hpp"
#include "thermoguard/http_frontend.hpp"
#include "thermoguard/state_store.hpp"

namespace thermoguard::testing {

// RSA generation is slow on small machines; tests share a few keys.
inline const KeyPair& test_key(int index) {
    static std::mutex mu;
    static std::map<int, KeyPair> keys;
    std::lock_guard lock(mu);
    auto it = keys.find(index);
    if (it == keys.end()) it = keys.emplace(index, gen_keypair()).first;
    return it->second;
}

// A service on a loopback port with an in-memory store.
struct LiveServer {
    ServerConfig config;
    CaptchaService service;
    HttpFrontend frontend;

    explicit LiveServer(ServerConfig cfg = {}, Clock clock = now_utc)
        : config(cfg), service(cfg, make_memory_store()), frontend(service, std::move(clock), 8) {
        frontend.bind("127.0.0.1", 0);
        frontend.start();
    }

    std::string url() const { return frontend.base_url(); }
};

} // namespace thermoguard::testing
