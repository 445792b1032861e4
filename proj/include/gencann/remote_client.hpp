#pragma once

// Chat-completions client over HTTP(S). One request per call, no retries.
// Needs CPPHTTPLIB_OPENSSL_SUPPORT (and OpenSSL) for https endpoints.

#include <cstdlib>

// before httplib: <resolv.h> defines a `_res` macro that breaks Eigen's headers
#include "gen_loop.hpp"

#include <httplib.h>
#include <json.hpp>

namespace gencann {

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "o3";
  std::optional<double> temperature; ///< omitted from the request when unset
  std::chrono::seconds timeout{120};
};

/// API key from GENCANN_API_KEY; empty when unset.
inline std::string api_key_from_env() {
  const char* k = std::getenv("GENCANN_API_KEY");
  return k ? std::string(k) : std::string();
}

class RemoteClient : public LlmClient {
public:
  RemoteClient(RemoteConfig cfg, std::string api_key) : cfg_(std::move(cfg)), key_(std::move(api_key)) {
    const auto scheme = cfg_.base_url.find("://");
    if (scheme == std::string::npos) throw InvalidInput("base URL needs a scheme: " + cfg_.base_url);
    const auto slash = cfg_.base_url.find('/', scheme + 3);
    host_ = cfg_.base_url.substr(0, slash);
    prefix_ = slash == std::string::npos ? std::string() : cfg_.base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string complete(const std::vector<Message>& messages) override {
    nlohmann::json body;
    body["model"] = cfg_.model;
    if (cfg_.temperature) body["temperature"] = *cfg_.temperature;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    httplib::Client cli(host_);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    cli.set_write_timeout(cfg_.timeout);
    httplib::Headers headers;
    if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
    auto res = cli.Post(prefix_ + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + host_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + host_ + ": " +
                           detail::redact(res->body.substr(0, 300), key_));
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed completion response: ") + e.what());
    }
  }

private:
  RemoteConfig cfg_;
  std::string key_;
  std::string host_, prefix_;
};

} // namespace gencann
