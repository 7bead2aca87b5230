#pragma once

// Regulator tier: validates pushed region summaries against an incumbent
// registry, and the client side that pushes a summary to it.

#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/federation.hpp"
#include "zebra/hash.hpp"
#include "zebra/service.hpp"

namespace zebra {

class Regulator {
 public:
  explicit Regulator(std::vector<IncumbentRecord> registry) : registry_(std::move(registry)) {}

  const std::vector<IncumbentRecord>& registry() const { return registry_; }

  // Validates one summary document. Identical summaries (after
  // canonicalisation) get the identical stored reply.
  std::string receive(std::string_view summary_document) {
    const RegionSummary summary = parse_summary(summary_document);
    const std::string canonical = serialize_summary(summary);
    const std::string key = content_hash({"summary", canonical});
    {
      std::lock_guard lock(mutex_);
      if (auto it = replies_.find(key); it != replies_.end()) return it->second;
    }
    std::string reply = serialize_validation(validate_summary(summary, registry_));
    std::lock_guard lock(mutex_);
    return replies_.emplace(key, std::move(reply)).first->second;
  }

  std::size_t distinct_summaries() const {
    std::lock_guard lock(mutex_);
    return replies_.size();
  }

 private:
  std::vector<IncumbentRecord> registry_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> replies_;
};

inline void mount_regulator_routes(httplib::Server& server, Regulator& regulator) {
  server.Post("/v1/regulator/summaries", [&regulator](const httplib::Request& req, httplib::Response& res) {
    handle_request(res, [&] { res.set_content(regulator.receive(req.body), "application/json"); });
  });
  server.Get("/v1/regulator/registry", [&regulator](const httplib::Request&, httplib::Response& res) {
    res.set_content(to_json(std::span<const IncumbentRecord>(regulator.registry())).dump(), "application/json");
  });
}

struct PushOptions {
  std::chrono::milliseconds timeout{5000};
  int attempts = 1;  // transport failures are retried up to this many times in total
  std::string bearer_token;
};

namespace detail {

// Splits "http://host:port/base" into {"http://host:port", "/base"}.
inline std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("endpoint must be an http:// URL: " + url);
  const auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string base = url.substr(path);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {url.substr(0, path), base};
}

}  // namespace detail

inline ValidationReport push_summary(const RegionSummary& summary, const std::string& endpoint,
                                     const PushOptions& options = {}) {
  const auto [host, base] = detail::split_endpoint(endpoint);
  const std::string body = serialize_summary(summary);
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < std::max(options.attempts, 1); ++attempt) {
    httplib::Client client(host);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    if (!options.bearer_token.empty()) client.set_bearer_token_auth(options.bearer_token);
    auto res = client.Post(base + "/v1/regulator/summaries", body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      std::string reason = res->body;
      try {
        const auto doc = nlohmann::json::parse(res->body);
        reason = doc.value("error", std::string("rejected")) + ": " + doc.value("detail", std::string());
      } catch (const nlohmann::json::exception&) {
      }
      throw RejectionError(res->status, reason);
    }
    return parse_validation(res->body);
  }
  throw TransportError("cannot reach regulator at " + endpoint + ": " + last_error);
}

}  // namespace zebra
