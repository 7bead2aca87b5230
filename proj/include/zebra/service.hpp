#pragma once

// Regional repository service: controllers (uploader, filter/query, derive,
// analysis) over a JourneyStore, and their HTTP/JSON binding.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/geo.hpp"
#include "zebra/hash.hpp"
#include "zebra/ingest.hpp"
#include "zebra/journey_format.hpp"
#include "zebra/model.hpp"
#include "zebra/occupancy.hpp"
#include "zebra/store.hpp"

namespace zebra {

struct RegionConfig {
  std::string region_id = "default";
  std::string name = "Default region";
  BoundingBox bounding_box{-90.0, -180.0, 90.0, 180.0};
  ChannelPlan default_plan = default_uhf_plan();
};

inline nlohmann::ordered_json to_json(const RegionConfig& r) {
  return {{"region_id", r.region_id},
          {"name", r.name},
          {"bounding_box",
           {{"min_lat", r.bounding_box.min_lat},
            {"min_lon", r.bounding_box.min_lon},
            {"max_lat", r.bounding_box.max_lat},
            {"max_lon", r.bounding_box.max_lon}}},
          {"default_plan", to_json(r.default_plan)}};
}

inline RegionConfig parse_region_config(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    RegionConfig r;
    r.region_id = doc.at("region_id").get<std::string>();
    r.name = doc.value("name", r.region_id);
    const auto& bb = doc.at("bounding_box");
    r.bounding_box = {bb.at("min_lat").get<double>(), bb.at("min_lon").get<double>(), bb.at("max_lat").get<double>(),
                      bb.at("max_lon").get<double>()};
    if (!r.bounding_box.well_ordered()) throw SchemaError("region bounding box is not well ordered");
    if (doc.contains("default_plan")) r.default_plan = plan_from_json(doc.at("default_plan"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed region config: ") + e.what());
  }
}

struct JourneyFilter {
  std::optional<BoundingBox> bbox;
  std::optional<std::string> country;
  std::optional<std::string> city;
  std::optional<std::string> from;  // YYYY-MM-DD, inclusive
  std::optional<std::string> to;    // YYYY-MM-DD, inclusive
  std::optional<DeviceKind> device;
};

struct JourneySummary {
  std::string id;
  JourneyMetadata metadata;
  std::size_t sweep_count = 0;
  double length_km = 0.0;
  std::optional<std::string> derived_from;
};

inline nlohmann::ordered_json to_json(const JourneySummary& s) {
  nlohmann::ordered_json derived = nullptr;
  if (s.derived_from) derived = *s.derived_from;
  return {{"id", s.id},
          {"metadata",
           {{"country", s.metadata.country},
            {"city", s.metadata.city},
            {"notes", s.metadata.notes},
            {"collected_utc", s.metadata.collected_utc}}},
          {"sweep_count", s.sweep_count},
          {"length_km", s.length_km},
          {"derived_from", derived}};
}

// Optional overrides of the region's default plan.
struct PlanParams {
  std::optional<std::int64_t> start_hz;
  std::optional<std::int64_t> stop_hz;
  std::optional<std::int64_t> width_hz;
};

struct UploadResult {
  std::string id;
  bool created = false;
};

namespace detail {

// Integral Hz value; scientific notation such as 470e6 is accepted.
inline std::optional<std::int64_t> parse_hz(std::string_view s) {
  auto v = to_double(s);
  if (!v || !std::isfinite(*v) || *v != std::floor(*v) || std::fabs(*v) > 9e18) return std::nullopt;
  return static_cast<std::int64_t>(*v);
}

inline std::vector<double> parse_number_list(std::string_view s, const char* what) {
  std::vector<double> out;
  for (auto tok : split(s, ',')) {
    auto v = to_double(tok);
    if (!v) throw PreconditionError(std::string("malformed ") + what + " list");
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

inline JourneyFilter parse_filter(const std::map<std::string, std::string>& params) {
  JourneyFilter f;
  for (const auto& [key, value] : params) {
    if (key == "bbox") {
      std::vector<double> v;
      try {
        v = detail::parse_number_list(value, "bbox");
      } catch (const PreconditionError&) {
        throw FilterError("bbox must be min_lat,min_lon,max_lat,max_lon");
      }
      if (v.size() != 4) throw FilterError("bbox must be min_lat,min_lon,max_lat,max_lon");
      BoundingBox bb{v[0], v[1], v[2], v[3]};
      if (!bb.well_ordered()) throw FilterError("bbox is not well ordered");
      f.bbox = bb;
    } else if (key == "country") {
      f.country = value;
    } else if (key == "city") {
      f.city = value;
    } else if (key == "from" || key == "to") {
      if (!is_valid_date(value)) throw FilterError(key + " must be a YYYY-MM-DD date");
      (key == "from" ? f.from : f.to) = value;
    } else if (key == "device") {
      auto kind = parse_device_kind(value);
      if (!kind) throw FilterError("unknown device kind " + value);
      f.device = kind;
    } else {
      throw FilterError("unknown filter parameter " + key);
    }
  }
  if (f.from && f.to && *f.from > *f.to) throw FilterError("from is after to");
  return f;
}

inline bool matches(const JourneyFilter& f, const Journey& j) {
  if (f.country && j.metadata.country != *f.country) return false;
  if (f.city && j.metadata.city != *f.city) return false;
  if (f.from && j.metadata.collected_utc < *f.from) return false;
  if (f.to && j.metadata.collected_utc > *f.to) return false;
  if (f.device && j.device.kind != *f.device) return false;
  if (f.bbox) {
    bool any = false;
    for (const auto& s : j.sweeps) any = any || f.bbox->contains(s.location);
    if (!any) return false;
  }
  return true;
}

class RepositoryService {
 public:
  RepositoryService(JourneyStore& store, RegionConfig region) : store_(store), region_(std::move(region)) {
    if (!region_.bounding_box.well_ordered()) throw PreconditionError("region bounding box is not well ordered");
  }

  const RegionConfig& region() const { return region_; }
  JourneyStore& store() { return store_; }

  // Canonical documents go straight to the parser; anything else (or any
  // payload sent with a device kind) goes through the raw adapters.
  UploadResult upload(std::string_view payload, std::optional<DeviceKind> kind, const std::string& token) {
    if (payload.empty()) throw PreconditionError("empty payload");
    const std::string kind_tag = kind ? std::string(to_string(*kind)) : std::string();

    Journey j;
    if (kind) {
      j = parse_raw({*kind, std::string(payload), {}});
    } else if (looks_like_json(payload)) {
      j = parse_journey(payload);
    } else if (auto detected = detect_format(payload)) {
      j = parse_raw({*detected, std::string(payload), {}});
    } else {
      throw FormatError(0, "payload is neither a canonical journey nor a known raw capture");
    }

    const std::string id = make_id(content_hash({"upload", token, kind_tag, payload}));
    if (j.id.empty()) j.id = id;
    const bool created = store_.insert(id, j, token);
    return {id, created};
  }

  std::string fetch(const std::string& id) const {
    auto doc = store_.canonical(id);
    if (!doc) throw NotFoundError(id);
    return *doc;
  }

  StoredJourney get(const std::string& id) const {
    auto s = store_.get(id);
    if (!s) throw NotFoundError(id);
    return *s;
  }

  std::vector<JourneySummary> query(const JourneyFilter& filter) const {
    std::vector<JourneySummary> out;
    for (const auto& [id, s] : store_.list()) {
      if (!matches(filter, s.journey)) continue;
      out.push_back({id, s.journey.metadata, s.journey.sweeps.size(), journey_length_km(s.journey), s.derived_from});
    }
    return out;
  }

  std::string derive_condense(const std::string& id, const CondensationConfig& cfg) {
    const StoredJourney parent = get(id);
    Journey child = condense(parent.journey, cfg);
    return store_child(id, parent, std::move(child),
                       "condense:" + format_number(cfg.radius_m) + ":" + std::string(to_string(cfg.aggregation)));
  }

  std::string derive_rezone(const std::string& id, const Zone& zone) {
    const StoredJourney parent = get(id);
    Journey child = rezone(parent.journey, zone);
    std::string desc = "rezone:" + std::string(to_string(zone.label));
    for (const auto& v : zone.vertices) desc += ":" + format_number(v.lat) + "," + format_number(v.lon);
    return store_child(id, parent, std::move(child), desc);
  }

  ChannelPlan resolve_plan(const PlanParams& p) const {
    if (!p.start_hz && !p.stop_hz && !p.width_hz) return region_.default_plan;
    const auto& d = region_.default_plan;
    return make_plan(p.start_hz.value_or(d.band_start_hz), p.stop_hz.value_or(d.band_stop_hz),
                     p.width_hz.value_or(d.channel_width_hz));
  }

  OccupationReport occupation(const std::string& id, const PlanParams& plan,
                              std::optional<double> threshold_dbm) const {
    return occupation_report(get(id).journey, resolve_plan(plan), threshold_dbm);
  }

  std::vector<OccupationReport> occupation_curve(const std::string& id, const PlanParams& plan,
                                                 const std::vector<double>& thresholds) const {
    return zebra::occupation_curve(get(id).journey, resolve_plan(plan), thresholds);
  }

  HeatmapGrid heatmap(const std::string& id, const PlanParams& plan, std::optional<std::size_t> channel,
                      double cell_size_m) const {
    if (!(cell_size_m > 0.0)) throw PreconditionError("cell_m must be positive");
    return zebra::heatmap(get(id).journey, resolve_plan(plan), channel, cell_size_m);
  }

 private:
  static bool looks_like_json(std::string_view payload) {
    for (char c : payload) {
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
      return c == '{';
    }
    return false;
  }

  static std::string make_id(const std::string& hash) { return hash.substr(0, 24); }

  std::string store_child(const std::string& parent_id, const StoredJourney& parent, Journey child,
                          const std::string& op_desc) {
    const std::string id = make_id(content_hash({"derive", parent_id, op_desc}));
    child.id = id;
    store_.insert(id, child, parent.uploader_token, parent_id);
    return id;
  }

  JourneyStore& store_;
  RegionConfig region_;
};

// --- HTTP binding ------------------------------------------------------------

inline int http_status_for(const Error& e) {
  const std::string& c = e.code();
  if (c == "unknown-id") return 404;
  if (c == "validation" || c == "empty-journey" || c == "empty-channel" || c == "plan-mismatch" ||
      c == "out-of-range" || c == "inconsistent")
    return 422;
  if (c == "storage") return 500;
  return 400;
}

inline std::string error_body(const std::string& code, const std::string& detail) {
  return nlohmann::ordered_json{{"error", code}, {"detail", detail}}.dump();
}

inline std::string error_body(const Error& e) {
  nlohmann::ordered_json body{{"error", e.code()}, {"detail", e.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& viol : v->violations()) {
      nlohmann::ordered_json item{{"code", viol.code}, {"field", viol.field}, {"message", viol.message}};
      item["index"] = viol.index ? nlohmann::ordered_json(*viol.index) : nlohmann::ordered_json(nullptr);
      list.push_back(std::move(item));
    }
    body["violations"] = std::move(list);
  }
  return body.dump();
}

// Runs `fn`, translating library errors into JSON error responses.
template <typename Fn>
void handle_request(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    res.status = http_status_for(e);
    res.set_content(error_body(e), "application/json");
  } catch (const std::exception& e) {
    res.status = 500;
    res.set_content(error_body("internal", e.what()), "application/json");
  }
}

namespace detail {

inline std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

inline std::optional<double> number_param(const httplib::Request& req, const char* key) {
  auto v = param(req, key);
  if (!v) return std::nullopt;
  auto d = to_double(*v);
  if (!d || !std::isfinite(*d)) throw PreconditionError(std::string(key) + " must be a finite number");
  return d;
}

inline PlanParams plan_params(const httplib::Request& req) {
  PlanParams p;
  auto hz = [&](const char* key) -> std::optional<std::int64_t> {
    auto v = param(req, key);
    if (!v) return std::nullopt;
    auto parsed = parse_hz(*v);
    if (!parsed) throw PreconditionError(std::string(key) + " must be an integral frequency in Hz");
    return parsed;
  };
  p.start_hz = hz("start_hz");
  p.stop_hz = hz("stop_hz");
  p.width_hz = hz("width_hz");
  return p;
}

inline nlohmann::json json_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("request body is not JSON: ") + e.what());
  }
}

inline std::string bearer_token(const httplib::Request& req) {
  const std::string auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
  return auth;
}

}  // namespace detail

inline void mount_repository_routes(httplib::Server& server, RepositoryService& svc) {
  using httplib::Request;
  using httplib::Response;
  const char* kJson = "application/json";

  server.Post("/v1/journeys", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      std::optional<DeviceKind> kind;
      if (req.has_header("X-Device-Kind")) {
        const std::string k = req.get_header_value("X-Device-Kind");
        kind = parse_device_kind(k);
        if (!kind) throw PreconditionError("unknown X-Device-Kind " + k);
      }
      const UploadResult r = svc.upload(req.body, kind, detail::bearer_token(req));
      res.status = r.created ? 201 : 200;
      res.set_content(nlohmann::ordered_json{{"id", r.id}}.dump(), kJson);
    });
  });

  server.Get("/v1/journeys", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      std::map<std::string, std::string> params;
      for (const auto& [k, v] : req.params) {
        if (!v.empty()) params[k] = v;
      }
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& s : svc.query(parse_filter(params))) arr.push_back(to_json(s));
      res.set_content(arr.dump(), kJson);
    });
  });

  server.Get(R"(/v1/journeys/([^/]+))", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] { res.set_content(svc.fetch(req.matches[1]), kJson); });
  });

  server.Post(R"(/v1/journeys/([^/]+)/condense)", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      const auto body = detail::json_body(req);
      CondensationConfig cfg;
      try {
        cfg.radius_m = body.at("radius_m").get<double>();
        if (body.contains("aggregation")) {
          const auto a = body.at("aggregation").get<std::string>();
          auto agg = parse_aggregation(a);
          if (!agg) throw PreconditionError("aggregation must be max, min or mean");
          cfg.aggregation = *agg;
        }
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("condense body: ") + e.what());
      }
      if (!(cfg.radius_m > 0.0) || !std::isfinite(cfg.radius_m)) throw PreconditionError("radius_m must be positive");
      const std::string id = svc.derive_condense(req.matches[1], cfg);
      res.status = 201;
      res.set_content(nlohmann::ordered_json{{"id", id}}.dump(), kJson);
    });
  });

  server.Post(R"(/v1/journeys/([^/]+)/rezone)", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      const auto body = detail::json_body(req);
      Zone zone;
      try {
        const auto label = body.value("label", std::string("custom"));
        auto parsed = parse_zone_label(label);
        if (!parsed) throw PreconditionError("unknown zone label " + label);
        zone.label = *parsed;
        for (const auto& v : body.at("vertices")) {
          if (!v.is_array() || v.size() != 2) throw SchemaError("vertices must be [lat, lon] pairs");
          zone.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
        }
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("rezone body: ") + e.what());
      }
      const std::string id = svc.derive_rezone(req.matches[1], zone);
      res.status = 201;
      res.set_content(nlohmann::ordered_json{{"id", id}}.dump(), kJson);
    });
  });

  server.Get(R"(/v1/journeys/([^/]+)/occupation)", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      const auto report =
          svc.occupation(req.matches[1], detail::plan_params(req), detail::number_param(req, "threshold_dbm"));
      res.set_content(serialize_report(report), kJson);
    });
  });

  server.Get(R"(/v1/journeys/([^/]+)/occupation-curve)", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      auto t = detail::param(req, "thresholds");
      if (!t || t->empty()) throw PreconditionError("thresholds parameter is required");
      const auto thresholds = detail::parse_number_list(*t, "thresholds");
      res.set_content(serialize_curve(svc.occupation_curve(req.matches[1], detail::plan_params(req), thresholds)),
                      kJson);
    });
  });

  server.Get(R"(/v1/journeys/([^/]+)/heatmap)", [&svc, kJson](const Request& req, Response& res) {
    handle_request(res, [&] {
      auto cell = detail::number_param(req, "cell_m");
      if (!cell) throw PreconditionError("cell_m parameter is required");
      std::optional<std::size_t> channel;
      if (auto c = detail::param(req, "channel"); c && !c->empty()) {
        auto idx = detail::to_int(*c);
        if (!idx || *idx < 0) throw PreconditionError("channel must be a non-negative integer");
        channel = static_cast<std::size_t>(*idx);
      }
      res.set_content(serialize_heatmap(svc.heatmap(req.matches[1], detail::plan_params(req), channel, *cell)), kJson);
    });
  });

  server.Get("/v1/region", [&svc, kJson](const Request&, Response& res) {
    res.set_content(to_json(svc.region()).dump(), kJson);
  });
}

}  // namespace zebra
