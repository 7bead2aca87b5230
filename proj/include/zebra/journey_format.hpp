#pragma once

// Canonical journey document: fixed key order, no insignificant whitespace,
// powers at one decimal. Parsing is tolerant of whitespace and key order.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <system_error>

#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/model.hpp"

namespace zebra {

inline constexpr std::string_view kJourneySchema = "zebra-journey/1";

// Power in tenths of a dBm, rounded half away from zero on the value's
// shortest decimal representation (so -101.55 rounds to -101.6).
inline std::int64_t round_tenths(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc{}) return std::llround(value * 10.0);
  std::string_view s(buf, static_cast<std::size_t>(end - buf));
  const bool negative = !s.empty() && s.front() == '-';
  if (negative) s.remove_prefix(1);
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  std::int64_t tenths = 0;
  for (char c : whole) tenths = tenths * 10 + (c - '0');
  tenths = tenths * 10 + (frac.empty() ? 0 : frac[0] - '0');
  if (frac.size() > 1 && frac[1] >= '5') ++tenths;
  return negative ? -tenths : tenths;
}

inline double round_power(double value) { return static_cast<double>(round_tenths(value)) / 10.0; }

inline std::string format_power(double value) {
  const std::int64_t t = round_tenths(value);
  const std::int64_t mag = t < 0 ? -t : t;
  std::string out = (t < 0) ? "-" : "";
  out += std::to_string(mag / 10);
  out += '.';
  out += static_cast<char>('0' + mag % 10);
  return out;
}

// Shortest plain decimal (never exponent notation) that parses back to the
// identical double.
inline std::string format_number(double value) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc{}) throw PreconditionError("number cannot be formatted");
  return std::string(buf, end);
}

inline std::string json_string(const std::string& s) {
  try {
    return nlohmann::json(s).dump();
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("string is not valid UTF-8: ") + e.what());
  }
}

// Journey with every power rounded to its canonical one-decimal value.
inline Journey with_rounded_powers(Journey j) {
  for (auto& s : j.sweeps) {
    for (auto& p : s.powers) p = round_power(p);
  }
  return j;
}

inline std::string serialize_journey(const Journey& j) {
  if (auto v = validate_journey(j); !v.empty()) throw ValidationError(std::move(v));

  std::string out;
  out.reserve(128 + j.sweeps.size() * (48 + static_cast<std::size_t>(j.bin_count) * 7));
  out += R"({"schema":")";
  out += kJourneySchema;
  out += R"(","id":)" + json_string(j.id);
  out += R"(,"metadata":{"country":)" + json_string(j.metadata.country);
  out += R"(,"city":)" + json_string(j.metadata.city);
  out += R"(,"notes":)" + json_string(j.metadata.notes);
  out += R"(,"collected_utc":)" + json_string(j.metadata.collected_utc);
  out += R"(},"device":{"kind":")";
  out += to_string(j.device.kind);
  out += R"(","label":)" + json_string(j.device.label);
  out += R"(,"sample_period_s":)";
  out += j.device.sample_period_s ? format_number(*j.device.sample_period_s) : "null";
  out += R"(},"band":{"start_hz":)" + std::to_string(j.band.start_hz);
  out += R"(,"stop_hz":)" + std::to_string(j.band.stop_hz);
  out += R"(},"bin_count":)" + std::to_string(j.bin_count);
  out += R"(,"sweeps":[)";
  for (std::size_t i = 0; i < j.sweeps.size(); ++i) {
    const PowerSweep& s = j.sweeps[i];
    if (i) out += ',';
    out += R"({"t":)" + format_number(s.timestamp);
    out += R"(,"lat":)" + format_number(s.location.lat);
    out += R"(,"lon":)" + format_number(s.location.lon);
    out += R"(,"p":[)";
    for (std::size_t k = 0; k < s.powers.size(); ++k) {
      if (k) out += ',';
      out += format_power(s.powers[k]);
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

namespace detail {

using json = nlohmann::json;

inline const json& require_key(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("missing key \"" + std::string(key) + "\" in " + where);
  return *it;
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw SchemaError("unknown key \"" + it.key() + "\" in " + where);
  }
}

inline const json& require_object(const json& obj, const char* key, const std::string& where) {
  const json& v = require_key(obj, key, where);
  if (!v.is_object()) throw SchemaError("\"" + std::string(key) + "\" must be an object");
  return v;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require_key(obj, key, where);
  if (!v.is_string()) throw SchemaError("\"" + std::string(key) + "\" must be a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw SchemaError(what + " must be a number");
  return v.get<double>();
}

inline double require_number(const json& obj, const char* key, const std::string& where) {
  return as_number(require_key(obj, key, where), "\"" + std::string(key) + "\"");
}

inline std::int64_t require_integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require_key(obj, key, where);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) throw SchemaError("\"" + std::string(key) + "\" too large");
    return static_cast<std::int64_t>(u);
  }
  throw SchemaError("\"" + std::string(key) + "\" must be an integer");
}

}  // namespace detail

// Builds a Journey from an already-parsed document without invariant checks.
inline Journey journey_from_json(const nlohmann::json& doc) {
  using detail::require_key;
  if (!doc.is_object()) throw SchemaError("journey document must be an object");
  detail::reject_unknown_keys(doc, {"schema", "id", "metadata", "device", "band", "bin_count", "sweeps"},
                              "journey");
  if (detail::require_string(doc, "schema", "journey") != kJourneySchema) {
    throw SchemaError("unsupported schema, expected " + std::string(kJourneySchema));
  }

  Journey j;
  j.id = detail::require_string(doc, "id", "journey");

  const auto& meta = detail::require_object(doc, "metadata", "journey");
  detail::reject_unknown_keys(meta, {"country", "city", "notes", "collected_utc"}, "metadata");
  j.metadata.country = detail::require_string(meta, "country", "metadata");
  j.metadata.city = detail::require_string(meta, "city", "metadata");
  j.metadata.notes = detail::require_string(meta, "notes", "metadata");
  j.metadata.collected_utc = detail::require_string(meta, "collected_utc", "metadata");

  const auto& dev = detail::require_object(doc, "device", "journey");
  detail::reject_unknown_keys(dev, {"kind", "label", "sample_period_s"}, "device");
  const std::string kind = detail::require_string(dev, "kind", "device");
  auto parsed_kind = parse_device_kind(kind);
  if (!parsed_kind) throw SchemaError("unknown device kind \"" + kind + "\"");
  j.device.kind = *parsed_kind;
  j.device.label = detail::require_string(dev, "label", "device");
  const auto& period = require_key(dev, "sample_period_s", "device");
  if (!period.is_null()) j.device.sample_period_s = detail::as_number(period, "\"sample_period_s\"");

  const auto& band = detail::require_object(doc, "band", "journey");
  detail::reject_unknown_keys(band, {"start_hz", "stop_hz"}, "band");
  j.band.start_hz = detail::require_integer(band, "start_hz", "band");
  j.band.stop_hz = detail::require_integer(band, "stop_hz", "band");

  j.bin_count = detail::require_integer(doc, "bin_count", "journey");

  const auto& sweeps = require_key(doc, "sweeps", "journey");
  if (!sweeps.is_array()) throw SchemaError("\"sweeps\" must be an array");
  j.sweeps.reserve(sweeps.size());
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    const auto& s = sweeps[i];
    const std::string where = "sweeps[" + std::to_string(i) + "]";
    if (!s.is_object()) throw SchemaError(where + " must be an object");
    detail::reject_unknown_keys(s, {"t", "lat", "lon", "p"}, where);
    PowerSweep ps;
    ps.timestamp = detail::require_number(s, "t", where);
    ps.location.lat = detail::require_number(s, "lat", where);
    ps.location.lon = detail::require_number(s, "lon", where);
    const auto& p = require_key(s, "p", where);
    if (!p.is_array()) throw SchemaError(where + ".p must be an array");
    ps.powers.reserve(p.size());
    for (const auto& v : p) ps.powers.push_back(detail::as_number(v, where + ".p[]"));
    j.sweeps.push_back(std::move(ps));
  }
  return j;
}

// Throws SchemaError for shape problems, ValidationError for invariant breaches.
inline Journey parse_journey(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("not a JSON document: ") + e.what());
  }
  Journey j = journey_from_json(doc);
  if (auto v = validate_journey(j); !v.empty()) throw ValidationError(std::move(v));
  return j;
}

}  // namespace zebra
