#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zebra/error.hpp"

namespace zebra {

inline constexpr double kMinPowerDbm = -150.0;
inline constexpr double kMaxPowerDbm = 30.0;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
};

inline bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

struct PowerSweep {
  double timestamp = 0.0;  // UTC seconds
  GeoPoint location;
  std::vector<double> powers;  // dBm, one per frequency bin

  bool operator==(const PowerSweep&) const = default;
};

enum class DeviceKind { rfexplorer, ascii32, whisppi, android_rfe, generic };

inline constexpr std::array<DeviceKind, 5> kAllDeviceKinds = {
    DeviceKind::rfexplorer, DeviceKind::ascii32, DeviceKind::whisppi, DeviceKind::android_rfe,
    DeviceKind::generic};

inline std::string_view to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::rfexplorer: return "rfexplorer";
    case DeviceKind::ascii32: return "ascii32";
    case DeviceKind::whisppi: return "whisppi";
    case DeviceKind::android_rfe: return "android-rfe";
    case DeviceKind::generic: return "generic";
  }
  return "generic";
}

inline std::optional<DeviceKind> parse_device_kind(std::string_view text) {
  for (DeviceKind k : kAllDeviceKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

struct DeviceProfile {
  DeviceKind kind = DeviceKind::generic;
  std::string label;
  std::optional<double> sample_period_s;

  bool operator==(const DeviceProfile&) const = default;
};

struct JourneyMetadata {
  std::string country;
  std::string city;
  std::string notes;
  std::string collected_utc = "1970-01-01";  // YYYY-MM-DD

  bool operator==(const JourneyMetadata&) const = default;
};

struct Band {
  std::int64_t start_hz = 0;
  std::int64_t stop_hz = 0;

  std::int64_t span_hz() const { return stop_hz - start_hz; }
  bool operator==(const Band&) const = default;
};

struct Journey {
  std::string id;
  JourneyMetadata metadata;
  DeviceProfile device;
  Band band;
  std::int64_t bin_count = 0;
  std::vector<PowerSweep> sweeps;

  bool operator==(const Journey&) const = default;
};

// Same journey with every sweep dropped; used by operations that rebuild the sweep list.
inline Journey header_of(const Journey& j) {
  Journey out;
  out.id = j.id;
  out.metadata = j.metadata;
  out.device = j.device;
  out.band = j.band;
  out.bin_count = j.bin_count;
  return out;
}

enum class ZoneLabel { urban, rural, suburban, custom };

inline std::string_view to_string(ZoneLabel label) {
  switch (label) {
    case ZoneLabel::urban: return "urban";
    case ZoneLabel::rural: return "rural";
    case ZoneLabel::suburban: return "suburban";
    case ZoneLabel::custom: return "custom";
  }
  return "custom";
}

inline std::optional<ZoneLabel> parse_zone_label(std::string_view text) {
  for (ZoneLabel l : {ZoneLabel::urban, ZoneLabel::rural, ZoneLabel::suburban, ZoneLabel::custom}) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

// Simple polygon, implicitly closed. Coordinates are treated as planar (lat, lon).
struct Zone {
  ZoneLabel label = ZoneLabel::custom;
  std::vector<GeoPoint> vertices;
};

// Machine-readable invariant breach. `index` is the sweep index when the
// violation belongs to one sweep.
struct Violation {
  std::string code;
  std::string field;
  std::optional<std::size_t> index;
  std::string message;

  bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error("validation", summarize(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& vs) {
    std::string s = std::to_string(vs.size()) + " invariant violation(s)";
    if (!vs.empty()) s += ", first: " + vs.front().message;
    return s;
  }

  std::vector<Violation> violations_;
};

namespace detail {

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace detail

// Accepts exactly YYYY-MM-DD with a real calendar day.
inline bool is_valid_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  const int y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const int limit = kDays[m - 1] + (m == 2 && detail::is_leap(y) ? 1 : 0);
  return d <= limit;
}

// UTC calendar date of a unix timestamp, YYYY-MM-DD.
inline std::string utc_date(double unix_seconds) {
  auto days = static_cast<std::int64_t>(std::floor(unix_seconds / 86400.0));
  // civil_from_days, Howard Hinnant's algorithm
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const auto doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  if (m <= 2) ++y;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

// Every Journey/PowerSweep invariant breach, in field order then sweep order.
inline std::vector<Violation> validate_journey(const Journey& j) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string field, std::optional<std::size_t> idx,
                 std::string msg) {
    out.push_back({std::move(code), std::move(field), idx, std::move(msg)});
  };

  if (!is_valid_date(j.metadata.collected_utc)) {
    add("bad-date", "metadata.collected_utc", std::nullopt,
        "collected_utc is not a YYYY-MM-DD date: '" + j.metadata.collected_utc + "'");
  }
  if (j.device.sample_period_s &&
      !(std::isfinite(*j.device.sample_period_s) && *j.device.sample_period_s > 0.0)) {
    add("bad-sample-period", "device.sample_period_s", std::nullopt,
        "sample_period_s must be positive");
  }
  if (j.band.start_hz <= 0 || j.band.stop_hz <= 0) {
    add("bad-band", "band", std::nullopt, "band edges must be positive");
  }
  if (j.band.start_hz >= j.band.stop_hz) {
    add("band-order", "band", std::nullopt, "band.start_hz must be below band.stop_hz");
  }
  if (j.bin_count <= 0) {
    add("bad-bin-count", "bin_count", std::nullopt, "bin_count must be positive");
  }

  for (std::size_t i = 0; i < j.sweeps.size(); ++i) {
    const PowerSweep& s = j.sweeps[i];
    const std::string at = " at sweep " + std::to_string(i);
    if (!std::isfinite(s.timestamp)) {
      add("bad-timestamp", "sweeps.t", i, "non-finite timestamp" + at);
    } else if (i > 0 && std::isfinite(j.sweeps[i - 1].timestamp) &&
               s.timestamp < j.sweeps[i - 1].timestamp) {
      add("non-monotonic-timestamp", "sweeps.t", i, "non-monotonic timestamp" + at);
    }
    if (!std::isfinite(s.location.lat) || s.location.lat < -90.0 || s.location.lat > 90.0) {
      add("lat-out-of-range", "sweeps.lat", i, "latitude outside [-90, 90]" + at);
    }
    if (!std::isfinite(s.location.lon) || s.location.lon < -180.0 || s.location.lon > 180.0) {
      add("lon-out-of-range", "sweeps.lon", i, "longitude outside [-180, 180]" + at);
    }
    if (s.powers.empty()) {
      add("empty-powers", "sweeps.p", i, "sweep has no powers" + at);
    } else if (static_cast<std::int64_t>(s.powers.size()) != j.bin_count) {
      add("bin-count-mismatch", "sweeps.p", i,
          "bin-count mismatch" + at + ": " + std::to_string(s.powers.size()) + " powers, expected " +
              std::to_string(j.bin_count));
    }
    for (double p : s.powers) {
      if (!std::isfinite(p) || p < kMinPowerDbm || p > kMaxPowerDbm) {
        add("power-out-of-range", "sweeps.p", i, "power outside [-150, 30] dBm" + at);
        break;
      }
    }
  }
  return out;
}

namespace detail {

// Sign of the cross product (b - a) x (c - a) in the (lon, lat) plane.
inline int orientation(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  const double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
  return (v > 0) - (v < 0);
}

// c lies on segment [a, b], given that a, b, c are collinear.
inline bool within_box(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  return std::min(a.lat, b.lat) <= c.lat && c.lat <= std::max(a.lat, b.lat) &&
         std::min(a.lon, b.lon) <= c.lon && c.lon <= std::max(a.lon, b.lon);
}

inline bool on_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  return orientation(a, b, c) == 0 && within_box(a, b, c);
}

// Closed-segment intersection, touching included.
inline bool segments_intersect(const GeoPoint& p1, const GeoPoint& p2, const GeoPoint& q1,
                               const GeoPoint& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && within_box(p1, p2, q1)) || (o2 == 0 && within_box(p1, p2, q2)) ||
         (o3 == 0 && within_box(q1, q2, p1)) || (o4 == 0 && within_box(q1, q2, p2));
}

}  // namespace detail

inline std::vector<std::string> zone_problems(const Zone& zone) {
  std::vector<std::string> out;
  const auto& v = zone.vertices;
  const std::size_t n = v.size();
  if (n < 3) {
    out.push_back("zone needs at least 3 vertices");
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_valid(v[i])) out.push_back("vertex " + std::to_string(i) + " is not a valid point");
    if (v[i] == v[(i + 1) % n]) {
      out.push_back("consecutive vertices " + std::to_string(i) + " and " +
                    std::to_string((i + 1) % n) + " are equal");
    }
  }
  if (!out.empty()) return out;

  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a1 = v[i];
    const GeoPoint& a2 = v[(i + 1) % n];
    for (std::size_t k = i + 1; k < n; ++k) {
      const GeoPoint& b1 = v[k];
      const GeoPoint& b2 = v[(k + 1) % n];
      const bool adjacent = (k == i + 1) || (i == 0 && k == n - 1);
      if (adjacent) {
        // Shared endpoint is fine; folding back along the same line is not.
        const GeoPoint& shared = (k == i + 1) ? a2 : a1;
        const GeoPoint& other_a = (k == i + 1) ? a1 : a2;
        const GeoPoint& other_b = (k == i + 1) ? b2 : b1;
        if (detail::orientation(other_a, shared, other_b) == 0 &&
            (detail::within_box(other_a, shared, other_b) ||
             detail::within_box(shared, other_b, other_a))) {
          out.push_back("edges " + std::to_string(i) + " and " + std::to_string(k) + " overlap");
        }
        continue;
      }
      if (detail::segments_intersect(a1, a2, b1, b2)) {
        out.push_back("edges " + std::to_string(i) + " and " + std::to_string(k) + " cross");
      }
    }
  }
  return out;
}

inline bool is_valid(const Zone& zone) { return zone_problems(zone).empty(); }

}  // namespace zebra
