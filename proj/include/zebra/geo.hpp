#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "zebra/error.hpp"
#include "zebra/journey_format.hpp"
#include "zebra/model.hpp"

namespace zebra {

inline constexpr double kEarthRadiusM = 6371000.0;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Meters per degree of latitude on the mean-radius sphere.
inline constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = deg_to_rad(a.lat);
  const double lat2 = deg_to_rad(b.lat);
  const double s_lat = std::sin((lat2 - lat1) / 2.0);
  const double s_lon = std::sin(deg_to_rad(b.lon - a.lon) / 2.0);
  const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

inline double journey_length_km(const Journey& j) {
  double total = 0.0;
  for (std::size_t i = 1; i < j.sweeps.size(); ++i) {
    total += haversine_m(j.sweeps[i - 1].location, j.sweeps[i].location);
  }
  return total / 1000.0;
}

struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool well_ordered() const {
    return std::isfinite(min_lat) && std::isfinite(min_lon) && std::isfinite(max_lat) &&
           std::isfinite(max_lon) && min_lat < max_lat && min_lon < max_lon;
  }
  // Edges inclusive.
  bool contains(const GeoPoint& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }
  bool operator==(const BoundingBox&) const = default;
};

enum class Aggregation { max, min, mean };

inline std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::max: return "max";
    case Aggregation::min: return "min";
    case Aggregation::mean: return "mean";
  }
  return "max";
}

inline std::optional<Aggregation> parse_aggregation(std::string_view s) {
  for (Aggregation a : {Aggregation::max, Aggregation::min, Aggregation::mean}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

struct CondensationConfig {
  double radius_m = 50.0;
  Aggregation aggregation = Aggregation::max;
};

// Greedy covering result: `references` holds the sweep index that founded
// each reference, `assignment[i]` the reference that sweep i belongs to.
struct Condensation {
  std::vector<std::size_t> references;
  std::vector<std::size_t> assignment;
};

// Sweeps are visited in order; a sweep joins the earliest reference within
// radius_m, or founds a new one when none is that close.
inline Condensation condense_assignment(const Journey& j, double radius_m) {
  if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
    throw PreconditionError("condensation radius must be positive");
  }
  Condensation c;
  c.assignment.reserve(j.sweeps.size());

  // References bucketed by latitude band of height radius_m. Great-circle
  // distance is at least the meridional separation, so only the neighbouring
  // bands can hold a reference within range.
  const double band_height_deg = radius_m / kMetersPerDegree * (1.0 + 1e-9);
  auto band_of = [&](double lat) { return static_cast<std::int64_t>(std::floor(lat / band_height_deg)); };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bands;

  for (std::size_t i = 0; i < j.sweeps.size(); ++i) {
    const GeoPoint& p = j.sweeps[i].location;
    const std::int64_t b = band_of(p.lat);
    std::size_t best = SIZE_MAX;
    for (std::int64_t nb = b - 1; nb <= b + 1; ++nb) {
      auto it = bands.find(nb);
      if (it == bands.end()) continue;
      for (std::size_t ref : it->second) {
        if (ref >= best) break;  // ascending within a band
        if (haversine_m(j.sweeps[c.references[ref]].location, p) <= radius_m) {
          best = ref;
          break;
        }
      }
    }
    if (best == SIZE_MAX) {
      best = c.references.size();
      c.references.push_back(i);
      bands[b].push_back(best);
    }
    c.assignment.push_back(best);
  }
  return c;
}

inline Journey condense(const Journey& j, const CondensationConfig& cfg) {
  const Condensation c = condense_assignment(j, cfg.radius_m);
  const std::size_t bins = static_cast<std::size_t>(std::max<std::int64_t>(j.bin_count, 0));

  Journey out = header_of(j);
  out.sweeps.resize(c.references.size());
  std::vector<std::size_t> counts(c.references.size(), 0);
  std::vector<std::vector<double>> lo(c.references.size()), hi(c.references.size());

  for (std::size_t r = 0; r < c.references.size(); ++r) {
    const PowerSweep& founder = j.sweeps[c.references[r]];
    out.sweeps[r].location = founder.location;
    out.sweeps[r].timestamp = founder.timestamp;
    out.sweeps[r].powers.assign(bins, 0.0);
    lo[r].assign(bins, INFINITY);
    hi[r].assign(bins, -INFINITY);
  }

  for (std::size_t i = 0; i < j.sweeps.size(); ++i) {
    const std::size_t r = c.assignment[i];
    const PowerSweep& s = j.sweeps[i];
    PowerSweep& o = out.sweeps[r];
    o.timestamp = std::min(o.timestamp, s.timestamp);
    ++counts[r];
    for (std::size_t k = 0; k < bins && k < s.powers.size(); ++k) {
      lo[r][k] = std::min(lo[r][k], s.powers[k]);
      hi[r][k] = std::max(hi[r][k], s.powers[k]);
      if (cfg.aggregation == Aggregation::mean) o.powers[k] += s.powers[k];
    }
  }

  for (std::size_t r = 0; r < out.sweeps.size(); ++r) {
    auto& powers = out.sweeps[r].powers;
    for (std::size_t k = 0; k < bins; ++k) {
      switch (cfg.aggregation) {
        case Aggregation::max: powers[k] = hi[r][k]; break;
        case Aggregation::min: powers[k] = lo[r][k]; break;
        case Aggregation::mean: {
          // Rounding may step outside the bucket range when inputs carry
          // more than one decimal; clamp back into it.
          const double mean = powers[k] / static_cast<double>(counts[r]);
          powers[k] = std::clamp(round_power(mean), lo[r][k], hi[r][k]);
          break;
        }
      }
    }
  }
  return out;
}

namespace detail {

// Even-odd crossing test with boundary points counted as inside.
inline bool point_in_zone(const GeoPoint& p, const std::vector<GeoPoint>& poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
    const GeoPoint& a = poly[k];
    const GeoPoint& b = poly[i];
    if (on_segment(a, b, p)) return true;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double cross_lon = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < cross_lon) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

inline bool contains(const Zone& zone, const GeoPoint& p) {
  return detail::point_in_zone(p, zone.vertices);
}

inline Journey rezone(const Journey& j, const Zone& zone) {
  if (auto problems = zone_problems(zone); !problems.empty()) {
    throw PreconditionError("invalid zone: " + problems.front());
  }
  Journey out = header_of(j);
  for (const auto& s : j.sweeps) {
    if (contains(zone, s.location)) out.sweeps.push_back(s);
  }
  const std::string tag = "zone:" + std::string(to_string(zone.label));
  out.metadata.notes = out.metadata.notes.empty() ? tag : out.metadata.notes + " " + tag;
  return out;
}

struct SpacingStats {
  double mean_m = 0.0;
  double variance_m2 = 0.0;  // population variance
  double min_m = 0.0;
  double max_m = 0.0;
};

inline SpacingStats spacing_stats(const Journey& j) {
  if (j.sweeps.size() < 2) throw PreconditionError("spacing statistics need at least 2 sweeps");
  std::vector<double> d;
  d.reserve(j.sweeps.size() - 1);
  for (std::size_t i = 1; i < j.sweeps.size(); ++i) {
    d.push_back(haversine_m(j.sweeps[i - 1].location, j.sweeps[i].location));
  }
  SpacingStats st;
  double sum = 0.0;
  for (double v : d) sum += v;
  st.mean_m = sum / static_cast<double>(d.size());
  double sq = 0.0;
  for (double v : d) sq += (v - st.mean_m) * (v - st.mean_m);
  st.variance_m2 = sq / static_cast<double>(d.size());
  auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  st.min_m = *mn;
  st.max_m = *mx;
  return st;
}

}  // namespace zebra
