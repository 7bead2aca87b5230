#pragma once

// Shared generators and brute-force oracles for the unit and acceptance
// suites. The oracles deliberately avoid the library's algorithms: they
// recompute every quantity from its definition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "zebra/zebra.hpp"

namespace zebra::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Journey make_journey(Band band, std::int64_t bins, std::vector<PowerSweep> sweeps) {
  Journey j;
  j.id = "fixture";
  j.metadata = {"Venezuela", "Merida", "", "2016-06-15"};
  j.device = {DeviceKind::rfexplorer, "rfe", std::nullopt};
  j.band = band;
  j.bin_count = bins;
  j.sweeps = std::move(sweeps);
  return j;
}

// Journey and plan small enough for brute force: <= 10 sweeps, <= 8 channels,
// <= 16 bins. Powers come from a coarse grid so ties between sweeps are common.
struct OccupancyCase {
  Journey journey;
  ChannelPlan plan;
};

inline std::optional<std::vector<std::vector<double>>> oracle_channel_powers(const Journey& j, const ChannelPlan& plan);

// Any layout, including ones where some channel receives no bin centre.
inline OccupancyCase random_occupancy_layout(Rng& rng) {
  const int channels = uniform_int(rng, 1, 8);
  const int bins = uniform_int(rng, channels, 16);
  const std::int64_t width = 16 * uniform_int(rng, 1, 4);
  const std::int64_t start = 1000 + 8 * uniform_int(rng, 0, 10);
  const std::int64_t remainder = uniform_int(rng, 0, 1) ? uniform_int(rng, 0, static_cast<int>(width) - 1) : 0;
  const Band band{start, start + channels * width + remainder};
  const ChannelPlan plan = make_plan(start, start + channels * width + remainder, width);

  const int sweeps = uniform_int(rng, 1, 10);
  std::vector<PowerSweep> out;
  for (int s = 0; s < sweeps; ++s) {
    PowerSweep ps{static_cast<double>(s), {uniform(rng, -1, 1), uniform(rng, -1, 1)}, {}};
    for (int b = 0; b < bins; ++b) ps.powers.push_back(-120.0 + 5.0 * uniform_int(rng, 0, 16) + 0.5 * uniform_int(rng, 0, 1));
    out.push_back(std::move(ps));
  }
  return {make_journey(band, bins, std::move(out)), plan};
}

// A layout where every channel holds at least one bin centre.
inline OccupancyCase random_occupancy_case(Rng& rng) {
  while (true) {
    OccupancyCase c = random_occupancy_layout(rng);
    if (oracle_channel_powers(c.journey, c.plan)) return c;
  }
}

// Channel powers from the definition: bin centre start + (i + 1/2) * span / bins.
// Returns nullopt when some channel holds no bin centre.
inline std::optional<std::vector<std::vector<double>>> oracle_channel_powers(const Journey& j, const ChannelPlan& plan) {
  std::vector<std::vector<double>> out;
  for (const auto& s : j.sweeps) {
    std::vector<double> row;
    for (const auto& ch : plan.channels) {
      bool any = false;
      double best = 0.0;
      for (std::int64_t i = 0; i < j.bin_count; ++i) {
        const long double centre = static_cast<long double>(j.band.start_hz) +
                                   (static_cast<long double>(i) + 0.5L) *
                                       static_cast<long double>(j.band.stop_hz - j.band.start_hz) /
                                       static_cast<long double>(j.bin_count);
        if (centre >= ch.start_hz && centre < ch.stop_hz) {
          best = any ? std::max(best, s.powers[static_cast<std::size_t>(i)]) : s.powers[static_cast<std::size_t>(i)];
          any = true;
        }
      }
      if (!any) return std::nullopt;
      row.push_back(best);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline std::vector<double> oracle_occupation(const std::vector<std::vector<double>>& cp, double threshold) {
  std::vector<double> out;
  const std::size_t channels = cp.empty() ? 0 : cp.front().size();
  for (std::size_t c = 0; c < channels; ++c) {
    std::size_t hits = 0;
    for (const auto& row : cp) hits += row[c] >= threshold ? 1 : 0;
    out.push_back(static_cast<double>(hits) / static_cast<double>(cp.size()));
  }
  return out;
}

// Scans every observed power as a candidate threshold and keeps the largest
// one that leaves some channel fully occupied.
inline double oracle_auto_threshold(const std::vector<std::vector<double>>& cp) {
  std::set<double> candidates;
  for (const auto& row : cp) candidates.insert(row.begin(), row.end());
  double best = -INFINITY;
  for (double t : candidates) {
    const auto occ = oracle_occupation(cp, t);
    if (std::any_of(occ.begin(), occ.end(), [](double o) { return o == 1.0; })) best = std::max(best, t);
  }
  return best;
}

inline double oracle_whitespace(const std::vector<double>& occ) {
  std::size_t idle = 0;
  for (double o : occ) idle += o < 0.2 ? 1 : 0;
  return static_cast<double>(idle) / static_cast<double>(occ.size());
}

// Random journey over a small area; sweeps are scattered so condensation
// radii of tens to hundreds of meters produce non-trivial buckets.
inline Journey random_geo_journey(Rng& rng, int max_sweeps, int bins = 4, double spread_deg = 0.01) {
  const int n = uniform_int(rng, 0, max_sweeps);
  const GeoPoint centre{uniform(rng, -60, 60), uniform(rng, -170, 170)};
  std::vector<PowerSweep> sweeps;
  double t = 1466000000.0;
  for (int i = 0; i < n; ++i) {
    t += uniform_int(rng, 0, 3);
    PowerSweep s{t, {centre.lat + uniform(rng, -spread_deg, spread_deg), centre.lon + uniform(rng, -spread_deg, spread_deg)}, {}};
    for (int b = 0; b < bins; ++b) s.powers.push_back(round_power(uniform(rng, -120, -30)));
    sweeps.push_back(std::move(s));
  }
  return make_journey({470'000'000, 694'000'000}, bins, std::move(sweeps));
}

// Greedy covering written as plainly as possible: each sweep scans every
// reference made so far, in creation order.
inline std::vector<std::vector<std::size_t>> oracle_condense_buckets(const Journey& j, double radius_m) {
  std::vector<std::size_t> refs;
  std::vector<std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < j.sweeps.size(); ++i) {
    bool placed = false;
    for (std::size_t r = 0; r < refs.size() && !placed; ++r) {
      if (haversine_m(j.sweeps[refs[r]].location, j.sweeps[i].location) <= radius_m) {
        buckets[r].push_back(i);
        placed = true;
      }
    }
    if (!placed) {
      refs.push_back(i);
      buckets.push_back({i});
    }
  }
  return buckets;
}

inline double oracle_cross(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  return (b.lon - a.lon) * (c.lat - a.lat) - (c.lon - a.lon) * (b.lat - a.lat);
}

inline bool oracle_on_boundary(const std::vector<GeoPoint>& poly, const GeoPoint& p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const GeoPoint& a = poly[i];
    const GeoPoint& b = poly[(i + 1) % poly.size()];
    if (oracle_cross(a, b, p) == 0.0 && p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat) &&
        p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon))
      return true;
  }
  return false;
}

// Winding number of a closed polygon around p (planar lon/lat), with points
// on an edge reported as inside.
inline bool oracle_inside(const std::vector<GeoPoint>& poly, const GeoPoint& p) {
  if (oracle_on_boundary(poly, p)) return true;
  const auto cross = oracle_cross;
  int winding = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a = poly[i];
    const GeoPoint& b = poly[(i + 1) % n];
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && cross(a, b, p) > 0) ++winding;
    } else {
      if (b.lat <= p.lat && cross(a, b, p) < 0) --winding;
    }
  }
  return winding != 0;
}

// Star-shaped polygon on an integer lattice; retried until simple.
inline Zone random_lattice_zone(Rng& rng) {
  while (true) {
    Zone z;
    z.label = ZoneLabel::urban;
    const int n = uniform_int(rng, 3, 9);
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) angles.push_back(uniform(rng, 0, 2 * std::numbers::pi));
    std::sort(angles.begin(), angles.end());
    for (double a : angles) {
      const double r = uniform(rng, 2, 10);
      z.vertices.push_back({std::round(r * std::sin(a)), std::round(r * std::cos(a))});
    }
    if (is_valid(z)) return z;
  }
}

// Points on a half-integer lattice around the zone: many fall exactly on
// vertices and edges.
inline Journey random_lattice_journey(Rng& rng, int n) {
  std::vector<PowerSweep> sweeps;
  for (int i = 0; i < n; ++i) {
    sweeps.push_back({static_cast<double>(i), {0.5 * uniform_int(rng, -24, 24), 0.5 * uniform_int(rng, -24, 24)}, {-90.0}});
  }
  return make_journey({470'000'000, 694'000'000}, 1, std::move(sweeps));
}

// Random valid journey exercising every field of the canonical document.
inline Journey random_valid_journey(Rng& rng) {
  static const char* kText[] = {"", "Venezuela", "M\xc3\xa9rida", "quote\"and\\slash", "tab\there", "line\nbreak", "Costa Rica"};
  Journey j;
  j.id = kText[uniform_int(rng, 0, 6)] + std::to_string(uniform_int(rng, 0, 99999));
  j.metadata = {kText[uniform_int(rng, 0, 6)], kText[uniform_int(rng, 0, 6)], kText[uniform_int(rng, 0, 6)],
                utc_date(uniform(rng, 0, 2e9))};
  j.device.kind = kAllDeviceKinds[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
  j.device.label = kText[uniform_int(rng, 0, 6)];
  if (uniform_int(rng, 0, 1)) j.device.sample_period_s = uniform(rng, 0.01, 10);
  j.band.start_hz = uniform_int(rng, 1, 1'000'000'000);
  j.band.stop_hz = j.band.start_hz + uniform_int(rng, 1, 500'000'000);
  j.bin_count = uniform_int(rng, 1, 40);
  const int n = uniform_int(rng, 0, 12);
  double t = uniform(rng, 0, 2e9);
  for (int i = 0; i < n; ++i) {
    t += uniform_int(rng, 0, 2) ? uniform(rng, 0, 5) : 0.0;
    PowerSweep s{t, {uniform(rng, -90, 90), uniform(rng, -180, 180)}, {}};
    for (std::int64_t b = 0; b < j.bin_count; ++b) s.powers.push_back(uniform(rng, -150, 30));
    j.sweeps.push_back(std::move(s));
  }
  return j;
}

// httplib server on an ephemeral loopback port for the lifetime of the object.
class ServerThread {
 public:
  template <typename Mount>
  explicit ServerThread(Mount&& mount) {
    mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ServerThread() {
    server_.stop();
    thread_.join();
  }
  ServerThread(const ServerThread&) = delete;
  ServerThread& operator=(const ServerThread&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace zebra::testing
