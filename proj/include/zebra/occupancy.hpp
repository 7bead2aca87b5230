#pragma once

// Channelization and occupancy assessment of journeys.
//
// A sweep's bins are mapped onto channels by bin centre; a channel's power in
// one sweep is the maximum over its member bins. Occupation of a channel is
// the fraction of sweeps whose channel power meets the threshold, and the
// white-space ratio is the fraction of channels occupied less than 20% of the
// time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/geo.hpp"
#include "zebra/journey_format.hpp"
#include "zebra/model.hpp"

namespace zebra {

inline constexpr double kWhitespaceOccupationCut = 0.20;

struct Channel {
  std::size_t index = 0;
  std::int64_t start_hz = 0;
  std::int64_t stop_hz = 0;

  bool operator==(const Channel&) const = default;
};

struct ChannelPlan {
  std::int64_t band_start_hz = 0;
  std::int64_t band_stop_hz = 0;
  std::int64_t channel_width_hz = 0;
  std::vector<Channel> channels;

  bool operator==(const ChannelPlan&) const = default;
};

inline ChannelPlan make_plan(std::int64_t band_start_hz, std::int64_t band_stop_hz,
                             std::int64_t channel_width_hz) {
  if (band_start_hz <= 0 || band_start_hz >= band_stop_hz) {
    throw PreconditionError("plan band must satisfy 0 < start < stop");
  }
  if (channel_width_hz <= 0) throw PreconditionError("channel width must be positive");
  const std::int64_t count = (band_stop_hz - band_start_hz) / channel_width_hz;
  if (count == 0) {
    throw DegenerateBandError("no full " + std::to_string(channel_width_hz) + " Hz channel fits in [" +
                              std::to_string(band_start_hz) + ", " + std::to_string(band_stop_hz) + ")");
  }
  ChannelPlan plan{band_start_hz, band_stop_hz, channel_width_hz, {}};
  plan.channels.reserve(static_cast<std::size_t>(count));
  for (std::int64_t c = 0; c < count; ++c) {
    const std::int64_t start = band_start_hz + c * channel_width_hz;
    plan.channels.push_back({static_cast<std::size_t>(c), start, start + channel_width_hz});
  }
  return plan;
}

// 470-694 MHz in 8 MHz channels.
inline ChannelPlan default_uhf_plan() { return make_plan(470'000'000, 694'000'000, 8'000'000); }

// Contiguous bin range [first, last) of each plan channel for one band layout.
struct BinLayout {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
};

inline BinLayout layout_bins(const Band& band, std::int64_t bin_count, const ChannelPlan& plan) {
  if (plan.channels.empty()) throw PreconditionError("plan has no channels");
  if (bin_count <= 0) throw PreconditionError("bin_count must be positive");
  if (plan.band_start_hz < band.start_hz || plan.channels.back().stop_hz > band.stop_hz) {
    throw PlanMismatchError("plan band [" + std::to_string(plan.band_start_hz) + ", " +
                            std::to_string(plan.channels.back().stop_hz) +
                            ") is not inside the journey band [" + std::to_string(band.start_hz) +
                            ", " + std::to_string(band.stop_hz) + ")");
  }
  // Centre of bin i is start + (2i + 1) * span / (2 * bin_count); compared
  // against channel edges in exact integer arithmetic.
  const __int128 span = band.stop_hz - band.start_hz;
  const __int128 twice_bins = 2 * static_cast<__int128>(bin_count);
  auto scaled_centre = [&](std::int64_t i) { return (2 * static_cast<__int128>(i) + 1) * span; };
  auto scaled_edge = [&](std::int64_t hz) { return twice_bins * (hz - band.start_hz); };

  BinLayout layout;
  layout.ranges.reserve(plan.channels.size());
  std::int64_t bin = 0;
  for (const Channel& ch : plan.channels) {
    while (bin < bin_count && scaled_centre(bin) < scaled_edge(ch.start_hz)) ++bin;
    const std::int64_t first = bin;
    while (bin < bin_count && scaled_centre(bin) < scaled_edge(ch.stop_hz)) ++bin;
    if (bin == first) throw EmptyChannelError(ch.index);
    layout.ranges.emplace_back(static_cast<std::size_t>(first), static_cast<std::size_t>(bin));
  }
  return layout;
}

inline std::vector<double> channel_power(const PowerSweep& sweep, const BinLayout& layout) {
  std::vector<double> out;
  out.reserve(layout.ranges.size());
  for (auto [first, last] : layout.ranges) {
    if (last > sweep.powers.size()) throw PreconditionError("sweep has fewer powers than the bin layout");
    out.push_back(*std::max_element(sweep.powers.begin() + static_cast<std::ptrdiff_t>(first),
                                    sweep.powers.begin() + static_cast<std::ptrdiff_t>(last)));
  }
  return out;
}

inline std::vector<double> channel_power(const PowerSweep& sweep, const Band& band,
                                         std::int64_t bin_count, const ChannelPlan& plan) {
  return channel_power(sweep, layout_bins(band, bin_count, plan));
}

// Row-major sweeps x channels matrix of channel powers.
struct ChannelPowers {
  std::size_t sweeps = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  double at(std::size_t sweep, std::size_t channel) const { return values[sweep * channels + channel]; }
};

inline ChannelPowers channel_powers(const Journey& j, const ChannelPlan& plan) {
  if (j.sweeps.empty()) throw EmptyJourneyError();
  const BinLayout layout = layout_bins(j.band, j.bin_count, plan);
  ChannelPowers m{j.sweeps.size(), plan.channels.size(), {}};
  m.values.reserve(m.sweeps * m.channels);
  for (const auto& s : j.sweeps) {
    for (auto [first, last] : layout.ranges) {
      if (last > s.powers.size()) throw PreconditionError("sweep has fewer powers than bin_count");
      double best = s.powers[first];
      for (std::size_t k = first + 1; k < last; ++k) best = std::max(best, s.powers[k]);
      m.values.push_back(best);
    }
  }
  return m;
}

inline std::vector<double> occupation(const ChannelPowers& m, double threshold_dbm) {
  std::vector<std::size_t> hits(m.channels, 0);
  for (std::size_t s = 0; s < m.sweeps; ++s) {
    for (std::size_t c = 0; c < m.channels; ++c) {
      if (m.at(s, c) >= threshold_dbm) ++hits[c];
    }
  }
  std::vector<double> out(m.channels);
  for (std::size_t c = 0; c < m.channels; ++c) {
    out[c] = static_cast<double>(hits[c]) / static_cast<double>(m.sweeps);
  }
  return out;
}

inline std::vector<double> occupation(const Journey& j, const ChannelPlan& plan, double threshold_dbm) {
  return occupation(channel_powers(j, plan), threshold_dbm);
}

// Largest threshold at which some channel is still occupied in every sweep.
inline double auto_threshold(const ChannelPowers& m) {
  if (m.sweeps == 0) throw EmptyJourneyError();
  double best = -INFINITY;
  for (std::size_t c = 0; c < m.channels; ++c) {
    double floor_power = INFINITY;
    for (std::size_t s = 0; s < m.sweeps; ++s) floor_power = std::min(floor_power, m.at(s, c));
    best = std::max(best, floor_power);
  }
  return best;
}

inline double auto_threshold(const Journey& j, const ChannelPlan& plan) {
  return auto_threshold(channel_powers(j, plan));
}

inline double whitespace_ratio(std::span<const double> occupation_per_channel) {
  if (occupation_per_channel.empty()) return 0.0;
  const auto idle = std::count_if(occupation_per_channel.begin(), occupation_per_channel.end(),
                                  [](double o) { return o < kWhitespaceOccupationCut; });
  return static_cast<double>(idle) / static_cast<double>(occupation_per_channel.size());
}

inline double whitespace_ratio(const Journey& j, const ChannelPlan& plan, double threshold_dbm) {
  return whitespace_ratio(occupation(j, plan, threshold_dbm));
}

struct OccupationReport {
  ChannelPlan plan;
  double threshold_dbm = 0.0;
  std::vector<double> occupation;
  double whitespace_ratio = 0.0;
  std::size_t sweep_count = 0;

  bool operator==(const OccupationReport&) const = default;
};

inline OccupationReport make_report(const ChannelPowers& m, const ChannelPlan& plan, double threshold_dbm) {
  OccupationReport r;
  r.plan = plan;
  r.threshold_dbm = threshold_dbm;
  r.occupation = occupation(m, threshold_dbm);
  r.whitespace_ratio = whitespace_ratio(r.occupation);
  r.sweep_count = m.sweeps;
  return r;
}

// Report at `threshold_dbm`, or at the automatic threshold when none is given.
inline OccupationReport occupation_report(const Journey& j, const ChannelPlan& plan,
                                          std::optional<double> threshold_dbm = std::nullopt) {
  const ChannelPowers m = channel_powers(j, plan);
  return make_report(m, plan, threshold_dbm ? *threshold_dbm : auto_threshold(m));
}

inline std::vector<OccupationReport> occupation_curve(const Journey& j, const ChannelPlan& plan,
                                                      std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i])) throw PreconditionError("thresholds must be finite");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw PreconditionError("thresholds must be strictly increasing");
    }
  }
  const ChannelPowers m = channel_powers(j, plan);
  std::vector<OccupationReport> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) out.push_back(make_report(m, plan, t));
  return out;
}

// Equirectangular grid anchored at a south-west corner. Rows grow north,
// columns grow east; the east-west scale is taken at `reference_lat`.
struct GridFrame {
  GeoPoint origin;
  double reference_lat = 0.0;
  double cell_size_m = 1.0;

  double meters_per_deg_lon() const {
    return kMetersPerDegree * std::max(std::cos(deg_to_rad(reference_lat)), 1e-12);
  }

  std::pair<std::int64_t, std::int64_t> cell_of(const GeoPoint& p) const {
    const double north = (p.lat - origin.lat) * kMetersPerDegree;
    const double east = (p.lon - origin.lon) * meters_per_deg_lon();
    return {static_cast<std::int64_t>(std::floor(north / cell_size_m)),
            static_cast<std::int64_t>(std::floor(east / cell_size_m))};
  }

  // {south-west, north-east} corners of a cell.
  std::pair<GeoPoint, GeoPoint> cell_corners(std::int64_t row, std::int64_t col) const {
    const double dlat = cell_size_m / kMetersPerDegree;
    const double dlon = cell_size_m / meters_per_deg_lon();
    const GeoPoint sw{origin.lat + static_cast<double>(row) * dlat, origin.lon + static_cast<double>(col) * dlon};
    const GeoPoint ne{origin.lat + static_cast<double>(row + 1) * dlat,
                      origin.lon + static_cast<double>(col + 1) * dlon};
    return {sw, ne};
  }

  bool operator==(const GridFrame&) const = default;
};

// Frame over a point set: origin at the minimum lat/lon, scale at the mean
// latitude. The mean sums sorted values so it does not depend on input order.
inline GridFrame make_grid_frame(std::span<const GeoPoint> points, double cell_size_m) {
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) {
    throw PreconditionError("cell size must be positive");
  }
  if (points.empty()) throw EmptyJourneyError();
  std::vector<double> lats;
  lats.reserve(points.size());
  GridFrame f;
  f.cell_size_m = cell_size_m;
  f.origin = points.front();
  for (const auto& p : points) {
    f.origin.lat = std::min(f.origin.lat, p.lat);
    f.origin.lon = std::min(f.origin.lon, p.lon);
    lats.push_back(p.lat);
  }
  std::sort(lats.begin(), lats.end());
  double sum = 0.0;
  for (double v : lats) sum += v;
  f.reference_lat = sum / static_cast<double>(lats.size());
  return f;
}

struct HeatmapCell {
  std::int64_t row = 0;
  std::int64_t col = 0;
  double value_dbm = 0.0;
  std::size_t sample_count = 0;

  bool operator==(const HeatmapCell&) const = default;
};

struct HeatmapGrid {
  GridFrame frame;
  std::optional<std::size_t> channel;  // nullopt: whole band
  std::vector<HeatmapCell> cells;      // sorted by (row, col)

  bool operator==(const HeatmapGrid&) const = default;
};

inline HeatmapGrid heatmap(const Journey& j, const ChannelPlan& plan, std::optional<std::size_t> channel,
                           double cell_size_m) {
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) {
    throw PreconditionError("cell size must be positive");
  }
  if (channel && *channel >= plan.channels.size()) {
    throw PreconditionError("channel index " + std::to_string(*channel) + " outside the plan");
  }
  if (j.sweeps.empty()) throw EmptyJourneyError();

  std::vector<GeoPoint> points;
  points.reserve(j.sweeps.size());
  for (const auto& s : j.sweeps) points.push_back(s.location);

  HeatmapGrid grid;
  grid.frame = make_grid_frame(points, cell_size_m);
  grid.channel = channel;

  const ChannelPowers m = channel_powers(j, plan);
  for (std::size_t s = 0; s < m.sweeps; ++s) {
    double value = -INFINITY;
    if (channel) {
      value = m.at(s, *channel);
    } else {
      for (std::size_t c = 0; c < m.channels; ++c) value = std::max(value, m.at(s, c));
    }
    auto [row, col] = grid.frame.cell_of(points[s]);
    grid.cells.push_back({row, col, value, 1});
  }

  std::sort(grid.cells.begin(), grid.cells.end(), [](const HeatmapCell& a, const HeatmapCell& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<HeatmapCell> merged;
  for (const auto& c : grid.cells) {
    if (!merged.empty() && merged.back().row == c.row && merged.back().col == c.col) {
      merged.back().value_dbm = std::max(merged.back().value_dbm, c.value_dbm);
      ++merged.back().sample_count;
    } else {
      merged.push_back(c);
    }
  }
  grid.cells = std::move(merged);
  return grid;
}

// --- documents -------------------------------------------------------------

inline nlohmann::ordered_json to_json(const ChannelPlan& plan) {
  nlohmann::ordered_json channels = nlohmann::ordered_json::array();
  for (const auto& c : plan.channels) {
    channels.push_back({{"index", c.index}, {"start_hz", c.start_hz}, {"stop_hz", c.stop_hz}});
  }
  return {{"band_start_hz", plan.band_start_hz},
          {"band_stop_hz", plan.band_stop_hz},
          {"channel_width_hz", plan.channel_width_hz},
          {"channels", std::move(channels)}};
}

// Rebuilds the plan from its band and width and checks the channel list agrees.
inline ChannelPlan plan_from_json(const nlohmann::json& doc) {
  try {
    ChannelPlan plan = make_plan(doc.at("band_start_hz").get<std::int64_t>(),
                                 doc.at("band_stop_hz").get<std::int64_t>(),
                                 doc.at("channel_width_hz").get<std::int64_t>());
    if (doc.contains("channels")) {
      const auto& chans = doc.at("channels");
      if (!chans.is_array() || chans.size() != plan.channels.size()) {
        throw SchemaError("plan channel list does not match band and width");
      }
      for (std::size_t i = 0; i < chans.size(); ++i) {
        const Channel c{chans[i].at("index").get<std::size_t>(), chans[i].at("start_hz").get<std::int64_t>(),
                        chans[i].at("stop_hz").get<std::int64_t>()};
        if (!(c == plan.channels[i])) throw SchemaError("plan channel " + std::to_string(i) + " is inconsistent");
      }
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed plan: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const OccupationReport& r) {
  return {{"plan", to_json(r.plan)},
          {"threshold_dbm", r.threshold_dbm},
          {"occupation", r.occupation},
          {"whitespace_ratio", r.whitespace_ratio},
          {"sweep_count", r.sweep_count}};
}

inline std::string serialize_report(const OccupationReport& r) { return to_json(r).dump(); }

inline std::string serialize_curve(std::span<const OccupationReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr.dump();
}

inline nlohmann::ordered_json to_json(const HeatmapGrid& g) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : g.cells) {
    auto [sw, ne] = g.frame.cell_corners(c.row, c.col);
    cells.push_back({{"row", c.row},
                     {"col", c.col},
                     {"value_dbm", c.value_dbm},
                     {"sample_count", c.sample_count},
                     {"south", sw.lat},
                     {"west", sw.lon},
                     {"north", ne.lat},
                     {"east", ne.lon}});
  }
  nlohmann::ordered_json channel = nullptr;
  if (g.channel) channel = *g.channel;
  return {{"origin", {{"lat", g.frame.origin.lat}, {"lon", g.frame.origin.lon}}},
          {"reference_lat", g.frame.reference_lat},
          {"cell_size_m", g.frame.cell_size_m},
          {"channel", channel},
          {"cells", std::move(cells)}};
}

inline std::string serialize_heatmap(const HeatmapGrid& g) { return to_json(g).dump(); }

// One-line text digest of a report: ratio to three decimals plus threshold.
inline std::string format_whitespace_summary(const OccupationReport& r) {
  const auto idle = std::count_if(r.occupation.begin(), r.occupation.end(),
                                  [](double o) { return o < kWhitespaceOccupationCut; });
  char buf[160];
  std::snprintf(buf, sizeof buf, "whitespace_ratio=%.3f threshold_dbm=%s idle_channels=%zu/%zu\n",
                r.whitespace_ratio, format_number(r.threshold_dbm).c_str(), static_cast<std::size_t>(idle),
                r.occupation.size());
  return buf;
}

}  // namespace zebra
