#pragma once

// Regional summaries exchanged with the regulator tier, the regulator's
// validation rules against its incumbent registry, and cross-border overlap
// detection between two regions' summaries.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/geo.hpp"
#include "zebra/ingest.hpp"
#include "zebra/model.hpp"
#include "zebra/occupancy.hpp"

namespace zebra {

class EmptyInputError : public Error {
 public:
  EmptyInputError() : Error("empty-input", "no non-empty journey to summarize") {}
};

struct SummaryCell {
  std::int64_t row = 0;
  std::int64_t col = 0;
  std::vector<double> occupation;  // per channel
  std::size_t sample_count = 0;

  bool operator==(const SummaryCell&) const = default;
};

struct RegionSummary {
  std::string region_id;
  double generated_utc = 0.0;
  ChannelPlan plan;
  GridFrame frame;  // carries cell_size_m
  double threshold_dbm = 0.0;
  std::vector<SummaryCell> cells;  // sorted by (row, col)
  std::size_t journey_count = 0;

  bool operator==(const RegionSummary&) const = default;
};

struct IncumbentRecord {
  std::size_t channel = 0;
  BoundingBox area;
  std::string licence_id;

  bool operator==(const IncumbentRecord&) const = default;
};

enum class FlagKind { unaccounted_transmitter, candidate_whitespace };

inline std::string_view to_string(FlagKind k) {
  return k == FlagKind::unaccounted_transmitter ? "unaccounted_transmitter" : "candidate_whitespace";
}

struct ValidationFlag {
  std::int64_t row = 0;
  std::int64_t col = 0;
  std::size_t channel = 0;
  FlagKind kind = FlagKind::unaccounted_transmitter;
  double evidence = 0.0;  // the cell's occupation on that channel

  bool operator==(const ValidationFlag&) const = default;
};

struct ValidationReport {
  std::string region_id;
  std::vector<ValidationFlag> flags;

  bool operator==(const ValidationReport&) const = default;
};

struct OverlapConflict {
  BoundingBox extent;  // intersection of the two cells
  std::size_t channel = 0;

  bool operator==(const OverlapConflict&) const = default;
  auto key() const { return std::tie(extent.min_lat, extent.min_lon, extent.max_lat, extent.max_lon, channel); }
  bool operator<(const OverlapConflict& o) const { return key() < o.key(); }
};

// Pools every sweep onto one grid and reports per-cell occupation at the
// pooled automatic threshold.
inline RegionSummary summarize_region(std::span<const Journey> journeys, const ChannelPlan& plan,
                                      double cell_size_m, std::string region_id = {},
                                      double generated_utc = 0.0) {
  std::vector<GeoPoint> points;
  std::vector<double> powers;  // row-major, one row per pooled sweep
  for (const auto& j : journeys) {
    if (j.sweeps.empty()) continue;
    const ChannelPowers m = channel_powers(j, plan);
    powers.insert(powers.end(), m.values.begin(), m.values.end());
    for (const auto& s : j.sweeps) points.push_back(s.location);
  }
  if (points.empty()) throw EmptyInputError();

  const ChannelPowers pooled{points.size(), plan.channels.size(), std::move(powers)};
  RegionSummary out;
  out.region_id = std::move(region_id);
  out.generated_utc = generated_utc;
  out.plan = plan;
  out.frame = make_grid_frame(points, cell_size_m);
  out.threshold_dbm = auto_threshold(pooled);
  out.journey_count = journeys.size();

  struct Acc {
    std::vector<std::size_t> hits;
    std::size_t count = 0;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, Acc> acc;
  for (std::size_t s = 0; s < pooled.sweeps; ++s) {
    Acc& a = acc[out.frame.cell_of(points[s])];
    if (a.hits.empty()) a.hits.assign(pooled.channels, 0);
    ++a.count;
    for (std::size_t c = 0; c < pooled.channels; ++c) {
      if (pooled.at(s, c) >= out.threshold_dbm) ++a.hits[c];
    }
  }
  for (const auto& [rc, a] : acc) {
    SummaryCell cell{rc.first, rc.second, std::vector<double>(pooled.channels), a.count};
    for (std::size_t c = 0; c < pooled.channels; ++c) {
      cell.occupation[c] = static_cast<double>(a.hits[c]) / static_cast<double>(a.count);
    }
    out.cells.push_back(std::move(cell));
  }
  return out;
}

inline BoundingBox cell_extent(const GridFrame& frame, std::int64_t row, std::int64_t col) {
  auto [sw, ne] = frame.cell_corners(row, col);
  return {sw.lat, sw.lon, ne.lat, ne.lon};
}

inline GeoPoint cell_centre(const GridFrame& frame, std::int64_t row, std::int64_t col) {
  auto [sw, ne] = frame.cell_corners(row, col);
  return {(sw.lat + ne.lat) / 2.0, (sw.lon + ne.lon) / 2.0};
}

// Busy cells no incumbent covers are unaccounted transmitters; idle cells an
// incumbent covers are candidate white space. An incumbent covers a cell when
// its area contains the cell centre.
inline ValidationReport validate_summary(const RegionSummary& summary, std::span<const IncumbentRecord> registry) {
  const std::size_t channels = summary.plan.channels.size();
  for (const auto& rec : registry) {
    if (rec.channel >= channels) {
      throw PlanMismatchError("registry channel " + std::to_string(rec.channel) + " outside a " +
                              std::to_string(channels) + "-channel plan");
    }
  }
  ValidationReport report{summary.region_id, {}};
  for (const auto& cell : summary.cells) {
    if (cell.occupation.size() != channels) {
      throw PlanMismatchError("cell occupation vector does not match the plan");
    }
    const GeoPoint centre = cell_centre(summary.frame, cell.row, cell.col);
    for (std::size_t c = 0; c < channels; ++c) {
      const bool busy = cell.occupation[c] >= kWhitespaceOccupationCut;
      const bool covered = std::any_of(registry.begin(), registry.end(), [&](const IncumbentRecord& r) {
        return r.channel == c && r.area.contains(centre);
      });
      if (busy && !covered) {
        report.flags.push_back({cell.row, cell.col, c, FlagKind::unaccounted_transmitter, cell.occupation[c]});
      } else if (!busy && covered) {
        report.flags.push_back({cell.row, cell.col, c, FlagKind::candidate_whitespace, cell.occupation[c]});
      }
    }
  }
  return report;
}

// Channels both regions report busy (occupation >= 0.20) in cells whose
// geographic extents overlap with positive area.
inline std::vector<OverlapConflict> detect_overlap(const RegionSummary& a, const RegionSummary& b) {
  if (!(a.plan == b.plan)) throw PlanMismatchError("summaries use different channel plans");
  if (a.frame.cell_size_m != b.frame.cell_size_m) throw PlanMismatchError("summaries use different cell sizes");

  std::vector<OverlapConflict> out;
  for (const auto& ca : a.cells) {
    const BoundingBox ea = cell_extent(a.frame, ca.row, ca.col);
    for (const auto& cb : b.cells) {
      const BoundingBox eb = cell_extent(b.frame, cb.row, cb.col);
      const BoundingBox x{std::max(ea.min_lat, eb.min_lat), std::max(ea.min_lon, eb.min_lon),
                          std::min(ea.max_lat, eb.max_lat), std::min(ea.max_lon, eb.max_lon)};
      if (!(x.min_lat < x.max_lat && x.min_lon < x.max_lon)) continue;
      for (std::size_t c = 0; c < a.plan.channels.size(); ++c) {
        if (ca.occupation[c] >= kWhitespaceOccupationCut && cb.occupation[c] >= kWhitespaceOccupationCut) {
          out.push_back({x, c});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- documents -------------------------------------------------------------

inline nlohmann::ordered_json to_json(const RegionSummary& s) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : s.cells) {
    cells.push_back({{"row", c.row}, {"col", c.col}, {"occupation", c.occupation}, {"sample_count", c.sample_count}});
  }
  return {{"region_id", s.region_id},
          {"generated_utc", s.generated_utc},
          {"plan", to_json(s.plan)},
          {"cell_size_m", s.frame.cell_size_m},
          {"origin", {{"lat", s.frame.origin.lat}, {"lon", s.frame.origin.lon}}},
          {"reference_lat", s.frame.reference_lat},
          {"threshold_dbm", s.threshold_dbm},
          {"journey_count", s.journey_count},
          {"cells", std::move(cells)}};
}

inline std::string serialize_summary(const RegionSummary& s) { return to_json(s).dump(); }

inline RegionSummary parse_summary(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    RegionSummary s;
    s.region_id = doc.at("region_id").get<std::string>();
    s.generated_utc = doc.at("generated_utc").get<double>();
    s.plan = plan_from_json(doc.at("plan"));
    s.frame.cell_size_m = doc.at("cell_size_m").get<double>();
    s.frame.origin = {doc.at("origin").at("lat").get<double>(), doc.at("origin").at("lon").get<double>()};
    s.frame.reference_lat = doc.at("reference_lat").get<double>();
    s.threshold_dbm = doc.at("threshold_dbm").get<double>();
    s.journey_count = doc.at("journey_count").get<std::size_t>();
    if (!(s.frame.cell_size_m > 0.0)) throw SchemaError("cell_size_m must be positive");
    for (const auto& c : doc.at("cells")) {
      SummaryCell cell{c.at("row").get<std::int64_t>(), c.at("col").get<std::int64_t>(),
                       c.at("occupation").get<std::vector<double>>(), c.at("sample_count").get<std::size_t>()};
      if (cell.sample_count < 1) throw SchemaError("cell sample_count must be at least 1");
      if (cell.occupation.size() != s.plan.channels.size()) {
        throw SchemaError("cell occupation length does not match the plan");
      }
      for (double o : cell.occupation) {
        if (!(o >= 0.0 && o <= 1.0)) throw SchemaError("occupation fractions must lie in [0, 1]");
      }
      s.cells.push_back(std::move(cell));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed region summary: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  for (const auto& f : r.flags) {
    flags.push_back({{"row", f.row},
                     {"col", f.col},
                     {"channel", f.channel},
                     {"kind", to_string(f.kind)},
                     {"evidence", f.evidence}});
  }
  return {{"region_id", r.region_id}, {"flags", std::move(flags)}};
}

inline std::string serialize_validation(const ValidationReport& r) { return to_json(r).dump(); }

inline ValidationReport parse_validation(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    ValidationReport r;
    r.region_id = doc.at("region_id").get<std::string>();
    for (const auto& f : doc.at("flags")) {
      const auto kind = f.at("kind").get<std::string>();
      FlagKind k;
      if (kind == "unaccounted_transmitter") {
        k = FlagKind::unaccounted_transmitter;
      } else if (kind == "candidate_whitespace") {
        k = FlagKind::candidate_whitespace;
      } else {
        throw SchemaError("unknown flag kind " + kind);
      }
      r.flags.push_back({f.at("row").get<std::int64_t>(), f.at("col").get<std::int64_t>(),
                         f.at("channel").get<std::size_t>(), k, f.at("evidence").get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed validation report: ") + e.what());
  }
}

// Registry lines `channel,min_lat,min_lon,max_lat,max_lon,licence_id`; blank
// lines and lines starting with '#' are skipped.
inline std::vector<IncumbentRecord> parse_registry(std::string_view text) {
  std::vector<IncumbentRecord> out;
  for (const auto& line : detail::content_lines(text)) {
    if (line.text.front() == '#') continue;
    const auto cols = detail::split(line.text, ',');
    if (cols.size() != 6) throw FormatError(line.number, "expected 6 comma-separated fields");
    auto channel = detail::to_int(cols[0]);
    auto min_lat = detail::to_double(cols[1]);
    auto min_lon = detail::to_double(cols[2]);
    auto max_lat = detail::to_double(cols[3]);
    auto max_lon = detail::to_double(cols[4]);
    if (!channel || *channel < 0) throw FormatError(line.number, "bad channel index");
    if (!min_lat || !min_lon || !max_lat || !max_lon) throw FormatError(line.number, "bad coordinate");
    IncumbentRecord rec{static_cast<std::size_t>(*channel), {*min_lat, *min_lon, *max_lat, *max_lon},
                        std::string(detail::trim(cols[5]))};
    if (!rec.area.well_ordered()) throw FormatError(line.number, "bounding box is not well ordered");
    if (rec.licence_id.empty()) throw FormatError(line.number, "empty licence id");
    out.push_back(std::move(rec));
  }
  return out;
}

inline nlohmann::ordered_json to_json(std::span<const IncumbentRecord> registry) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : registry) {
    arr.push_back({{"channel", r.channel},
                   {"min_lat", r.area.min_lat},
                   {"min_lon", r.area.min_lon},
                   {"max_lat", r.area.max_lat},
                   {"max_lon", r.area.max_lon},
                   {"licence_id", r.licence_id}});
  }
  return arr;
}

}  // namespace zebra
