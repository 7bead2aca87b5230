#pragma once

// Line-oriented raw capture formats of the supported low-cost sweepers.
//
//   #ZRFO-RFE,1[,<start_hz>,<stop_hz>,<bin_count>]   rfexplorer / whisppi
//   #ZRFO-A32,1[,<start_hz>,<stop_hz>,32]            ascii32
//   #ZRFO-AND,1[,<start_hz>,<stop_hz>,<bin_count>]   android-rfe
//   <unix_time>,<lat>,<lon>,<p0>;<p1>;...;<pN-1>     one record per line
//
// Header fields left out (or empty) are taken from the capture hint.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "zebra/error.hpp"
#include "zebra/model.hpp"

namespace zebra {

struct CaptureHint {
  std::optional<Band> band;
  std::optional<std::int64_t> bin_count;
};

struct RawCapture {
  DeviceKind device_kind = DeviceKind::generic;
  std::string payload;
  CaptureHint hint;
};

struct TrackPoint {
  double timestamp = 0.0;
  GeoPoint location;
};

namespace detail {

struct FormatSignature {
  std::string_view tag;
  DeviceKind kind;
};

inline constexpr FormatSignature kSignatures[] = {
    {"#ZRFO-RFE", DeviceKind::rfexplorer},
    {"#ZRFO-A32", DeviceKind::ascii32},
    {"#ZRFO-AND", DeviceKind::android_rfe},
};

inline std::string_view tag_for(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::rfexplorer:
    case DeviceKind::whisppi: return "#ZRFO-RFE";
    case DeviceKind::ascii32: return "#ZRFO-A32";
    case DeviceKind::android_rfe: return "#ZRFO-AND";
    case DeviceKind::generic: break;
  }
  return {};
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

// Non-blank lines, trimmed, with their 1-based line numbers.
inline std::vector<Line> content_lines(std::string_view payload) {
  std::vector<Line> out;
  std::size_t number = 0;
  for (std::string_view raw : split(payload, '\n')) {
    ++number;
    const auto t = trim(raw);
    if (!t.empty()) out.push_back({number, t});
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// The tag of a header line when it carries a known signature with version 1.
inline std::optional<DeviceKind> signature_kind(std::string_view line) {
  for (const auto& sig : kSignatures) {
    if (line.substr(0, sig.tag.size()) != sig.tag) continue;
    const auto rest = line.substr(sig.tag.size());
    if (rest == ",1" || rest.substr(0, 3) == ",1,") return sig.kind;
  }
  return std::nullopt;
}

}  // namespace detail

// Kind named by the first non-blank line's signature, nullopt when none matches.
inline std::optional<DeviceKind> detect_format(std::string_view payload) {
  const auto lines = detail::content_lines(payload);
  if (lines.empty()) return std::nullopt;
  return detail::signature_kind(lines.front().text);
}

inline Journey parse_raw(const RawCapture& capture) {
  const std::string_view expected_tag = detail::tag_for(capture.device_kind);
  if (expected_tag.empty()) {
    throw FormatError(0, "no raw adapter for device kind " + std::string(to_string(capture.device_kind)));
  }
  if (capture.payload.empty()) throw FormatError(0, "empty payload");

  const auto lines = detail::content_lines(capture.payload);
  if (lines.empty()) throw FormatError(0, "payload has no content");

  const auto& header = lines.front();
  const auto fields = detail::split(header.text, ',');
  if (fields[0] != expected_tag) {
    throw FormatError(header.number, "expected header tag " + std::string(expected_tag));
  }
  if (fields.size() < 2 || detail::trim(fields[1]) != "1") {
    throw FormatError(header.number, "unsupported format version");
  }
  if (fields.size() != 2 && fields.size() != 5) {
    throw FormatError(header.number, "header must have 2 or 5 fields");
  }

  std::optional<Band> band = capture.hint.band;
  std::optional<std::int64_t> bin_count = capture.hint.bin_count;
  if (fields.size() == 5) {
    const bool band_given = !detail::trim(fields[2]).empty() || !detail::trim(fields[3]).empty();
    if (band_given) {
      auto start = detail::to_int(fields[2]);
      auto stop = detail::to_int(fields[3]);
      if (!start || !stop) throw FormatError(header.number, "band edges must be integers in Hz");
      band = Band{*start, *stop};
    }
    if (!detail::trim(fields[4]).empty()) {
      auto bins = detail::to_int(fields[4]);
      if (!bins || *bins <= 0) throw FormatError(header.number, "bin count must be a positive integer");
      bin_count = *bins;
    }
  }
  if (capture.device_kind == DeviceKind::ascii32) {
    if (bin_count && *bin_count != 32) throw FormatError(header.number, "ascii32 captures have 32 bins");
    bin_count = 32;
  }
  if (!band) throw FormatError(header.number, "band missing from header and hint");

  Journey j;
  j.device.kind = capture.device_kind;
  j.device.label = std::string(to_string(capture.device_kind));
  j.band = *band;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto cols = detail::split(line.text, ',');
    if (cols.size() != 4) throw FormatError(line.number, "expected 4 comma-separated fields");
    auto t = detail::to_double(cols[0]);
    if (!t) throw FormatError(line.number, "bad timestamp");
    auto lat = detail::to_double(cols[1]);
    if (!lat) throw FormatError(line.number, "bad latitude");
    auto lon = detail::to_double(cols[2]);
    if (!lon) throw FormatError(line.number, "bad longitude");

    PowerSweep s{*t, {*lat, *lon}, {}};
    for (std::string_view tok : detail::split(cols[3], ';')) {
      auto p = detail::to_double(tok);
      if (!p) throw FormatError(line.number, "bad power value '" + std::string(detail::trim(tok)) + "'");
      s.powers.push_back(*p);
    }

    const auto n = static_cast<std::int64_t>(s.powers.size());
    if (!bin_count) bin_count = n;
    if (n != *bin_count) {
      throw InconsistencyError(line.number, std::to_string(n) + " bins, expected " +
                                                std::to_string(*bin_count));
    }
    j.sweeps.push_back(std::move(s));
  }

  if (!bin_count) throw FormatError(header.number, "bin count missing from header, hint and records");
  j.bin_count = *bin_count;
  if (!j.sweeps.empty()) j.metadata.collected_utc = utc_date(j.sweeps.front().timestamp);

  if (auto v = validate_journey(j); !v.empty()) throw ValidationError(std::move(v));
  return j;
}

// Lines `<unix_time>,<lat>,<lon>`.
inline std::vector<TrackPoint> parse_track(std::string_view text) {
  std::vector<TrackPoint> out;
  for (const auto& line : detail::content_lines(text)) {
    const auto cols = detail::split(line.text, ',');
    if (cols.size() != 3) throw FormatError(line.number, "expected <unix_time>,<lat>,<lon>");
    auto t = detail::to_double(cols[0]);
    auto lat = detail::to_double(cols[1]);
    auto lon = detail::to_double(cols[2]);
    if (!t || !lat || !lon) throw FormatError(line.number, "non-numeric track field");
    out.push_back({*t, {*lat, *lon}});
  }
  return out;
}

// Replaces each sweep location by per-coordinate linear interpolation on the track.
inline Journey merge_location_track(const Journey& j, std::span<const TrackPoint> track) {
  if (track.empty()) {
    if (j.sweeps.empty()) return j;
    throw OutOfRangeError(0, "sweep 0 lies outside an empty track");
  }
  for (std::size_t i = 1; i < track.size(); ++i) {
    if (!(track[i].timestamp > track[i - 1].timestamp)) {
      throw PreconditionError("track timestamps must be strictly increasing (index " +
                              std::to_string(i) + ")");
    }
  }

  Journey out = j;
  for (std::size_t i = 0; i < out.sweeps.size(); ++i) {
    auto& s = out.sweeps[i];
    const double t = s.timestamp;
    if (t < track.front().timestamp || t > track.back().timestamp) {
      throw OutOfRangeError(i, "sweep " + std::to_string(i) + " at t=" + std::to_string(t) +
                                   " lies outside the track's time span");
    }
    auto hi = std::lower_bound(track.begin(), track.end(), t,
                               [](const TrackPoint& p, double v) { return p.timestamp < v; });
    if (hi->timestamp == t) {
      s.location = hi->location;
      continue;
    }
    auto lo = hi - 1;
    const double f = (t - lo->timestamp) / (hi->timestamp - lo->timestamp);
    s.location.lat = lo->location.lat + f * (hi->location.lat - lo->location.lat);
    s.location.lon = lo->location.lon + f * (hi->location.lon - lo->location.lon);
  }
  return out;
}

}  // namespace zebra
