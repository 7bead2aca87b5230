// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 when
// any criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace {

using namespace zebra;
using testing::Rng;

using Seconds = std::chrono::duration<double>;

struct Outcome {
  enum Kind { pass, fail, skip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::skip, std::move(d)}; }

template <typename Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return Seconds(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome occupancy_oracle() {
  constexpr int kCases = 2000;
  Rng rng(20160615);
  int mismatches = 0;
  std::string first;
  const double secs = timed([&] {
    for (int i = 0; i < kCases; ++i) {
      const auto c = testing::random_occupancy_case(rng);
      const auto cp = testing::oracle_channel_powers(c.journey, c.plan);
      if (!cp) {
        ++mismatches;
        if (first.empty()) first = "generator produced an empty channel at case " + std::to_string(i);
        continue;
      }
      const ChannelPowers m = channel_powers(c.journey, c.plan);
      const double expected_t = testing::oracle_auto_threshold(*cp);
      bool ok = auto_threshold(m) == expected_t;

      std::vector<double> probes{expected_t, -200.0, 100.0};
      for (const auto& row : *cp) probes.insert(probes.end(), row.begin(), row.end());
      for (double t : probes) {
        const auto occ = testing::oracle_occupation(*cp, t);
        ok = ok && occupation(c.journey, c.plan, t) == occ;
        ok = ok && whitespace_ratio(c.journey, c.plan, t) == testing::oracle_whitespace(occ);
      }
      const auto report = occupation_report(c.journey, c.plan, std::nullopt);
      ok = ok && report.threshold_dbm == expected_t &&
           report.whitespace_ratio == testing::oracle_whitespace(testing::oracle_occupation(*cp, expected_t));
      if (!ok) {
        ++mismatches;
        if (first.empty()) first = "first mismatch at case " + std::to_string(i);
      }
    }
  });
  const std::string detail =
      std::to_string(kCases) + " journeys, " + std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s";
  if (mismatches > 0) return fail(detail + "; " + first);
  if (secs >= 10.0) return fail(detail + " (limit 10 s)");
  return pass(detail);
}

Outcome auto_threshold_property() {
  constexpr int kCases = 2000;
  Rng rng(20160615);
  int violations = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto c = testing::random_occupancy_case(rng);
    const double t = auto_threshold(c.journey, c.plan);
    const auto at = occupation(c.journey, c.plan, t);
    const auto above = occupation(c.journey, c.plan, t + 0.1);
    const bool some_full = std::count(at.begin(), at.end(), 1.0) > 0;
    const bool none_full = std::count(above.begin(), above.end(), 1.0) == 0;
    if (!some_full || !none_full) ++violations;
  }
  const std::string detail = std::to_string(kCases) + " journeys, " + std::to_string(violations) + " violations";
  return violations == 0 ? pass(detail) : fail(detail);
}

Outcome condensation() {
  constexpr int kCases = 1500;
  Rng rng(8598);
  int separation = 0, partition = 0, stability = 0, aggregation = 0;
  for (int i = 0; i < kCases; ++i) {
    const Journey j = testing::random_geo_journey(rng, 80, 6, testing::uniform(rng, 0.0005, 0.02));
    const double r = testing::uniform(rng, 10, 600);
    const Journey out = condense(j, {r, Aggregation::max});

    for (std::size_t a = 0; a < out.sweeps.size(); ++a) {
      for (std::size_t b = a + 1; b < out.sweeps.size(); ++b) {
        if (!(haversine_m(out.sweeps[a].location, out.sweeps[b].location) > r)) {
          ++separation;
          a = out.sweeps.size();
          break;
        }
      }
    }

    const auto buckets = testing::oracle_condense_buckets(j, r);
    const Condensation c = condense_assignment(j, r);
    bool same = c.references.size() == buckets.size() && buckets.size() == out.sweeps.size();
    for (std::size_t b = 0; same && b < buckets.size(); ++b) {
      same = c.references[b] == buckets[b].front() && out.sweeps[b].location == j.sweeps[buckets[b].front()].location;
      for (std::size_t s : buckets[b]) same = same && c.assignment[s] == b;
    }
    if (!same) {
      ++partition;
      continue;
    }

    const Journey again = condense(out, {r, Aggregation::max});
    bool stable = again.sweeps.size() == out.sweeps.size();
    for (std::size_t k = 0; stable && k < out.sweeps.size(); ++k) {
      stable = again.sweeps[k].location == out.sweeps[k].location;
    }
    if (!stable) ++stability;

    bool exact = true;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      for (std::size_t bin = 0; bin < static_cast<std::size_t>(j.bin_count); ++bin) {
        double mx = -INFINITY;
        for (std::size_t s : buckets[b]) mx = std::max(mx, j.sweeps[s].powers[bin]);
        exact = exact && out.sweeps[b].powers[bin] == mx;
      }
    }
    if (!exact) ++aggregation;
  }
  const std::string detail = std::to_string(kCases) + " journeys; failures: separation " + std::to_string(separation) +
                             ", partition " + std::to_string(partition) + ", re-application " +
                             std::to_string(stability) + ", max-aggregation " + std::to_string(aggregation);
  return separation + partition + stability + aggregation == 0 ? pass(detail) : fail(detail);
}

Outcome rezoning() {
  constexpr int kCases = 1500;
  Rng rng(7114);
  int mismatches = 0;
  std::size_t boundary = 0, inside = 0, total = 0;
  for (int i = 0; i < kCases; ++i) {
    // Integer offsets keep every coordinate exactly representable.
    const double dlat = testing::uniform_int(rng, -60, 60);
    const double dlon = testing::uniform_int(rng, -160, 160);
    Zone z = testing::random_lattice_zone(rng);
    for (auto& v : z.vertices) v = {v.lat + dlat, v.lon + dlon};
    Journey j = testing::random_lattice_journey(rng, 30);
    for (auto& s : j.sweeps) s.location = {s.location.lat + dlat, s.location.lon + dlon};
    for (int k = 0; k < 3; ++k) {
      const GeoPoint v = z.vertices[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(z.vertices.size()) - 1))];
      j.sweeps.push_back({j.sweeps.size() + 0.0, v, {-90.0}});
    }

    std::vector<PowerSweep> expected;
    for (const auto& s : j.sweeps) {
      if (testing::oracle_inside(z.vertices, s.location)) expected.push_back(s);
      if (testing::oracle_on_boundary(z.vertices, s.location)) ++boundary;
    }
    inside += expected.size();
    total += j.sweeps.size();
    if (rezone(j, z).sweeps != expected) ++mismatches;
  }
  const std::string detail = std::to_string(kCases) + " pairs, " + std::to_string(total) + " points (" +
                             std::to_string(inside) + " inside, " + std::to_string(boundary) + " on a boundary), " +
                             std::to_string(mismatches) + " mismatches";
  if (boundary == 0) return fail(detail + "; no boundary cases generated");
  return mismatches == 0 ? pass(detail) : fail(detail);
}

Outcome format_round_trip() {
  constexpr int kCases = 1500;
  Rng rng(1466);
  int mismatches = 0;
  for (int i = 0; i < kCases; ++i) {
    const Journey j = with_rounded_powers(testing::random_valid_journey(rng));
    const std::string doc = serialize_journey(j);
    const Journey back = parse_journey(doc);
    if (!(back == j) || serialize_journey(back) != doc) ++mismatches;
  }
  int golden_failures = 0;
  const std::filesystem::path dir = ZEBRA_FIXTURE_DIR;
  const std::pair<const char*, DeviceKind> fixtures[] = {{"rfexplorer_2row", DeviceKind::rfexplorer},
                                                         {"ascii32_1row", DeviceKind::ascii32}};
  for (const auto& [name, kind] : fixtures) {
    const std::string raw = slurp(dir / (std::string(name) + ".txt"));
    const std::string golden = slurp(dir / (std::string(name) + ".golden.json"));
    if (golden.empty() || serialize_journey(parse_raw({kind, raw, {}})) != golden) ++golden_failures;
  }
  const std::string detail = std::to_string(kCases) + " journeys, " + std::to_string(mismatches) +
                             " round-trip mismatches; " + std::to_string(golden_failures) + "/2 golden mismatches";
  return mismatches + golden_failures == 0 ? pass(detail) : fail(detail);
}

// 10 km path of 10,000 sweeps (one per meter) with 112 bins, meandering so
// that it is neither a pure meridian nor a pure parallel.
Journey ten_km_journey() {
  Rng rng(10000);
  Journey j = testing::make_journey({470'000'000, 694'000'000}, 112, {});
  j.sweeps.reserve(10'000);
  GeoPoint p{8.59, -71.15};
  const double step_deg = 1.0 / kMetersPerDegree;
  double heading = 0.3;
  for (int i = 0; i < 10'000; ++i) {
    heading += testing::uniform(rng, -0.05, 0.05);
    p.lat += step_deg * std::cos(heading);
    p.lon += step_deg * std::sin(heading) / std::cos(deg_to_rad(p.lat));
    PowerSweep s{1466000000.0 + i, p, std::vector<double>(112)};
    for (auto& v : s.powers) v = round_power(testing::uniform(rng, -110, -40));
    j.sweeps.push_back(std::move(s));
  }
  return j;
}

Outcome performance() {
  const Journey j = ten_km_journey();
  const double km = journey_length_km(j);
  const auto plan = default_uhf_plan();
  std::size_t references = 0;
  double threshold = 0.0, condensed_threshold = 0.0;
  double best = INFINITY;
  for (int run = 0; run < 3; ++run) {
    const double secs = timed([&] {
      const Journey c = condense(j, {50.0, Aggregation::max});
      const OccupationReport full = occupation_report(j, plan, std::nullopt);
      const OccupationReport condensed = occupation_report(c, plan, std::nullopt);
      references = c.sweeps.size();
      threshold = full.threshold_dbm;
      condensed_threshold = condensed.threshold_dbm;
    });
    best = std::min(best, secs);
  }
  const std::string detail = fmt(km, 2) + " km, 10000 sweeps x 112 bins -> " + std::to_string(references) +
                             " references, auto threshold " + fmt(threshold, 1) + " dBm (condensed " +
                             fmt(condensed_threshold, 1) + " dBm); best of 3 runs " +
                             fmt(best) + " s (limit 1 s)";
  return best < 1.0 ? pass(detail) : fail(detail);
}

Outcome service_contract() {
  JourneyStore store;
  RepositoryService svc(store, RegionConfig{});
  testing::ServerThread server([&](httplib::Server& s) { mount_repository_routes(s, svc); });
  auto cli = server.client();
  std::vector<std::string> problems;

  Rng rng(694);
  Journey j = testing::random_geo_journey(rng, 0, 112);
  for (int i = 0; i < 40; ++i) {
    j.sweeps.push_back({1466000000.0 + i, {8.59 + 0.0003 * i, -71.15}, std::vector<double>(112)});
    for (auto& v : j.sweeps.back().powers) v = round_power(testing::uniform(rng, -110, -40));
  }
  j.id = "ve-merida-1";
  const std::string doc = serialize_journey(j);

  auto up = cli.Post("/v1/journeys", httplib::Headers{{"Authorization", "Bearer crowd"}}, doc, "application/json");
  if (!up || up->status != 201) return fail("upload did not return 201");
  const std::string id = nlohmann::json::parse(up->body).at("id");

  auto got = cli.Get("/v1/journeys/" + id);
  if (!got || got->body != doc) problems.push_back("fetched document differs from the upload");

  auto dup = cli.Post("/v1/journeys", httplib::Headers{{"Authorization", "Bearer crowd"}}, doc, "application/json");
  if (!dup || dup->status != 200 || nlohmann::json::parse(dup->body).at("id") != id) {
    problems.push_back("duplicate upload was not idempotent");
  }

  // Derivation chain: condense, then rezone the child, then condense again.
  std::vector<std::string> chain{id};
  auto derive = [&](const std::string& parent, const std::string& path, const std::string& body) {
    auto r = cli.Post("/v1/journeys/" + parent + path, body, "application/json");
    if (!r || r->status != 201) {
      problems.push_back("derive " + path + " failed");
      return parent;
    }
    return nlohmann::json::parse(r->body).at("id").get<std::string>();
  };
  chain.push_back(derive(chain.back(), "/condense", R"({"radius_m":60,"aggregation":"max"})"));
  chain.push_back(derive(chain.back(), "/rezone", R"({"label":"urban","vertices":[[8.595,-71.2],[8.595,-71.1],[8.7,-71.1],[8.7,-71.2]]})"));
  chain.push_back(derive(chain.back(), "/condense", R"({"radius_m":200,"aggregation":"mean"})"));

  const auto listing = nlohmann::json::parse(cli.Get("/v1/journeys")->body);
  std::map<std::string, std::string> parent_of;
  for (const auto& e : listing) {
    if (!e.at("derived_from").is_null()) parent_of[e.at("id")] = e.at("derived_from");
  }
  for (const auto& [start, _] : parent_of) {
    std::string cur = start;
    std::size_t steps = 0;
    while (parent_of.count(cur) && steps <= parent_of.size()) {
      cur = parent_of[cur];
      ++steps;
    }
    if (steps > parent_of.size()) problems.push_back("derivation cycle through " + start);
  }
  for (std::size_t k = 1; k < chain.size(); ++k) {
    if (parent_of[chain[k]] != chain[k - 1]) problems.push_back("derived_from does not name the parent");
  }
  if (cli.Get("/v1/journeys/" + id)->body != doc) problems.push_back("parent changed by derivation");

  for (const std::string& target : chain) {
    const Journey stored = parse_journey(cli.Get("/v1/journeys/" + target)->body);
    if (stored.sweeps.empty()) continue;
    const auto direct = serialize_report(occupation_report(stored, default_uhf_plan(), std::nullopt));
    if (cli.Get("/v1/journeys/" + target + "/occupation")->body != direct) {
      problems.push_back("occupation endpoint differs from the library for " + target);
    }
    const auto direct_t = serialize_report(occupation_report(stored, make_plan(470'000'000, 694'000'000, 6'000'000), -75.5));
    if (cli.Get("/v1/journeys/" + target + "/occupation?width_hz=6e6&threshold_dbm=-75.5")->body != direct_t) {
      problems.push_back("parameterised occupation differs from the library for " + target);
    }
  }

  const std::string detail = "upload/fetch, duplicate upload, " + std::to_string(chain.size() - 1) +
                             "-step derivation chain, occupation on " + std::to_string(chain.size()) + " journeys";
  if (!problems.empty()) return fail(detail + "; " + problems.front());
  return pass(detail);
}

RegionSummary random_summary(Rng& rng, const GeoPoint& base) {
  std::vector<Journey> js;
  const int n = testing::uniform_int(rng, 1, 3);
  for (int k = 0; k < n; ++k) {
    Journey j = testing::make_journey({470'000'000, 534'000'000}, 16, {});
    const int sweeps = testing::uniform_int(rng, 1, 25);
    for (int s = 0; s < sweeps; ++s) {
      PowerSweep p{static_cast<double>(s), {base.lat + testing::uniform(rng, 0, 0.01), base.lon + testing::uniform(rng, 0, 0.01)}, {}};
      for (int b = 0; b < 16; ++b) p.powers.push_back(-100.0 + 5.0 * testing::uniform_int(rng, 0, 10));
      j.sweeps.push_back(std::move(p));
    }
    js.push_back(std::move(j));
  }
  return summarize_region(js, make_plan(470'000'000, 534'000'000, 8'000'000), 250.0, "region", 1466000000.0);
}

std::vector<IncumbentRecord> random_registry(Rng& rng, const GeoPoint& base) {
  std::vector<IncumbentRecord> out;
  const int n = testing::uniform_int(rng, 0, 6);
  for (int k = 0; k < n; ++k) {
    const double lat = base.lat + testing::uniform(rng, -0.005, 0.01);
    const double lon = base.lon + testing::uniform(rng, -0.005, 0.01);
    out.push_back({static_cast<std::size_t>(testing::uniform_int(rng, 0, 7)),
                   {lat, lon, lat + testing::uniform(rng, 0.001, 0.01), lon + testing::uniform(rng, 0.001, 0.01)},
                   "TV-" + std::to_string(k)});
  }
  return out;
}

Outcome federation_loopback() {
  Rng rng(4242);
  int loopback_mismatch = 0, idempotency = 0, asymmetric = 0, conflicts = 0;
  constexpr int kPushes = 60;
  for (int i = 0; i < kPushes; ++i) {
    const GeoPoint base{testing::uniform(rng, -40, 40), testing::uniform(rng, -100, 100)};
    const auto summary = random_summary(rng, base);
    const auto registry = random_registry(rng, base);
    Regulator reg(registry);
    testing::ServerThread server([&](httplib::Server& s) { mount_regulator_routes(s, reg); });
    const auto first = push_summary(summary, server.url());
    if (!(first == validate_summary(summary, registry))) ++loopback_mismatch;
    const auto second = push_summary(summary, server.url());
    if (!(second == first) || reg.distinct_summaries() != 1) ++idempotency;
  }
  constexpr int kPairs = 1000;
  for (int i = 0; i < kPairs; ++i) {
    const GeoPoint base{testing::uniform(rng, -40, 40), testing::uniform(rng, -100, 100)};
    const auto a = random_summary(rng, base);
    const auto b = random_summary(rng, {base.lat + testing::uniform(rng, -0.01, 0.01), base.lon + testing::uniform(rng, -0.01, 0.01)});
    const auto ab = detect_overlap(a, b);
    const auto ba = detect_overlap(b, a);
    if (ab != ba) ++asymmetric;
    conflicts += static_cast<int>(ab.size());
  }
  const std::string detail = std::to_string(kPushes) + " loopback pushes (" + std::to_string(loopback_mismatch) +
                             " mismatches, " + std::to_string(idempotency) + " idempotency failures); " +
                             std::to_string(kPairs) + " overlap pairs (" + std::to_string(conflicts) +
                             " conflicts, " + std::to_string(asymmetric) + " asymmetric)";
  if (conflicts == 0) return fail(detail + "; fixtures produced no conflicts");
  return loopback_mismatch + idempotency + asymmetric == 0 ? pass(detail) : fail(detail);
}

// Looks for costa-rica/*.json and venezuela-urban/*.json canonical journeys
// under $ZEBRA_DATASET_DIR.
Outcome published_dataset() {
  const char* env = std::getenv("ZEBRA_DATASET_DIR");
  if (!env || !*env) return skip("ZEBRA_DATASET_DIR not set; public collection unavailable");
  const std::filesystem::path root = env;
  auto load = [&](const char* sub) {
    std::vector<Journey> out;
    if (!std::filesystem::is_directory(root / sub)) return out;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(root / sub)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(parse_journey(slurp(f)));
    return out;
  };
  const auto costa_rica = load("costa-rica");
  const auto venezuela = load("venezuela-urban");
  if (costa_rica.empty() || venezuela.empty()) {
    return skip("dataset directory lacks costa-rica/ or venezuela-urban/ journeys");
  }
  double km = 0.0;
  for (const auto& j : costa_rica) km += journey_length_km(j);

  const auto plan = default_uhf_plan();
  std::vector<double> values;
  std::size_t sweeps = 0;
  for (const auto& j : venezuela) {
    if (j.sweeps.empty()) continue;
    const auto m = channel_powers(j, plan);
    values.insert(values.end(), m.values.begin(), m.values.end());
    sweeps += m.sweeps;
  }
  const ChannelPowers pooled{sweeps, plan.channels.size(), values};
  const double ratio = whitespace_ratio(occupation(pooled, auto_threshold(pooled)));

  const bool length_ok = std::abs(km - 134.5) <= 0.01 * 134.5;
  const bool ratio_ok = std::abs(ratio - 0.86) <= 0.05;
  const std::string detail = "Costa Rica length " + fmt(km, 2) + " km (target 134.5 +/- 1%), Venezuela urban ratio " +
                             fmt(ratio) + " (target 0.86 +/- 0.05)";
  return length_ok && ratio_ok ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"occupancy-oracle-equivalence", occupancy_oracle},
      {"auto-threshold-property", auto_threshold_property},
      {"condensation", condensation},
      {"rezoning-oracle", rezoning},
      {"format-round-trip", format_round_trip},
      {"performance-10km", performance},
      {"service-contract", service_contract},
      {"federation-loopback", federation_loopback},
      {"published-dataset", published_dataset},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("unexpected exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::fail ? "FAIL" : "SKIP";
    std::cout << tag << "  " << name << ": " << o.detail << std::endl;
    if (o.kind == Outcome::fail) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria met" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
