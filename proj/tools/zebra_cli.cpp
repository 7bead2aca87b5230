// zebra: batch front door for the collection workflow.
//
//   zebra convert --kind rfexplorer capture.txt -o journey.json
//   zebra condense --radius 50 journey.json | zebra rezone --zone urban.txt | zebra whitespace
//   zebra serve --port 8080 --store ./repo
//   zebra serve --regulator --registry incumbents.csv --port 9090
//
// Exit status: 0 ok, 2 usage, 3 validation, 4 format, 5 I/O, 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zebra/zebra.hpp"

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kUsage = 2, kValidation = 3, kFormat = 4, kIo = 5 };

class IoError : public zebra::Error {
 public:
  explicit IoError(const std::string& detail) : zebra::Error("io", detail) {}
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("short write to " + path);
}

// start:stop:width in Hz, scientific notation accepted.
zebra::ChannelPlan parse_plan_flag(const std::string& text) {
  const auto parts = zebra::detail::split(text, ':');
  if (parts.size() != 3) throw zebra::PreconditionError("--plan must be start:stop:width");
  auto start = zebra::detail::parse_hz(parts[0]);
  auto stop = zebra::detail::parse_hz(parts[1]);
  auto width = zebra::detail::parse_hz(parts[2]);
  if (!start || !stop || !width) throw zebra::PreconditionError("--plan values must be integral Hz");
  return zebra::make_plan(*start, *stop, *width);
}

zebra::Zone read_zone(const std::string& path, const std::string& label) {
  zebra::Zone zone;
  auto parsed = zebra::parse_zone_label(label);
  if (!parsed) throw zebra::PreconditionError("--label must be urban, rural, suburban or custom");
  zone.label = *parsed;
  const std::string text = read_input(path);
  for (const auto& line : zebra::detail::content_lines(text)) {
    const auto cols = zebra::detail::split(line.text, ',');
    auto lat = cols.size() == 2 ? zebra::detail::to_double(cols[0]) : std::nullopt;
    auto lon = cols.size() == 2 ? zebra::detail::to_double(cols[1]) : std::nullopt;
    if (!lat || !lon) throw zebra::FormatError(line.number, "zone vertices are lines of lat,lon");
    zone.vertices.push_back({*lat, *lon});
  }
  if (auto problems = zebra::zone_problems(zone); !problems.empty()) {
    throw zebra::PreconditionError("invalid zone: " + problems.front());
  }
  return zone;
}

int exit_code_for(const zebra::Error& e) {
  const std::string& c = e.code();
  if (c == "precondition" || c == "degenerate-band") return kUsage;
  if (c == "validation" || c == "empty-journey" || c == "empty-channel" || c == "plan-mismatch" ||
      c == "out-of-range" || c == "empty-input" || c == "rejected")
    return kValidation;
  if (c == "schema" || c == "format" || c == "inconsistent") return kFormat;
  if (c == "io" || c == "storage" || c == "transport") return kIo;
  return kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional spectrum repository toolkit"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string output = "-";
  std::string plan_text = "470e6:694e6:8e6";
  std::optional<double> threshold;

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a raw device capture into a canonical journey");
  std::string kind_text;
  std::string track_path, band_hint, id, country, city, notes;
  std::optional<std::int64_t> bins_hint;
  convert->add_option("--kind", kind_text, "Device kind")
      ->required()
      ->check(CLI::IsMember({"rfexplorer", "ascii32", "whisppi", "android-rfe"}));
  convert->add_option("--track", track_path, "Location track (unix_time,lat,lon lines)");
  convert->add_option("--band", band_hint, "Band start:stop in Hz when the header omits it");
  convert->add_option("--bins", bins_hint, "Bin count when the header omits it")->check(CLI::PositiveNumber);
  convert->add_option("--id", id, "Journey id");
  convert->add_option("--country", country);
  convert->add_option("--city", city);
  convert->add_option("--notes", notes);
  convert->add_option("input", input, "Raw capture file (- for stdin)");
  convert->add_option("-o,--output", output);

  // validate
  auto* validate = app.add_subcommand("validate", "List invariant violations of a journey document");
  validate->add_option("input", input);

  // condense
  auto* condense_cmd = app.add_subcommand("condense", "Condense sweeps onto evenly separated reference points");
  double radius = 0.0;
  std::string aggregation = "max";
  condense_cmd->add_option("--radius", radius, "Condensation radius in meters")->required()->check(CLI::PositiveNumber);
  condense_cmd->add_option("--aggregation", aggregation)->check(CLI::IsMember({"max", "min", "mean"}));
  condense_cmd->add_option("input", input);
  condense_cmd->add_option("-o,--output", output);

  // rezone
  auto* rezone_cmd = app.add_subcommand("rezone", "Keep only the sweeps inside a polygon");
  std::string zone_path, zone_label = "custom";
  rezone_cmd->add_option("--zone", zone_path, "Polygon vertices file (lat,lon lines)")->required();
  rezone_cmd->add_option("--label", zone_label)->check(CLI::IsMember({"urban", "rural", "suburban", "custom"}));
  rezone_cmd->add_option("input", input);
  rezone_cmd->add_option("-o,--output", output);

  // occupation
  auto* occupation_cmd = app.add_subcommand("occupation", "Per-channel occupation report");
  std::string thresholds_text;
  occupation_cmd->add_option("--plan", plan_text, "Channel plan start:stop:width in Hz");
  occupation_cmd->add_option("--threshold", threshold, "Threshold in dBm (default: automatic)");
  occupation_cmd->add_option("--thresholds", thresholds_text, "Comma-separated thresholds for a curve");
  occupation_cmd->add_option("input", input);
  occupation_cmd->add_option("-o,--output", output);

  // whitespace
  auto* whitespace_cmd = app.add_subcommand("whitespace", "White-space ratio and threshold");
  whitespace_cmd->add_option("--plan", plan_text);
  whitespace_cmd->add_option("--threshold", threshold);
  whitespace_cmd->add_option("input", input);

  // heatmap
  auto* heatmap_cmd = app.add_subcommand("heatmap", "Gridded maximum power");
  double cell = 0.0;
  std::optional<std::size_t> channel;
  heatmap_cmd->add_option("--plan", plan_text);
  heatmap_cmd->add_option("--cell", cell, "Cell size in meters")->required()->check(CLI::PositiveNumber);
  heatmap_cmd->add_option("--channel", channel, "Channel index (default: whole band)");
  heatmap_cmd->add_option("input", input);
  heatmap_cmd->add_option("-o,--output", output);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the repository service (or the regulator with --regulator)");
  std::string host = "127.0.0.1", store_dir, region_path, registry_path;
  int port = 8080;
  bool regulator_role = false;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--store", store_dir, "Store directory (default: in memory)");
  serve->add_option("--region", region_path, "Region configuration JSON");
  serve->add_flag("--regulator", regulator_role, "Run the regulator role");
  serve->add_option("--registry", registry_path, "Incumbent registry file (regulator role)");

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Build a region summary from journeys");
  std::vector<std::string> inputs;
  std::string region_id = "default";
  std::optional<double> generated_utc;
  summarize->add_option("--plan", plan_text);
  summarize->add_option("--cell", cell)->required()->check(CLI::PositiveNumber);
  summarize->add_option("--region-id", region_id);
  summarize->add_option("--generated-utc", generated_utc, "Summary timestamp (default: now)");
  summarize->add_option("inputs", inputs, "Journey documents")->required();
  summarize->add_option("-o,--output", output);

  // push
  auto* push = app.add_subcommand("push", "Push a region summary to a regulator");
  std::string endpoint, token;
  int attempts = 1;
  push->add_option("--endpoint", endpoint, "Regulator base URL")->required();
  push->add_option("--token", token, "Bearer token recorded by the peer");
  push->add_option("--attempts", attempts)->check(CLI::Range(1, 20));
  push->add_option("input", input);
  push->add_option("-o,--output", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*convert) {
      zebra::RawCapture capture;
      capture.device_kind = *zebra::parse_device_kind(kind_text);
      capture.payload = read_input(input);
      if (!band_hint.empty()) {
        const auto parts = zebra::detail::split(band_hint, ':');
        auto start = parts.size() == 2 ? zebra::detail::parse_hz(parts[0]) : std::nullopt;
        auto stop = parts.size() == 2 ? zebra::detail::parse_hz(parts[1]) : std::nullopt;
        if (!start || !stop) throw zebra::PreconditionError("--band must be start:stop in Hz");
        capture.hint.band = zebra::Band{*start, *stop};
      }
      capture.hint.bin_count = bins_hint;
      zebra::Journey j = zebra::parse_raw(capture);
      if (!track_path.empty()) j = zebra::merge_location_track(j, zebra::parse_track(read_input(track_path)));
      j.id = id;
      j.metadata.country = country;
      j.metadata.city = city;
      j.metadata.notes = notes;
      write_output(output, zebra::serialize_journey(j));
    } else if (*validate) {
      const std::string text = read_input(input);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw zebra::SchemaError(std::string("not a JSON document: ") + e.what());
      }
      const auto violations = zebra::validate_journey(zebra::journey_from_json(doc));
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const auto& v : violations) {
        nlohmann::ordered_json item{{"code", v.code}, {"field", v.field}, {"message", v.message}};
        item["index"] = v.index ? nlohmann::ordered_json(*v.index) : nlohmann::ordered_json(nullptr);
        list.push_back(std::move(item));
      }
      std::cout << list.dump() << '\n';
      return violations.empty() ? kOk : kValidation;
    } else if (*condense_cmd) {
      const zebra::Journey j = zebra::parse_journey(read_input(input));
      const zebra::CondensationConfig cfg{radius, *zebra::parse_aggregation(aggregation)};
      write_output(output, zebra::serialize_journey(zebra::condense(j, cfg)));
    } else if (*rezone_cmd) {
      const zebra::Zone zone = read_zone(zone_path, zone_label);
      const zebra::Journey j = zebra::parse_journey(read_input(input));
      write_output(output, zebra::serialize_journey(zebra::rezone(j, zone)));
    } else if (*occupation_cmd) {
      const zebra::ChannelPlan plan = parse_plan_flag(plan_text);
      const zebra::Journey j = zebra::parse_journey(read_input(input));
      if (!thresholds_text.empty()) {
        if (threshold) throw zebra::PreconditionError("--threshold and --thresholds are exclusive");
        const auto ts = zebra::detail::parse_number_list(thresholds_text, "thresholds");
        write_output(output, zebra::serialize_curve(zebra::occupation_curve(j, plan, ts)));
      } else {
        write_output(output, zebra::serialize_report(zebra::occupation_report(j, plan, threshold)));
      }
    } else if (*whitespace_cmd) {
      const zebra::ChannelPlan plan = parse_plan_flag(plan_text);
      const zebra::Journey j = zebra::parse_journey(read_input(input));
      write_output("-", zebra::format_whitespace_summary(zebra::occupation_report(j, plan, threshold)));
    } else if (*heatmap_cmd) {
      const zebra::ChannelPlan plan = parse_plan_flag(plan_text);
      const zebra::Journey j = zebra::parse_journey(read_input(input));
      write_output(output, zebra::serialize_heatmap(zebra::heatmap(j, plan, channel, cell)));
    } else if (*summarize) {
      const zebra::ChannelPlan plan = parse_plan_flag(plan_text);
      std::vector<zebra::Journey> journeys;
      for (const auto& path : inputs) journeys.push_back(zebra::parse_journey(read_input(path)));
      const double when = generated_utc ? *generated_utc : zebra::system_utc_seconds();
      write_output(output, zebra::serialize_summary(zebra::summarize_region(journeys, plan, cell, region_id, when)));
    } else if (*push) {
      const zebra::RegionSummary summary = zebra::parse_summary(read_input(input));
      zebra::PushOptions options;
      options.attempts = attempts;
      options.bearer_token = token;
      write_output(output, zebra::serialize_validation(zebra::push_summary(summary, endpoint, options)));
    } else if (*serve) {
      httplib::Server server;
      std::optional<zebra::JourneyStore> store;
      std::optional<zebra::RepositoryService> service;
      std::optional<zebra::Regulator> regulator;
      if (regulator_role) {
        std::vector<zebra::IncumbentRecord> registry;
        if (!registry_path.empty()) registry = zebra::parse_registry(read_input(registry_path));
        regulator.emplace(std::move(registry));
        zebra::mount_regulator_routes(server, *regulator);
      } else {
        zebra::RegionConfig region;
        if (!region_path.empty()) region = zebra::parse_region_config(read_input(region_path));
        if (store_dir.empty()) {
          store.emplace();
        } else {
          store.emplace(std::filesystem::path(store_dir));
        }
        service.emplace(*store, region);
        zebra::mount_repository_routes(server, *service);
      }
      std::cerr << "listening on " << host << ':' << port << (regulator_role ? " (regulator)" : "") << std::endl;
      if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const zebra::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) std::cerr << "  " << v.code << ": " << v.message << '\n';
    return kValidation;
  } catch (const zebra::Error& e) {
    std::cerr << "error (" << e.code() << "): " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
