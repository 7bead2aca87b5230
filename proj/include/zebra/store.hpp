#pragma once

// Append-only journey store. Each journey is one canonical document
// `journeys/<id>.json` plus a sidecar `journeys/<id>.meta.json`; the sidecar
// is written last and marks the entry as committed. `index.json` lists the
// committed entries and is rebuilt by re-scanning whenever it is missing or
// stale.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "zebra/error.hpp"
#include "zebra/journey_format.hpp"
#include "zebra/model.hpp"

namespace zebra {

struct StoredJourney {
  Journey journey;
  double uploaded_utc = 0.0;
  std::string uploader_token;
  std::optional<std::string> derived_from;
};

using Clock = std::function<double()>;

inline double system_utc_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

class JourneyStore {
 public:
  // In-memory store; nothing touches the filesystem.
  explicit JourneyStore(Clock clock = system_utc_seconds) : clock_(std::move(clock)) {}

  // Persistent store rooted at `root`, created if absent.
  explicit JourneyStore(std::filesystem::path root, Clock clock = system_utc_seconds)
      : root_(std::move(root)), clock_(std::move(clock)) {
    std::error_code ec;
    std::filesystem::create_directories(journey_dir(), ec);
    if (ec) throw StorageError("cannot create store at " + root_->string() + ": " + ec.message());
    load();
  }

  bool persistent() const { return root_.has_value(); }

  // Stores `journey` under `id` unless the id is already taken. Returns false
  // when an entry with this id already existed (nothing is written).
  bool insert(const std::string& id, const Journey& journey, const std::string& token,
              std::optional<std::string> derived_from = std::nullopt) {
    std::string canonical = serialize_journey(journey);
    std::unique_lock lock(mutex_);
    if (entries_.count(id)) return false;
    if (derived_from && !entries_.count(*derived_from)) {
      throw StorageError("derived_from names an unknown journey " + *derived_from);
    }
    Entry e{StoredJourney{journey, clock_(), token, std::move(derived_from)}, std::move(canonical)};
    if (root_) {
      write_atomically(doc_path(id), e.canonical);
      write_atomically(meta_path(id), meta_to_json(id, e.stored).dump());
    }
    entries_.emplace(id, std::move(e));
    if (root_) write_index();
    return true;
  }

  std::optional<StoredJourney> get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second.stored;
  }

  std::optional<std::string> canonical(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second.canonical;
  }

  bool contains(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return entries_.count(id) > 0;
  }

  // All entries ordered by upload time, then id.
  std::vector<std::pair<std::string, StoredJourney>> list() const {
    std::vector<std::pair<std::string, StoredJourney>> out;
    {
      std::shared_lock lock(mutex_);
      out.reserve(entries_.size());
      for (const auto& [id, e] : entries_) out.emplace_back(id, e.stored);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(a.second.uploaded_utc, a.first) < std::tie(b.second.uploaded_utc, b.first);
    });
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  // Rewrites index.json from the committed sidecars on disk.
  void rebuild_index() {
    std::unique_lock lock(mutex_);
    if (!root_) return;
    entries_.clear();
    scan();
    write_index();
  }

  std::filesystem::path index_path() const { return root_ ? *root_ / "index.json" : std::filesystem::path{}; }

 private:
  struct Entry {
    StoredJourney stored;
    std::string canonical;
  };

  std::filesystem::path journey_dir() const { return *root_ / "journeys"; }
  std::filesystem::path doc_path(const std::string& id) const { return journey_dir() / (id + ".json"); }
  std::filesystem::path meta_path(const std::string& id) const { return journey_dir() / (id + ".meta.json"); }

  static nlohmann::ordered_json meta_to_json(const std::string& id, const StoredJourney& s) {
    nlohmann::ordered_json derived = nullptr;
    if (s.derived_from) derived = *s.derived_from;
    return {{"id", id}, {"uploaded_utc", s.uploaded_utc}, {"uploader_token", s.uploader_token},
            {"derived_from", derived}};
  }

  static std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StorageError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write_atomically(const std::filesystem::path& p, const std::string& content) {
    const auto tmp = p.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw StorageError("cannot write " + tmp);
      out << content;
      out.flush();
      if (!out) throw StorageError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw StorageError("cannot commit " + p.string() + ": " + ec.message());
  }

  void load() {
    const auto idx = index_path();
    bool consistent = false;
    if (std::filesystem::exists(idx)) {
      try {
        const auto doc = nlohmann::json::parse(read_file(idx));
        std::size_t sidecars = 0;
        for (const auto& entry : std::filesystem::directory_iterator(journey_dir())) {
          if (entry.path().string().ends_with(".meta.json")) ++sidecars;
        }
        consistent = doc.is_array() && doc.size() == sidecars;
        if (consistent) {
          for (const auto& m : doc) {
            const auto id = m.at("id").get<std::string>();
            if (!std::filesystem::exists(doc_path(id)) || !std::filesystem::exists(meta_path(id))) {
              consistent = false;
              break;
            }
          }
        }
      } catch (const std::exception&) {
        consistent = false;
      }
    }
    scan();
    if (!consistent) write_index();
  }

  // Loads every committed entry (sidecar present). Orphan documents without a
  // sidecar are leftovers of an interrupted write and are ignored.
  void scan() {
    for (const auto& entry : std::filesystem::directory_iterator(journey_dir())) {
      const std::string name = entry.path().filename().string();
      if (!name.ends_with(".meta.json")) continue;
      const std::string id = name.substr(0, name.size() - std::string(".meta.json").size());
      try {
        const auto meta = nlohmann::json::parse(read_file(entry.path()));
        std::string canonical = read_file(doc_path(id));
        StoredJourney s;
        s.journey = parse_journey(canonical);
        s.uploaded_utc = meta.at("uploaded_utc").get<double>();
        s.uploader_token = meta.at("uploader_token").get<std::string>();
        if (!meta.at("derived_from").is_null()) s.derived_from = meta.at("derived_from").get<std::string>();
        entries_.emplace(id, Entry{std::move(s), std::move(canonical)});
      } catch (const std::exception& e) {
        throw StorageError("corrupt store entry " + id + ": " + e.what());
      }
    }
  }

  void write_index() {
    std::vector<std::pair<std::string, const StoredJourney*>> order;
    for (const auto& [id, e] : entries_) order.emplace_back(id, &e.stored);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return std::tie(a.second->uploaded_utc, a.first) < std::tie(b.second->uploaded_utc, b.first);
    });
    nlohmann::ordered_json idx = nlohmann::ordered_json::array();
    for (const auto& [id, s] : order) idx.push_back(meta_to_json(id, *s));
    write_atomically(index_path(), idx.dump());
  }

  std::optional<std::filesystem::path> root_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
};

}  // namespace zebra
