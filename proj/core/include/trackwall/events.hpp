#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trackwall/categorizer.hpp"
#include "trackwall/policy.hpp"

namespace trackwall {

// 64-bit FNV-1a of the normalized URL, as 16 lowercase hex digits.
std::string page_hash(std::string_view normalized_url);

// Pseudo-anonymized record of one page load.
struct BrowsingEvent {
  std::int64_t timestamp = 0;
  std::optional<std::string> user;
  std::string page_hash;
  std::vector<std::string> categories;
  AssignmentSource source = AssignmentSource::kFallbackUncategorized;
  Verdict verdict = Verdict::kAllow;
  DecisionReason reason = DecisionReason::kDefaultAllow;
  std::vector<std::string> matched_categories;
  std::vector<std::string> third_parties;  // registrable domains, first-seen order
  std::vector<std::string> trackers;       // third parties that were trackers when seen
  std::vector<std::string> blocked;        // subset of third_parties
  std::vector<std::string> iframes;

  friend bool operator==(const BrowsingEvent&, const BrowsingEvent&) = default;
};

// Appends `value` unless already present.
void add_unique(std::vector<std::string>& list, const std::string& value);

nlohmann::ordered_json event_to_json(const BrowsingEvent& event);
// One JSONL line without the trailing newline.
std::string event_to_line(const BrowsingEvent& event);
// Throws Error(kMalformedRecord) on schema violations.
BrowsingEvent event_from_json(const nlohmann::json& doc);

// Append-only event sink: keeps events in memory and, when given a path,
// mirrors each one as a JSONL line. Thread-safe.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& path);

  void append(const BrowsingEvent& event);
  std::vector<BrowsingEvent> events() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<BrowsingEvent> events_;
  std::optional<std::ofstream> out_;
};

}  // namespace trackwall
