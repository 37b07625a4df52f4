#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trackwall/events.hpp"
#include "trackwall/gateway.hpp"

namespace trackwall {

// One line of a browsing log. Either `features` carries pre-extracted page
// text, or `html` names a saved page (relative to the log) to extract from.
struct ReplayRecord {
  std::string page;
  std::optional<std::string> html;
  std::optional<std::string> title;
  std::vector<std::string> keywords;
  std::optional<std::string> body;
  std::optional<std::string> declared_category;
  bool has_features = false;
  std::vector<std::string> subresources;
  std::vector<std::string> iframes;
  std::optional<std::int64_t> timestamp;
  std::optional<std::string> user;
};

// Throws Error(kMalformedRecord) on shape errors.
ReplayRecord parse_replay_record(const nlohmann::json& doc);

struct ReplayOptions {
  std::filesystem::path html_root;  // base for relative `html` paths
  EventLog* sink = nullptr;
  // Called with each finished page, e.g. to expose it as a client's current
  // page.
  std::function<void(const PageContext&)> on_page;
};

struct ReplayResult {
  std::vector<BrowsingEvent> events;
  std::size_t skipped = 0;
};

// Runs one record through the gateway. `index` is the timestamp fallback.
// Throws Error(kMalformedUrl) for an unusable page URL.
BrowsingEvent replay_record(Gateway& gateway, const ReplayRecord& record, std::int64_t index,
                            const ReplayOptions& options = {});

// Blank lines are ignored; lines that are not JSON objects with a valid page
// URL are counted in `skipped`. Each line's 0-based position is the
// timestamp fallback.
ReplayResult replay_stream(Gateway& gateway, std::istream& in, const ReplayOptions& options = {});
ReplayResult replay_file(Gateway& gateway, const std::filesystem::path& path,
                         ReplayOptions options = {});

}  // namespace trackwall
