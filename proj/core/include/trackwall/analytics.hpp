#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trackwall/events.hpp"
#include "trackwall/public_suffix.hpp"
#include "trackwall/taxonomy.hpp"

namespace trackwall {

// Registrable domains regarded as ad-serving.
class AdDomainList {
 public:
  AdDomainList() = default;
  explicit AdDomainList(std::set<std::string> domains);

  // Throws Error(kInvalidData) when the file lists nothing.
  static AdDomainList load(const std::filesystem::path& path);

  bool contains(const std::string& domain) const { return domains_.contains(domain); }
  std::size_t size() const noexcept { return domains_.size(); }

 private:
  std::set<std::string> domains_;
};

struct LoadedEvents {
  std::vector<BrowsingEvent> events;
  std::size_t skipped = 0;  // malformed lines
};

// JSONL reader; blank lines are ignored, malformed ones counted.
// load_events throws Error(kFileUnreadable).
LoadedEvents load_events(const std::filesystem::path& path);
LoadedEvents parse_events(std::istream& in);

struct AdCounts {
  std::size_t total = 0;
  std::size_t blocked = 0;

  friend bool operator==(const AdCounts&, const AdCounts&) = default;
};

// An iframe is an ad iff its registrable domain is on the ad list; it is a
// blocked ad iff the page verdict was Block.
AdCounts classify_ad_iframes(const BrowsingEvent& event, const AdDomainList& ads,
                             const PublicSuffixList& psl);

// Population mean/stddev of trackers per page. Pages whose verdict was Block
// are excluded; when nothing remains the moments are empty.
struct TrackerSpread {
  std::size_t pages = 0;
  std::optional<double> mean;
  std::optional<double> stddev;
  std::size_t distinct = 0;
};

struct TrackerStats {
  TrackerSpread overall;
  std::vector<std::pair<std::string, TrackerSpread>> per_category;  // taxonomy order
};

TrackerStats tracker_stats(const std::vector<BrowsingEvent>& events, const Taxonomy& taxonomy);

struct RankedDomain {
  std::string domain;
  std::size_t count = 0;
  double pct = 0.0;

  friend bool operator==(const RankedDomain&, const RankedDomain&) = default;
};

struct CategoryReport {
  std::size_t pages_total = 0;
  std::size_t pages_distinct = 0;
  std::size_t pages_blocked = 0;
  std::size_t ads_total = 0;
  std::size_t ads_blocked = 0;
  std::size_t pages_analyzed = 0;
  std::optional<double> avg_trackers;
  std::optional<double> std_trackers;
  std::size_t distinct_trackers = 0;
  std::size_t url_policy_pages = 0;

  friend bool operator==(const CategoryReport&, const CategoryReport&) = default;
};

struct OverallReport {
  std::size_t pages_total = 0;
  std::size_t pages_distinct = 0;
  std::size_t pages_blocked = 0;
  double pct_pages_blocked = 0.0;
  std::size_t ads_total = 0;
  std::size_t ads_blocked = 0;
  double pct_ads_blocked = 0.0;
  std::size_t pages_analyzed = 0;
  std::optional<double> avg_trackers;
  std::optional<double> std_trackers;
  std::size_t distinct_trackers = 0;
  std::size_t url_policy_pages = 0;
  std::size_t url_policy_block = 0;
  std::size_t url_policy_allow = 0;
  std::vector<RankedDomain> top_trackers;    // share of analyzed pages
  std::vector<RankedDomain> top_ad_domains;  // share of all ad iframes

  friend bool operator==(const OverallReport&, const OverallReport&) = default;
};

struct Report {
  OverallReport overall;
  std::vector<std::pair<std::string, CategoryReport>> per_category;  // taxonomy order

  friend bool operator==(const Report&, const Report&) = default;
};

struct ReportOptions {
  // Drop users with fewer events than this (0 disables; events without a
  // user field form one anonymous user).
  std::size_t min_pages = 0;
  std::size_t top_trackers = 10;
  std::size_t top_ad_domains = 40;
};

// Multi-category pages count once in each of their categories; the overall
// block is computed from the raw event list.
Report build_report(const std::vector<BrowsingEvent>& events, const AdDomainList& ads,
                    const PublicSuffixList& psl, const Taxonomy& taxonomy,
                    const ReportOptions& options = {});

nlohmann::ordered_json report_to_json(const Report& report);
// Keeps the document order of perCategory.
Report report_from_json(const nlohmann::ordered_json& doc);

enum class ReportFormat { kJson, kMarkdown };

// Throws Error(kUnknownFormat).
ReportFormat report_format_from_string(std::string_view name);
std::string render_report(const Report& report, ReportFormat format);

}  // namespace trackwall
