#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trackwall/policy.hpp"
#include "trackwall/public_suffix.hpp"

namespace trackwall {

// A third party seen on this many distinct first parties is a tracker.
inline constexpr std::size_t kTrackerFirstPartyThreshold = 3;

// Registrable domains differ.
bool is_third_party(std::string_view request_host, std::string_view page_host,
                    const PublicSuffixList& psl);

// Third-party registrable domain -> distinct first parties it appeared on.
// Observations only ever grow within a session. Thread-safe.
class TrackerRegistry {
 public:
  TrackerRegistry() = default;
  explicit TrackerRegistry(std::optional<std::filesystem::path> path) : path_(std::move(path)) {}
  TrackerRegistry(TrackerRegistry&& other) noexcept;
  TrackerRegistry& operator=(TrackerRegistry&& other) noexcept;

  // Loads `path` when it exists; `reset` discards any saved observations.
  static std::unique_ptr<TrackerRegistry> open(const std::filesystem::path& path,
                                               bool reset = false);

  // Adds `first` to the set for `third`; returns the resulting set size.
  // Throws Error(kSameParty) when they are equal.
  std::size_t record(const std::string& third, const std::string& first);

  bool is_tracker(const std::string& domain) const;
  std::size_t first_party_count(const std::string& domain) const;
  std::set<std::string> first_parties(const std::string& domain) const;
  std::size_t size() const;

  std::map<std::string, std::set<std::string>> observations() const;

  nlohmann::ordered_json to_json() const;
  static TrackerRegistry from_json(const nlohmann::json& doc);

  // Writes to the path given at construction (no-op without one).
  void save() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::set<std::string>> observations_;
};

// Domains needed for pages to work (CDNs, content hosts). Reloadable.
class AllowedDomains {
 public:
  AllowedDomains() = default;
  explicit AllowedDomains(std::set<std::string> domains) : domains_(std::move(domains)) {}
  AllowedDomains(AllowedDomains&& other) noexcept;
  AllowedDomains& operator=(AllowedDomains&& other) noexcept;

  // Throws Error(kInvalidData) when the file lists nothing.
  static AllowedDomains load(const std::filesystem::path& path);
  void reload(const std::filesystem::path& path);

  bool contains(const std::string& domain) const;
  std::size_t size() const;
  std::set<std::string> domains() const;

 private:
  mutable std::shared_mutex mutex_;
  std::set<std::string> domains_;
};

// Per-request outcome of the blocking rule.
struct RequestVerdict {
  std::string domain;  // registrable domain of the request host
  bool third_party = false;
  bool tracker = false;
  bool allowlisted = false;
  bool blocked = false;
};

// Records the observation whenever the request is third party, then blocks
// iff the page verdict is Block, the request is third party, its domain is
// not allowlisted and it is a tracker.
RequestVerdict evaluate_request(std::string_view request_host, std::string_view page_host,
                                const PolicyDecision& page_decision, TrackerRegistry& registry,
                                const AllowedDomains& allowlist, const PublicSuffixList& psl);

bool should_block_request(std::string_view request_host, std::string_view page_host,
                          const PolicyDecision& page_decision, TrackerRegistry& registry,
                          const AllowedDomains& allowlist, const PublicSuffixList& psl);

}  // namespace trackwall
