#pragma once

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

#include "trackwall/categorizer.hpp"
#include "trackwall/taxonomy.hpp"

namespace trackwall {

enum class Verdict { kAllow, kBlock };
enum class UrlVerdict { kAllow, kBlock, kClear };
enum class DecisionReason { kUrlOverride, kCategoryMatch, kDefaultAllow };

std::string_view to_string(Verdict v);
std::string_view to_string(DecisionReason r);
std::optional<Verdict> verdict_from_string(std::string_view text);
std::optional<DecisionReason> reason_from_string(std::string_view text);

struct PolicyDecision {
  Verdict verdict = Verdict::kAllow;
  DecisionReason reason = DecisionReason::kDefaultAllow;
  std::vector<std::string> matched_categories;  // non-empty iff reason is kCategoryMatch

  friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

// User choices. Default state blocks nothing.
struct PolicyConfig {
  std::set<std::string> blocked_categories;
  std::map<std::string, Verdict> url_policies;                     // normalized url
  std::map<std::string, std::vector<std::string>> category_overrides;  // normalized url

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

// Per-URL verdict first, then any assigned category that is blocked, else
// allow. Pure.
PolicyDecision resolve(const std::string& normalized_url, const CategoryAssignment& assignment,
                       const PolicyConfig& config);

// Value-level edits; each returns the updated config and validates input.
// Errors: kUnknownCategory, kMalformedUrl, kTooManyCategories.
PolicyConfig set_category_blocked(PolicyConfig config, const std::string& category, bool blocked,
                                  const Taxonomy& taxonomy);
PolicyConfig set_blocked_categories(PolicyConfig config, const std::vector<std::string>& categories,
                                    const Taxonomy& taxonomy);
PolicyConfig set_url_policy(PolicyConfig config, std::string_view url, UrlVerdict verdict);
PolicyConfig set_category_override(PolicyConfig config, std::string_view url,
                                   const std::vector<std::string>& categories,
                                   const Taxonomy& taxonomy);
PolicyConfig clear_category_override(PolicyConfig config, std::string_view url);

// policy.json document. Keys are re-normalized and categories validated on
// load, so a hand-edited file cannot smuggle in invalid state.
nlohmann::ordered_json policy_to_json(const PolicyConfig& config);
PolicyConfig policy_from_json(const nlohmann::json& doc, const Taxonomy& taxonomy);

// Shared, persisted PolicyConfig. Readers take an immutable snapshot, so a
// resolve sees either the whole old config or the whole new one. Writers are
// serialized and persist with an atomic replace before publishing.
class PolicyStore {
 public:
  explicit PolicyStore(const Taxonomy& taxonomy,
                       std::optional<std::filesystem::path> path = std::nullopt);

  // Loads `path` when it exists, otherwise starts from the default config.
  static std::unique_ptr<PolicyStore> open(const Taxonomy& taxonomy,
                                           const std::filesystem::path& path);

  std::shared_ptr<const PolicyConfig> snapshot() const;

  void set_category_blocked(const std::string& category, bool blocked);
  void set_blocked_categories(const std::vector<std::string>& categories);
  void set_url_policy(std::string_view url, UrlVerdict verdict);
  void set_category_override(std::string_view url, const std::vector<std::string>& categories);
  void clear_category_override(std::string_view url);
  void replace(PolicyConfig config);

  std::optional<std::vector<std::string>> override_for(const std::string& normalized_url) const;

  const Taxonomy& taxonomy() const noexcept { return taxonomy_; }

 private:
  template <class Fn>
  void update(Fn&& fn);

  const Taxonomy& taxonomy_;
  std::optional<std::filesystem::path> path_;
  std::mutex write_mutex_;
  mutable std::shared_mutex read_mutex_;
  std::shared_ptr<const PolicyConfig> current_;
};

}  // namespace trackwall
