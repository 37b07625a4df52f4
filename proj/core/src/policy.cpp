#include "trackwall/policy.hpp"

#include <algorithm>

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/url.hpp"

namespace trackwall {

std::string_view to_string(Verdict v) { return v == Verdict::kBlock ? "block" : "allow"; }

std::string_view to_string(DecisionReason r) {
  switch (r) {
    case DecisionReason::kUrlOverride: return "url-override";
    case DecisionReason::kCategoryMatch: return "category-match";
    case DecisionReason::kDefaultAllow: return "default-allow";
  }
  return "";
}

std::optional<Verdict> verdict_from_string(std::string_view text) {
  if (text == "block") return Verdict::kBlock;
  if (text == "allow") return Verdict::kAllow;
  return std::nullopt;
}

std::optional<DecisionReason> reason_from_string(std::string_view text) {
  for (auto r : {DecisionReason::kUrlOverride, DecisionReason::kCategoryMatch,
                 DecisionReason::kDefaultAllow}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

PolicyDecision resolve(const std::string& normalized_url, const CategoryAssignment& assignment,
                       const PolicyConfig& config) {
  if (const auto it = config.url_policies.find(normalized_url); it != config.url_policies.end()) {
    return {it->second, DecisionReason::kUrlOverride, {}};
  }
  PolicyDecision decision;
  for (const auto& c : assignment.categories) {
    if (config.blocked_categories.contains(c)) decision.matched_categories.push_back(c);
  }
  if (!decision.matched_categories.empty()) {
    decision.verdict = Verdict::kBlock;
    decision.reason = DecisionReason::kCategoryMatch;
  }
  return decision;
}

namespace {

void require_category(const Taxonomy& taxonomy, const std::string& category) {
  if (!taxonomy.contains(category)) {
    throw Error(ErrorCode::kUnknownCategory, "unknown category: " + category);
  }
}

std::vector<std::string> validated_override(const std::vector<std::string>& categories,
                                            const Taxonomy& taxonomy) {
  if (categories.size() > kMaxCategoriesPerPage) {
    throw Error(ErrorCode::kTooManyCategories, "a page carries at most 3 categories");
  }
  if (categories.empty()) {
    throw Error(ErrorCode::kUnknownCategory, "override needs at least one category");
  }
  std::vector<std::string> out;
  for (const auto& c : categories) {
    require_category(taxonomy, c);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace

PolicyConfig set_category_blocked(PolicyConfig config, const std::string& category, bool blocked,
                                  const Taxonomy& taxonomy) {
  require_category(taxonomy, category);
  if (blocked) {
    config.blocked_categories.insert(category);
  } else {
    config.blocked_categories.erase(category);
  }
  return config;
}

PolicyConfig set_blocked_categories(PolicyConfig config, const std::vector<std::string>& categories,
                                    const Taxonomy& taxonomy) {
  for (const auto& c : categories) require_category(taxonomy, c);
  config.blocked_categories = {categories.begin(), categories.end()};
  return config;
}

PolicyConfig set_url_policy(PolicyConfig config, std::string_view url, UrlVerdict verdict) {
  auto key = normalize_url(url);
  switch (verdict) {
    case UrlVerdict::kAllow: config.url_policies[key] = Verdict::kAllow; break;
    case UrlVerdict::kBlock: config.url_policies[key] = Verdict::kBlock; break;
    case UrlVerdict::kClear: config.url_policies.erase(key); break;
  }
  return config;
}

PolicyConfig set_category_override(PolicyConfig config, std::string_view url,
                                   const std::vector<std::string>& categories,
                                   const Taxonomy& taxonomy) {
  auto key = normalize_url(url);
  config.category_overrides[key] = validated_override(categories, taxonomy);
  return config;
}

PolicyConfig clear_category_override(PolicyConfig config, std::string_view url) {
  config.category_overrides.erase(normalize_url(url));
  return config;
}

nlohmann::ordered_json policy_to_json(const PolicyConfig& config) {
  nlohmann::ordered_json doc;
  doc["blockedCategories"] = nlohmann::ordered_json::array();
  for (const auto& c : config.blocked_categories) doc["blockedCategories"].push_back(c);
  doc["urlPolicies"] = nlohmann::ordered_json::object();
  for (const auto& [url, v] : config.url_policies) doc["urlPolicies"][url] = to_string(v);
  doc["categoryOverrides"] = nlohmann::ordered_json::object();
  for (const auto& [url, cats] : config.category_overrides) doc["categoryOverrides"][url] = cats;
  return doc;
}

PolicyConfig policy_from_json(const nlohmann::json& doc, const Taxonomy& taxonomy) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidData, "policy document must be an object");
  PolicyConfig config;
  try {
    if (doc.contains("blockedCategories")) {
      config = set_blocked_categories(
          std::move(config), doc.at("blockedCategories").get<std::vector<std::string>>(),
          taxonomy);
    }
    if (doc.contains("urlPolicies")) {
      for (const auto& [url, v] : doc.at("urlPolicies").items()) {
        const auto verdict = verdict_from_string(v.get<std::string>());
        if (!verdict) throw Error(ErrorCode::kInvalidData, "url policy must be block or allow");
        config = set_url_policy(std::move(config), url,
                                *verdict == Verdict::kBlock ? UrlVerdict::kBlock
                                                            : UrlVerdict::kAllow);
      }
    }
    if (doc.contains("categoryOverrides")) {
      for (const auto& [url, cats] : doc.at("categoryOverrides").items()) {
        config = set_category_override(std::move(config), url,
                                       cats.get<std::vector<std::string>>(), taxonomy);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidData, std::string("bad policy document: ") + e.what());
  }
  return config;
}

PolicyStore::PolicyStore(const Taxonomy& taxonomy, std::optional<std::filesystem::path> path)
    : taxonomy_(taxonomy),
      path_(std::move(path)),
      current_(std::make_shared<const PolicyConfig>()) {}

std::unique_ptr<PolicyStore> PolicyStore::open(const Taxonomy& taxonomy,
                                               const std::filesystem::path& path) {
  auto store = std::make_unique<PolicyStore>(taxonomy, path);
  if (std::filesystem::exists(path)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidData, path.string() + ": " + e.what());
    }
    store->current_ = std::make_shared<const PolicyConfig>(policy_from_json(doc, taxonomy));
  }
  return store;
}

std::shared_ptr<const PolicyConfig> PolicyStore::snapshot() const {
  std::shared_lock lock(read_mutex_);
  return current_;
}

template <class Fn>
void PolicyStore::update(Fn&& fn) {
  std::lock_guard writer(write_mutex_);
  auto next = std::make_shared<const PolicyConfig>(fn(PolicyConfig(*snapshot())));
  if (path_) write_file_atomic(*path_, policy_to_json(*next).dump(2) + "\n");
  std::unique_lock lock(read_mutex_);
  current_ = std::move(next);
}

void PolicyStore::set_category_blocked(const std::string& category, bool blocked) {
  update([&](PolicyConfig c) {
    return trackwall::set_category_blocked(std::move(c), category, blocked, taxonomy_);
  });
}

void PolicyStore::set_blocked_categories(const std::vector<std::string>& categories) {
  update([&](PolicyConfig c) {
    return trackwall::set_blocked_categories(std::move(c), categories, taxonomy_);
  });
}

void PolicyStore::set_url_policy(std::string_view url, UrlVerdict verdict) {
  update([&](PolicyConfig c) { return trackwall::set_url_policy(std::move(c), url, verdict); });
}

void PolicyStore::set_category_override(std::string_view url,
                                        const std::vector<std::string>& categories) {
  update([&](PolicyConfig c) {
    return trackwall::set_category_override(std::move(c), url, categories, taxonomy_);
  });
}

void PolicyStore::clear_category_override(std::string_view url) {
  update([&](PolicyConfig c) { return trackwall::clear_category_override(std::move(c), url); });
}

void PolicyStore::replace(PolicyConfig config) {
  update([&](PolicyConfig) { return std::move(config); });
}

std::optional<std::vector<std::string>> PolicyStore::override_for(
    const std::string& normalized_url) const {
  const auto config = snapshot();
  const auto it = config->category_overrides.find(normalized_url);
  if (it == config->category_overrides.end()) return std::nullopt;
  return it->second;
}

}  // namespace trackwall
