#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trackwall/analytics.hpp"
#include "trackwall/categorizer.hpp"
#include "trackwall/events.hpp"
#include "trackwall/lexicon.hpp"
#include "trackwall/page.hpp"
#include "trackwall/policy.hpp"
#include "trackwall/public_suffix.hpp"
#include "trackwall/taxonomy.hpp"
#include "trackwall/text.hpp"
#include "trackwall/tracker.hpp"

namespace trackwall {

// Everything loaded from the data directory. Immutable after load except for
// the allowlist, which can be reloaded in place.
struct Resources {
  Taxonomy taxonomy;
  PublicSuffixList psl;
  DomainCategoryList domains;
  Lexicon lexicon;
  Tokenizer tokenizer;
  AllowedDomains allowlist;
  AdDomainList ad_domains;

  // Throws Error(kFileUnreadable / kInvalidData) naming the offending file.
  static std::unique_ptr<Resources> load(const std::filesystem::path& data_dir);
};

// Per-page state between the navigation and its last subresource.
struct PageContext {
  PageFeatures features;
  CategoryAssignment assignment;
  PolicyDecision decision;
  BrowsingEvent event;
  std::chrono::steady_clock::time_point started;
};

struct GatewayMetrics {
  std::uint64_t pages = 0;
  std::uint64_t pages_blocked = 0;
  std::uint64_t requests = 0;
  std::uint64_t third_party_requests = 0;
  std::uint64_t requests_blocked = 0;
  std::uint64_t scoring_runs = 0;
  std::size_t cache_entries = 0;
  std::size_t known_third_parties = 0;
  std::size_t trackers = 0;
};

// Categorize, resolve, evaluate subresources and emit events. Shared by the
// proxy, the control API and offline replay.
class Gateway {
 public:
  Gateway(const Resources& resources, PolicyStore& policy, TrackerRegistry& registry,
          CategorizerOptions options = {});

  PageContext begin_page(PageFeatures features, std::int64_t timestamp,
                         std::optional<std::string> user = std::nullopt);

  // Evaluates one subresource host against the page and folds the outcome
  // into ctx.event.
  RequestVerdict on_request(PageContext& ctx, std::string_view host);

  // Host of a request with no page context: recorded nowhere, never blocked.
  void on_orphan_request();

  Categorizer& categorizer() noexcept { return categorizer_; }
  PolicyStore& policy() noexcept { return policy_; }
  TrackerRegistry& registry() noexcept { return registry_; }
  const Resources& resources() const noexcept { return resources_; }

  GatewayMetrics metrics() const;

 private:
  const Resources& resources_;
  PolicyStore& policy_;
  TrackerRegistry& registry_;
  Categorizer categorizer_;

  std::atomic<std::uint64_t> pages_{0};
  std::atomic<std::uint64_t> pages_blocked_{0};
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> third_party_{0};
  std::atomic<std::uint64_t> requests_blocked_{0};
};

// Open page contexts per client. By default a client has exactly one (its
// current page) and a new navigation replaces it; a wider window keeps older
// pages attributable by Referer. A page's event is emitted to the sink when
// it leaves the window or on flush.
class PageSessions {
 public:
  explicit PageSessions(EventLog* sink = nullptr, std::size_t pages_per_client = 1);

  struct Session {
    std::mutex mutex;
    PageContext ctx;
  };

  void open(const std::string& client, PageContext ctx);

  // Session whose page URL equals the normalized referer, else the newest.
  std::shared_ptr<Session> find(const std::string& client,
                                const std::optional<std::string>& referer) const;
  std::shared_ptr<Session> current(const std::string& client) const;
  // Open session for exactly this page URL, or null.
  std::shared_ptr<Session> match(const std::string& client, const std::string& url) const;
  std::vector<std::string> clients() const;
  std::vector<std::shared_ptr<Session>> all() const;
  // Copies of the events of every open page, oldest first per client.
  std::vector<BrowsingEvent> open_events() const;

  // Emits every open page and forgets them.
  void flush();

 private:
  void emit(Session& session);

  EventLog* sink_;
  std::size_t window_;
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<std::shared_ptr<Session>>> by_client_;
};

nlohmann::ordered_json assignment_to_json(const CategoryAssignment& assignment);
nlohmann::ordered_json decision_to_json(const PolicyDecision& decision);
nlohmann::ordered_json metrics_to_json(const GatewayMetrics& metrics);

}  // namespace trackwall
