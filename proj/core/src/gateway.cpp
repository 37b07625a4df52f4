#include "trackwall/gateway.hpp"

#include "trackwall/errors.hpp"

namespace trackwall {

std::unique_ptr<Resources> Resources::load(const std::filesystem::path& dir) {
  auto taxonomy = Taxonomy::load(dir);
  auto psl = PublicSuffixList::load(dir / "public_suffix_snapshot.dat");
  auto domains = DomainCategoryList::load(dir / "domains.tsv", taxonomy);
  auto lexicon = Lexicon::load(dir / "lexicon.tsv", taxonomy);
  auto tokenizer = Tokenizer::load(dir / "stopwords.txt");
  auto allowlist = AllowedDomains::load(dir / "allowed_domains.txt");
  auto ads = AdDomainList::load(dir / "ad_domains.txt");
  return std::unique_ptr<Resources>(new Resources{
      std::move(taxonomy), std::move(psl), std::move(domains), std::move(lexicon),
      std::move(tokenizer), std::move(allowlist), std::move(ads)});
}

Gateway::Gateway(const Resources& resources, PolicyStore& policy, TrackerRegistry& registry,
                 CategorizerOptions options)
    : resources_(resources),
      policy_(policy),
      registry_(registry),
      categorizer_(resources.taxonomy, resources.domains, resources.lexicon, resources.tokenizer,
                   resources.psl, options) {}

PageContext Gateway::begin_page(PageFeatures features, std::int64_t timestamp,
                                std::optional<std::string> user) {
  PageContext ctx;
  ctx.started = std::chrono::steady_clock::now();
  const auto config = policy_.snapshot();
  ctx.assignment = categorizer_.categorize_page(
      features, [&config](const std::string& url) -> std::optional<std::vector<std::string>> {
        const auto it = config->category_overrides.find(url);
        if (it == config->category_overrides.end()) return std::nullopt;
        return it->second;
      });
  ctx.decision = resolve(features.normalized_url, ctx.assignment, *config);

  auto& e = ctx.event;
  e.timestamp = timestamp;
  e.user = std::move(user);
  e.page_hash = page_hash(features.normalized_url);
  e.categories = ctx.assignment.categories;
  e.source = ctx.assignment.source;
  e.verdict = ctx.decision.verdict;
  e.reason = ctx.decision.reason;
  e.matched_categories = ctx.decision.matched_categories;
  e.iframes = features.iframe_sources;
  ctx.features = std::move(features);

  ++pages_;
  if (ctx.decision.verdict == Verdict::kBlock) ++pages_blocked_;
  return ctx;
}

RequestVerdict Gateway::on_request(PageContext& ctx, std::string_view host) {
  ++requests_;
  auto v = evaluate_request(host, ctx.features.hostname, ctx.decision, registry_,
                            resources_.allowlist, resources_.psl);
  if (!v.third_party) return v;
  ++third_party_;
  auto& e = ctx.event;
  add_unique(e.third_parties, v.domain);
  if (v.tracker) add_unique(e.trackers, v.domain);
  if (v.blocked) {
    add_unique(e.blocked, v.domain);
    ++requests_blocked_;
  }
  return v;
}

void Gateway::on_orphan_request() { ++requests_; }

GatewayMetrics Gateway::metrics() const {
  GatewayMetrics m;
  m.pages = pages_.load();
  m.pages_blocked = pages_blocked_.load();
  m.requests = requests_.load();
  m.third_party_requests = third_party_.load();
  m.requests_blocked = requests_blocked_.load();
  m.scoring_runs = categorizer_.scoring_invocations();
  m.cache_entries = categorizer_.cache_size();
  const auto obs = registry_.observations();
  m.known_third_parties = obs.size();
  for (const auto& [domain, firsts] : obs) {
    if (firsts.size() >= kTrackerFirstPartyThreshold) ++m.trackers;
  }
  return m;
}

PageSessions::PageSessions(EventLog* sink, std::size_t pages_per_client)
    : sink_(sink), window_(pages_per_client ? pages_per_client : 1) {}

void PageSessions::open(const std::string& client, PageContext ctx) {
  auto session = std::make_shared<Session>();
  session->ctx = std::move(ctx);
  std::shared_ptr<Session> evicted;
  {
    std::lock_guard lock(mutex_);
    auto& pages = by_client_[client];
    pages.push_back(std::move(session));
    if (pages.size() > window_) {
      evicted = std::move(pages.front());
      pages.pop_front();
    }
  }
  if (evicted) emit(*evicted);
}

std::shared_ptr<PageSessions::Session> PageSessions::find(
    const std::string& client, const std::optional<std::string>& referer) const {
  if (referer) {
    if (auto s = match(client, *referer)) return s;
  }
  std::lock_guard lock(mutex_);
  const auto it = by_client_.find(client);
  if (it == by_client_.end() || it->second.empty()) return nullptr;
  return it->second.back();
}

std::shared_ptr<PageSessions::Session> PageSessions::current(const std::string& client) const {
  return find(client, std::nullopt);
}

std::shared_ptr<PageSessions::Session> PageSessions::match(const std::string& client,
                                                          const std::string& url) const {
  std::lock_guard lock(mutex_);
  const auto it = by_client_.find(client);
  if (it == by_client_.end()) return nullptr;
  for (auto s = it->second.rbegin(); s != it->second.rend(); ++s) {
    if ((*s)->ctx.features.normalized_url == url) return *s;
  }
  return nullptr;
}

std::vector<std::shared_ptr<PageSessions::Session>> PageSessions::all() const {
  std::lock_guard lock(mutex_);
  std::vector<std::shared_ptr<Session>> out;
  for (const auto& [client, pages] : by_client_) out.insert(out.end(), pages.begin(), pages.end());
  return out;
}

std::vector<BrowsingEvent> PageSessions::open_events() const {
  std::vector<BrowsingEvent> out;
  for (const auto& s : all()) {
    std::lock_guard lock(s->mutex);
    out.push_back(s->ctx.event);
  }
  return out;
}

std::vector<std::string> PageSessions::clients() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [client, pages] : by_client_) {
    if (!pages.empty()) out.push_back(client);
  }
  return out;
}

void PageSessions::flush() {
  std::map<std::string, std::deque<std::shared_ptr<Session>>> all;
  {
    std::lock_guard lock(mutex_);
    all.swap(by_client_);
  }
  for (auto& [client, pages] : all) {
    for (auto& s : pages) emit(*s);
  }
}

void PageSessions::emit(Session& session) {
  if (!sink_) return;
  std::lock_guard lock(session.mutex);
  sink_->append(session.ctx.event);
}

nlohmann::ordered_json assignment_to_json(const CategoryAssignment& assignment) {
  nlohmann::ordered_json j;
  j["categories"] = assignment.categories;
  j["source"] = to_string(assignment.source);
  return j;
}

nlohmann::ordered_json decision_to_json(const PolicyDecision& decision) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(decision.verdict);
  j["reason"] = to_string(decision.reason);
  j["matched"] = decision.matched_categories;
  return j;
}

nlohmann::ordered_json metrics_to_json(const GatewayMetrics& m) {
  nlohmann::ordered_json j;
  j["pages"] = m.pages;
  j["pagesBlocked"] = m.pages_blocked;
  j["requests"] = m.requests;
  j["thirdPartyRequests"] = m.third_party_requests;
  j["requestsBlocked"] = m.requests_blocked;
  j["scoringRuns"] = m.scoring_runs;
  j["cacheEntries"] = m.cache_entries;
  j["knownThirdParties"] = m.known_third_parties;
  j["trackers"] = m.trackers;
  return j;
}

}  // namespace trackwall
