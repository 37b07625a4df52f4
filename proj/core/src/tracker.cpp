#include "trackwall/tracker.hpp"

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {

bool is_third_party(std::string_view request_host, std::string_view page_host,
                    const PublicSuffixList& psl) {
  return psl.registrable_domain(request_host) != psl.registrable_domain(page_host);
}

TrackerRegistry::TrackerRegistry(TrackerRegistry&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  path_ = std::move(other.path_);
  observations_ = std::move(other.observations_);
}

TrackerRegistry& TrackerRegistry::operator=(TrackerRegistry&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    path_ = std::move(other.path_);
    observations_ = std::move(other.observations_);
  }
  return *this;
}

std::unique_ptr<TrackerRegistry> TrackerRegistry::open(const std::filesystem::path& path,
                                                       bool reset) {
  auto registry = std::make_unique<TrackerRegistry>(path);
  if (!reset && std::filesystem::exists(path)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidData, path.string() + ": " + e.what());
    }
    registry->observations_ = from_json(doc).observations_;
  }
  return registry;
}

std::size_t TrackerRegistry::record(const std::string& third, const std::string& first) {
  if (third == first) {
    throw Error(ErrorCode::kSameParty, "third party equals first party: " + third);
  }
  std::unique_lock lock(mutex_);
  auto& parties = observations_[third];
  parties.insert(first);
  return parties.size();
}

bool TrackerRegistry::is_tracker(const std::string& domain) const {
  return first_party_count(domain) >= kTrackerFirstPartyThreshold;
}

std::size_t TrackerRegistry::first_party_count(const std::string& domain) const {
  std::shared_lock lock(mutex_);
  const auto it = observations_.find(domain);
  return it == observations_.end() ? 0 : it->second.size();
}

std::set<std::string> TrackerRegistry::first_parties(const std::string& domain) const {
  std::shared_lock lock(mutex_);
  const auto it = observations_.find(domain);
  return it == observations_.end() ? std::set<std::string>{} : it->second;
}

std::size_t TrackerRegistry::size() const {
  std::shared_lock lock(mutex_);
  return observations_.size();
}

std::map<std::string, std::set<std::string>> TrackerRegistry::observations() const {
  std::shared_lock lock(mutex_);
  return observations_;
}

nlohmann::ordered_json TrackerRegistry::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  std::shared_lock lock(mutex_);
  for (const auto& [third, firsts] : observations_) doc[third] = firsts;
  return doc;
}

TrackerRegistry TrackerRegistry::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidData, "registry must be a JSON object");
  TrackerRegistry registry;
  try {
    for (const auto& [third, firsts] : doc.items()) {
      auto& set = registry.observations_[third];
      for (const auto& f : firsts) {
        auto first = f.get<std::string>();
        if (first == third) throw Error(ErrorCode::kSameParty, "self observation for " + third);
        set.insert(std::move(first));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidData, std::string("bad registry: ") + e.what());
  }
  return registry;
}

void TrackerRegistry::save() const {
  if (!path_) return;
  write_file_atomic(*path_, to_json().dump(1) + "\n");
}

AllowedDomains::AllowedDomains(AllowedDomains&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  domains_ = std::move(other.domains_);
}

AllowedDomains& AllowedDomains::operator=(AllowedDomains&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    domains_ = std::move(other.domains_);
  }
  return *this;
}

AllowedDomains AllowedDomains::load(const std::filesystem::path& path) {
  AllowedDomains list;
  list.reload(path);
  return list;
}

void AllowedDomains::reload(const std::filesystem::path& path) {
  std::set<std::string> domains;
  for (const auto& line : read_data_lines(path)) domains.insert(ascii_lower(trim(line)));
  if (domains.empty()) throw Error(ErrorCode::kInvalidData, path.string() + " lists no domains");
  std::unique_lock lock(mutex_);
  domains_ = std::move(domains);
}

bool AllowedDomains::contains(const std::string& domain) const {
  std::shared_lock lock(mutex_);
  return domains_.contains(domain);
}

std::size_t AllowedDomains::size() const {
  std::shared_lock lock(mutex_);
  return domains_.size();
}

std::set<std::string> AllowedDomains::domains() const {
  std::shared_lock lock(mutex_);
  return domains_;
}

RequestVerdict evaluate_request(std::string_view request_host, std::string_view page_host,
                                const PolicyDecision& page_decision, TrackerRegistry& registry,
                                const AllowedDomains& allowlist, const PublicSuffixList& psl) {
  RequestVerdict v;
  v.domain = psl.registrable_domain(request_host);
  const auto first = psl.registrable_domain(page_host);
  v.third_party = v.domain != first;
  if (!v.third_party) return v;
  v.tracker = registry.record(v.domain, first) >= kTrackerFirstPartyThreshold;
  v.allowlisted = allowlist.contains(v.domain);
  v.blocked = page_decision.verdict == Verdict::kBlock && !v.allowlisted && v.tracker;
  return v;
}

bool should_block_request(std::string_view request_host, std::string_view page_host,
                          const PolicyDecision& page_decision, TrackerRegistry& registry,
                          const AllowedDomains& allowlist, const PublicSuffixList& psl) {
  return evaluate_request(request_host, page_host, page_decision, registry, allowlist, psl)
      .blocked;
}

}  // namespace trackwall
