#include "trackwall/events.hpp"

#include <algorithm>
#include <cstdio>

#include "trackwall/canonical_json.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {

std::string page_hash(std::string_view normalized_url) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : normalized_url) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void add_unique(std::vector<std::string>& list, const std::string& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

nlohmann::ordered_json event_to_json(const BrowsingEvent& e) {
  nlohmann::ordered_json j;
  j["ts"] = e.timestamp;
  if (e.user) j["user"] = *e.user;
  j["page"] = e.page_hash;
  j["categories"] = e.categories;
  j["source"] = to_string(e.source);
  j["verdict"] = to_string(e.verdict);
  j["reason"] = to_string(e.reason);
  j["matched"] = e.matched_categories;
  j["thirdParties"] = e.third_parties;
  j["trackers"] = e.trackers;
  j["blocked"] = e.blocked;
  j["iframes"] = e.iframes;
  return j;
}

std::string event_to_line(const BrowsingEvent& event) {
  return dump_canonical(event_to_json(event));
}

BrowsingEvent event_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& why) -> BrowsingEvent {
    throw Error(ErrorCode::kMalformedRecord, "bad event: " + why);
  };
  if (!j.is_object()) return fail("not an object");
  BrowsingEvent e;
  try {
    e.timestamp = j.at("ts").get<std::int64_t>();
    if (j.contains("user")) e.user = j.at("user").get<std::string>();
    e.page_hash = j.at("page").get<std::string>();
    e.categories = j.at("categories").get<std::vector<std::string>>();
    const auto source = assignment_source_from_string(j.at("source").get<std::string>());
    const auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
    const auto reason = reason_from_string(j.at("reason").get<std::string>());
    if (!source || !verdict || !reason) return fail("unknown enum value");
    e.source = *source;
    e.verdict = *verdict;
    e.reason = *reason;
    e.matched_categories = j.value("matched", std::vector<std::string>{});
    e.third_parties = j.at("thirdParties").get<std::vector<std::string>>();
    e.trackers = j.value("trackers", std::vector<std::string>{});
    e.blocked = j.at("blocked").get<std::vector<std::string>>();
    e.iframes = j.at("iframes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    return fail(ex.what());
  }
  if (e.categories.size() > kMaxCategoriesPerPage) return fail("more than 3 categories");
  for (const auto& b : e.blocked) {
    if (std::find(e.third_parties.begin(), e.third_parties.end(), b) == e.third_parties.end()) {
      return fail("blocked domain not among third parties: " + b);
    }
  }
  return e;
}

EventLog::EventLog(const std::filesystem::path& path) {
  out_.emplace(path, std::ios::binary | std::ios::app);
  if (!*out_) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string());
}

void EventLog::append(const BrowsingEvent& event) {
  std::lock_guard lock(mutex_);
  events_.push_back(event);
  if (out_) {
    *out_ << event_to_line(event) << '\n';
    out_->flush();
  }
}

std::vector<BrowsingEvent> EventLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

}  // namespace trackwall
