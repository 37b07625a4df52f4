#include "trackwall/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "trackwall/canonical_json.hpp"
#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/url.hpp"

namespace trackwall {

AdDomainList::AdDomainList(std::set<std::string> domains) : domains_(std::move(domains)) {}

AdDomainList AdDomainList::load(const std::filesystem::path& path) {
  std::set<std::string> domains;
  for (const auto& line : read_data_lines(path)) domains.insert(ascii_lower(trim(line)));
  if (domains.empty()) throw Error(ErrorCode::kInvalidData, path.string() + " lists no domains");
  return AdDomainList(std::move(domains));
}

LoadedEvents parse_events(std::istream& in) {
  LoadedEvents out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception&) {
      ++out.skipped;
    } catch (const Error&) {
      ++out.skipped;
    }
  }
  return out;
}

LoadedEvents load_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path.string());
  return parse_events(in);
}

namespace {

std::optional<std::string> ad_domain_of(const std::string& iframe_url, const AdDomainList& ads,
                                        const PublicSuffixList& psl) {
  const auto host = url_host(iframe_url);
  if (!host) return std::nullopt;
  auto domain = psl.registrable_domain(*host);
  if (!ads.contains(domain)) return std::nullopt;
  return domain;
}

double percent(std::size_t num, std::size_t den) {
  return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

struct Moments {
  std::optional<double> mean;
  std::optional<double> stddev;
};

Moments population_moments(const std::vector<std::size_t>& values) {
  if (values.empty()) return {};
  std::size_t sum = 0;
  for (auto v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double mean = static_cast<double>(sum) / n;
  double acc = 0.0;
  for (auto v : values) {
    const double d = static_cast<double>(v) - mean;
    acc += d * d;
  }
  return {mean, std::sqrt(acc / n)};
}

bool has_category(const BrowsingEvent& e, const std::string& category) {
  return std::find(e.categories.begin(), e.categories.end(), category) != e.categories.end();
}

TrackerSpread spread_of(const std::vector<const BrowsingEvent*>& events) {
  TrackerSpread s;
  std::vector<std::size_t> counts;
  std::set<std::string> distinct;
  for (const auto* e : events) {
    if (e->verdict == Verdict::kBlock) continue;
    counts.push_back(e->trackers.size());
    distinct.insert(e->trackers.begin(), e->trackers.end());
  }
  s.pages = counts.size();
  const auto m = population_moments(counts);
  s.mean = m.mean;
  s.stddev = m.stddev;
  s.distinct = distinct.size();
  return s;
}

std::vector<const BrowsingEvent*> pointers(const std::vector<BrowsingEvent>& events) {
  std::vector<const BrowsingEvent*> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(&e);
  return out;
}

std::vector<const BrowsingEvent*> in_category(const std::vector<const BrowsingEvent*>& events,
                                              const std::string& category) {
  std::vector<const BrowsingEvent*> out;
  for (const auto* e : events) {
    if (has_category(*e, category)) out.push_back(e);
  }
  return out;
}

std::vector<RankedDomain> rank(const std::map<std::string, std::size_t>& counts,
                               std::size_t denominator, std::size_t limit) {
  std::vector<RankedDomain> ranked;
  for (const auto& [domain, n] : counts) ranked.push_back({domain, n, percent(n, denominator)});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.domain < b.domain;
  });
  if (ranked.size() > limit) ranked.resize(limit);
  return ranked;
}

struct Block {
  CategoryReport row;
  std::size_t url_policy_block = 0;
  std::size_t url_policy_allow = 0;
};

Block summarize(const std::vector<const BrowsingEvent*>& events, const AdDomainList& ads,
                const PublicSuffixList& psl) {
  Block b;
  auto& r = b.row;
  std::set<std::string> pages;
  for (const auto* e : events) {
    ++r.pages_total;
    pages.insert(e->page_hash);
    if (e->verdict == Verdict::kBlock) ++r.pages_blocked;
    const auto ad = classify_ad_iframes(*e, ads, psl);
    r.ads_total += ad.total;
    r.ads_blocked += ad.blocked;
    if (e->reason == DecisionReason::kUrlOverride) {
      ++r.url_policy_pages;
      (e->verdict == Verdict::kBlock ? b.url_policy_block : b.url_policy_allow)++;
    }
  }
  r.pages_distinct = pages.size();
  const auto spread = spread_of(events);
  r.pages_analyzed = spread.pages;
  r.avg_trackers = spread.mean;
  r.std_trackers = spread.stddev;
  r.distinct_trackers = spread.distinct;
  return b;
}

}  // namespace

AdCounts classify_ad_iframes(const BrowsingEvent& event, const AdDomainList& ads,
                             const PublicSuffixList& psl) {
  AdCounts counts;
  for (const auto& url : event.iframes) {
    if (ad_domain_of(url, ads, psl)) ++counts.total;
  }
  if (event.verdict == Verdict::kBlock) counts.blocked = counts.total;
  return counts;
}

TrackerStats tracker_stats(const std::vector<BrowsingEvent>& events, const Taxonomy& taxonomy) {
  TrackerStats stats;
  const auto all = pointers(events);
  stats.overall = spread_of(all);
  for (const auto& c : taxonomy.top_categories()) {
    stats.per_category.emplace_back(c, spread_of(in_category(all, c)));
  }
  return stats;
}

Report build_report(const std::vector<BrowsingEvent>& input, const AdDomainList& ads,
                    const PublicSuffixList& psl, const Taxonomy& taxonomy,
                    const ReportOptions& options) {
  auto events = pointers(input);
  if (options.min_pages > 0) {
    std::map<std::string, std::size_t> per_user;
    for (const auto* e : events) ++per_user[e->user.value_or("")];
    std::erase_if(events, [&](const BrowsingEvent* e) {
      return per_user[e->user.value_or("")] < options.min_pages;
    });
  }

  Report report;
  const auto overall = summarize(events, ads, psl);
  auto& o = report.overall;
  o.pages_total = overall.row.pages_total;
  o.pages_distinct = overall.row.pages_distinct;
  o.pages_blocked = overall.row.pages_blocked;
  o.pct_pages_blocked = percent(o.pages_blocked, o.pages_total);
  o.ads_total = overall.row.ads_total;
  o.ads_blocked = overall.row.ads_blocked;
  o.pct_ads_blocked = percent(o.ads_blocked, o.ads_total);
  o.pages_analyzed = overall.row.pages_analyzed;
  o.avg_trackers = overall.row.avg_trackers;
  o.std_trackers = overall.row.std_trackers;
  o.distinct_trackers = overall.row.distinct_trackers;
  o.url_policy_pages = overall.row.url_policy_pages;
  o.url_policy_block = overall.url_policy_block;
  o.url_policy_allow = overall.url_policy_allow;

  std::map<std::string, std::size_t> tracker_pages;
  std::map<std::string, std::size_t> ad_iframes;
  for (const auto* e : events) {
    if (e->verdict != Verdict::kBlock) {
      std::set<std::string> unique(e->trackers.begin(), e->trackers.end());
      for (const auto& d : unique) ++tracker_pages[d];
    }
    for (const auto& url : e->iframes) {
      if (auto d = ad_domain_of(url, ads, psl)) ++ad_iframes[*d];
    }
  }
  o.top_trackers = rank(tracker_pages, o.pages_analyzed, options.top_trackers);
  o.top_ad_domains = rank(ad_iframes, o.ads_total, options.top_ad_domains);

  for (const auto& c : taxonomy.top_categories()) {
    report.per_category.emplace_back(c, summarize(in_category(events, c), ads, psl).row);
  }
  return report;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> read_optional(const nlohmann::ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

nlohmann::ordered_json ranked_to_json(const std::vector<RankedDomain>& list, const char* count_key) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : list) {
    nlohmann::ordered_json item;
    item["domain"] = r.domain;
    item[count_key] = r.count;
    item["pct"] = r.pct;
    arr.push_back(std::move(item));
  }
  return arr;
}

std::vector<RankedDomain> ranked_from_json(const nlohmann::ordered_json& arr,
                                           const char* count_key) {
  std::vector<RankedDomain> out;
  for (const auto& item : arr) {
    out.push_back({item.at("domain").get<std::string>(), item.at(count_key).get<std::size_t>(),
                   item.at("pct").get<double>()});
  }
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string fixed(const std::optional<double>& v, int decimals) {
  return v ? fixed(*v, decimals) : std::string("-");
}

}  // namespace

nlohmann::ordered_json report_to_json(const Report& report) {
  const auto& o = report.overall;
  nlohmann::ordered_json overall;
  overall["pagesTotal"] = o.pages_total;
  overall["pagesDistinct"] = o.pages_distinct;
  overall["pagesBlocked"] = o.pages_blocked;
  overall["pctPagesBlocked"] = o.pct_pages_blocked;
  overall["adsTotal"] = o.ads_total;
  overall["adsBlocked"] = o.ads_blocked;
  overall["pctAdsBlocked"] = o.pct_ads_blocked;
  overall["pagesAnalyzed"] = o.pages_analyzed;
  overall["avgTrackers"] = optional_number(o.avg_trackers);
  overall["stdTrackers"] = optional_number(o.std_trackers);
  overall["distinctTrackers"] = o.distinct_trackers;
  overall["urlPolicyPages"] = o.url_policy_pages;
  overall["urlPolicyBlock"] = o.url_policy_block;
  overall["urlPolicyAllow"] = o.url_policy_allow;
  overall["topTrackers"] = ranked_to_json(o.top_trackers, "pages");
  overall["topAdDomains"] = ranked_to_json(o.top_ad_domains, "ads");

  nlohmann::ordered_json per_category = nlohmann::ordered_json::object();
  for (const auto& [name, r] : report.per_category) {
    nlohmann::ordered_json row;
    row["pagesTotal"] = r.pages_total;
    row["pagesDistinct"] = r.pages_distinct;
    row["pagesBlocked"] = r.pages_blocked;
    row["adsTotal"] = r.ads_total;
    row["adsBlocked"] = r.ads_blocked;
    row["pagesAnalyzed"] = r.pages_analyzed;
    row["avgTrackersPerPage"] = optional_number(r.avg_trackers);
    row["stdTrackersPerPage"] = optional_number(r.std_trackers);
    row["distinctTrackers"] = r.distinct_trackers;
    row["urlPolicyPages"] = r.url_policy_pages;
    per_category[name] = std::move(row);
  }

  nlohmann::ordered_json doc;
  doc["overall"] = std::move(overall);
  doc["perCategory"] = std::move(per_category);
  return doc;
}

Report report_from_json(const nlohmann::ordered_json& doc) {
  Report report;
  try {
    const auto& j = doc.at("overall");
    auto& o = report.overall;
    o.pages_total = j.at("pagesTotal").get<std::size_t>();
    o.pages_distinct = j.at("pagesDistinct").get<std::size_t>();
    o.pages_blocked = j.at("pagesBlocked").get<std::size_t>();
    o.pct_pages_blocked = j.at("pctPagesBlocked").get<double>();
    o.ads_total = j.at("adsTotal").get<std::size_t>();
    o.ads_blocked = j.at("adsBlocked").get<std::size_t>();
    o.pct_ads_blocked = j.at("pctAdsBlocked").get<double>();
    o.pages_analyzed = j.at("pagesAnalyzed").get<std::size_t>();
    o.avg_trackers = read_optional(j, "avgTrackers");
    o.std_trackers = read_optional(j, "stdTrackers");
    o.distinct_trackers = j.at("distinctTrackers").get<std::size_t>();
    o.url_policy_pages = j.at("urlPolicyPages").get<std::size_t>();
    o.url_policy_block = j.at("urlPolicyBlock").get<std::size_t>();
    o.url_policy_allow = j.at("urlPolicyAllow").get<std::size_t>();
    o.top_trackers = ranked_from_json(j.at("topTrackers"), "pages");
    o.top_ad_domains = ranked_from_json(j.at("topAdDomains"), "ads");

    for (const auto& [name, row] : doc.at("perCategory").items()) {
      CategoryReport r;
      r.pages_total = row.at("pagesTotal").get<std::size_t>();
      r.pages_distinct = row.at("pagesDistinct").get<std::size_t>();
      r.pages_blocked = row.at("pagesBlocked").get<std::size_t>();
      r.ads_total = row.at("adsTotal").get<std::size_t>();
      r.ads_blocked = row.at("adsBlocked").get<std::size_t>();
      r.pages_analyzed = row.at("pagesAnalyzed").get<std::size_t>();
      r.avg_trackers = read_optional(row, "avgTrackersPerPage");
      r.std_trackers = read_optional(row, "stdTrackersPerPage");
      r.distinct_trackers = row.at("distinctTrackers").get<std::size_t>();
      r.url_policy_pages = row.at("urlPolicyPages").get<std::size_t>();
      report.per_category.emplace_back(name, r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidData, std::string("bad report document: ") + e.what());
  }
  return report;
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "markdown-table" || name == "md") return ReportFormat::kMarkdown;
  throw Error(ErrorCode::kUnknownFormat, "unknown report format: " + std::string(name));
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return dump_canonical(report_to_json(report)) + "\n";

  const auto& o = report.overall;
  std::ostringstream md;
  md << "## Overall\n\n"
     << "| metric | value |\n|---|---|\n"
     << "| pages browsed | " << o.pages_total << " |\n"
     << "| distinct pages | " << o.pages_distinct << " |\n"
     << "| pages blocked | " << o.pages_blocked << " (" << fixed(o.pct_pages_blocked, 2)
     << "%) |\n"
     << "| ads (iframes) | " << o.ads_total << " |\n"
     << "| ads blocked | " << o.ads_blocked << " (" << fixed(o.pct_ads_blocked, 2) << "%) |\n"
     << "| trackers per allowed page | " << fixed(o.avg_trackers, 2) << " +/- "
     << fixed(o.std_trackers, 2) << " |\n"
     << "| distinct trackers | " << o.distinct_trackers << " |\n"
     << "| per-URL policy pages | " << o.url_policy_pages << " (block " << o.url_policy_block
     << ", allow " << o.url_policy_allow << ") |\n\n";

  md << "## Per category\n\n"
     << "| category | pages | distinct | blocked | ads | ads blocked | avg trackers | std "
        "trackers | distinct trackers | per-URL policies |\n"
     << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, r] : report.per_category) {
    md << "| " << name << " | " << r.pages_total << " | " << r.pages_distinct << " | "
       << r.pages_blocked << " | " << r.ads_total << " | " << r.ads_blocked << " | "
       << fixed(r.avg_trackers, 2) << " | " << fixed(r.std_trackers, 2) << " | "
       << r.distinct_trackers << " | " << r.url_policy_pages << " |\n";
  }

  md << "\n## Top ad domains (iframes)\n\n| rank | domain | share |\n|---|---|---|\n";
  for (std::size_t i = 0; i < o.top_ad_domains.size(); ++i) {
    const auto& d = o.top_ad_domains[i];
    md << "| " << i + 1 << " | " << d.domain << " | " << fixed(d.pct, 2) << "% |\n";
  }
  md << "\n## Top trackers (share of allowed pages)\n\n| rank | domain | share |\n|---|---|---|\n";
  for (std::size_t i = 0; i < o.top_trackers.size(); ++i) {
    const auto& d = o.top_trackers[i];
    md << "| " << i + 1 << " | " << d.domain << " | " << fixed(d.pct, 2) << "% |\n";
  }
  return md.str();
}

}  // namespace trackwall
