#include "trackwall/replay.hpp"

#include <fstream>

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/url.hpp"

namespace trackwall {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, "malformed record: " + what);
}

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const nlohmann::json& obj, const char* key) {
  std::vector<std::string> out;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) malformed(std::string(key) + " must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) malformed(std::string(key) + " entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

ReplayRecord parse_replay_record(const nlohmann::json& doc) {
  if (!doc.is_object()) malformed("not an object");
  ReplayRecord r;
  auto page = optional_string(doc, "page");
  if (!page) malformed("missing page");
  r.page = std::move(*page);
  r.html = optional_string(doc, "html");
  if (const auto f = doc.find("features"); f != doc.end() && !f->is_null()) {
    if (!f->is_object()) malformed("features must be an object");
    r.has_features = true;
    r.title = optional_string(*f, "title");
    r.keywords = string_list(*f, "keywords");
    r.body = optional_string(*f, "body");
    r.declared_category = optional_string(*f, "declaredCategory");
  }
  r.subresources = string_list(doc, "subresources");
  r.iframes = string_list(doc, "iframes");
  if (const auto ts = doc.find("ts"); ts != doc.end()) {
    if (!ts->is_number_integer()) malformed("ts must be an integer");
    r.timestamp = ts->get<std::int64_t>();
  }
  r.user = optional_string(doc, "user");
  return r;
}

BrowsingEvent replay_record(Gateway& gateway, const ReplayRecord& record, std::int64_t index,
                            const ReplayOptions& options) {
  const auto& res = gateway.resources();
  const auto normalized = normalize_url(record.page);

  PageFeatures features;
  if (!record.has_features && record.html) {
    RawPage raw{normalized, "text/html", read_file(options.html_root / *record.html), 200};
    features = extract_features(raw, res.psl, res.taxonomy);
  } else {
    features = features_from_url(normalized, res.psl);
    features.title = record.title.value_or("");
    features.keywords = record.keywords;
    features.body_text = record.body.value_or("");
    features.declared_category = record.declared_category;
  }
  // Logged iframes are authoritative over anything found in saved HTML.
  features.iframe_sources = record.iframes;

  auto ctx = gateway.begin_page(std::move(features), record.timestamp.value_or(index),
                                record.user);
  for (const auto& sub : record.subresources) {
    const auto host = ascii_lower(trim(sub));
    if (host.empty()) continue;
    gateway.on_request(ctx, host);
  }
  if (options.sink) options.sink->append(ctx.event);
  if (options.on_page) options.on_page(ctx);
  return std::move(ctx.event);
}

ReplayResult replay_stream(Gateway& gateway, std::istream& in, const ReplayOptions& options) {
  ReplayResult result;
  std::string line;
  std::int64_t index = -1;
  while (std::getline(in, line)) {
    ++index;
    if (trim(line).empty()) continue;
    try {
      const auto record = parse_replay_record(nlohmann::json::parse(line));
      result.events.push_back(replay_record(gateway, record, index, options));
    } catch (const nlohmann::json::exception&) {
      ++result.skipped;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedRecord && e.code() != ErrorCode::kMalformedUrl) throw;
      ++result.skipped;
    }
  }
  return result;
}

ReplayResult replay_file(Gateway& gateway, const std::filesystem::path& path,
                         ReplayOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path.string());
  if (options.html_root.empty()) options.html_root = path.parent_path();
  return replay_stream(gateway, in, options);
}

}  // namespace trackwall
