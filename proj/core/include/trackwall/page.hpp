#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trackwall/public_suffix.hpp"
#include "trackwall/taxonomy.hpp"

namespace trackwall {

inline constexpr std::size_t kDefaultBodyCap = 2 * 1024 * 1024;

struct RawPage {
  std::string url;
  std::string content_type;
  std::string body;
  int fetch_status = 200;
};

// Everything the categorizer looks at for one page load.
struct PageFeatures {
  std::string normalized_url;
  std::string hostname;
  std::string registrable_domain;
  std::string title;
  std::vector<std::string> keywords;
  std::string body_text;
  std::optional<std::string> declared_category;
  std::vector<std::string> iframe_sources;
};

// URL-derived fields only. A URL that does not parse is kept verbatim with
// an empty hostname.
PageFeatures features_from_url(std::string_view url, const PublicSuffixList& psl);

struct ExtractOptions {
  std::size_t body_cap = kDefaultBodyCap;
};

// Tolerant tag-level HTML scan. Never throws on any byte input.
//   title           first <title> text
//   keywords        comma-split <meta name="keywords">
//   body_text       visible text, script/style/template stripped
//   iframe_sources  absolute src of every <iframe>
//   declared_category  <meta name="page-category" content="..."> when it
//                      names a top-level category
PageFeatures extract_features(const RawPage& page, const PublicSuffixList& psl,
                              const Taxonomy& taxonomy, const ExtractOptions& options = {});

bool is_html_content_type(std::string_view content_type);

}  // namespace trackwall
