#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace trackwall {

// Absolute URL split at the authority boundary. `target` is the path plus
// query, always starting with '/'; the fragment is dropped at parse time.
struct Url {
  std::string scheme;    // lowercase
  std::string userinfo;  // verbatim, including the trailing '@' when present
  std::string host;      // lowercase; IPv6 literals keep their brackets
  std::string port;      // empty when absent or equal to the scheme default
  std::string target;

  std::string str() const;
  std::string authority() const;
};

// nullopt when `text` is not an absolute `scheme://authority` URL.
std::optional<Url> parse_url(std::string_view text);

// Lowercase scheme and host, default port and fragment removed, path and
// query verbatim. Throws Error(kMalformedUrl).
std::string normalize_url(std::string_view text);

// Hostname of an absolute URL, nullopt when it does not parse.
std::optional<std::string> url_host(std::string_view text);

// Resolves `reference` (as found in an href/src attribute) against `base`.
// Returns nullopt for references that do not name a network resource
// (javascript:, data:, about:, mailto:, empty).
std::optional<std::string> resolve_url(std::string_view base, std::string_view reference);

std::string percent_decode(std::string_view text);
std::string percent_encode(std::string_view text);

}  // namespace trackwall
