#include "trackwall/url.hpp"

#include <vector>

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {
namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool valid_scheme(std::string_view s) {
  if (s.empty() || !is_alpha(s.front())) return false;
  for (char c : s) {
    if (!is_alpha(c) && !is_digit(c) && c != '+' && c != '-' && c != '.') return false;
  }
  return true;
}

std::string_view default_port(std::string_view scheme) {
  if (scheme == "http") return "80";
  if (scheme == "https") return "443";
  return {};
}

// RFC 3986 section 5.2.4.
std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string> out;
  const bool absolute = !path.empty() && path.front() == '/';
  const auto parts = split(path, '/');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& seg = parts[i];
    if (i == 0 && absolute) continue;
    if (seg == ".") {
      if (i + 1 == parts.size()) out.emplace_back();
      continue;
    }
    if (seg == "..") {
      if (!out.empty()) out.pop_back();
      if (i + 1 == parts.size()) out.emplace_back();
      continue;
    }
    out.push_back(seg);
  }
  std::string result = absolute ? "/" : "";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) result += '/';
    result += out[i];
  }
  return result;
}

}  // namespace

std::string Url::authority() const {
  std::string out = userinfo + host;
  if (!port.empty()) out += ":" + port;
  return out;
}

std::string Url::str() const { return scheme + "://" + authority() + target; }

std::optional<Url> parse_url(std::string_view text) {
  for (char c : text) {
    if (is_space(c)) return std::nullopt;
  }
  const auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  if (!valid_scheme(text.substr(0, sep))) return std::nullopt;

  Url url;
  url.scheme = ascii_lower(text.substr(0, sep));
  auto rest = text.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    rest = rest.substr(0, hash);
  }
  const auto end = std::min(rest.find('/'), rest.find('?'));
  auto authority = rest.substr(0, std::min(end, rest.size()));
  const auto tail = end == std::string_view::npos ? std::string_view{} : rest.substr(end);

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    url.userinfo = std::string(authority.substr(0, at + 1));
    authority = authority.substr(at + 1);
  }

  std::string_view host;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    const auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return std::nullopt;
      port = after.substr(1);
    }
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  } else {
    host = authority;
  }
  if (host.empty()) return std::nullopt;
  if (!port.empty()) {
    if (port.size() > 5) return std::nullopt;
    for (char c : port) {
      if (!is_digit(c)) return std::nullopt;
    }
    if (std::stoi(std::string(port)) > 65535) return std::nullopt;
  }

  url.host = ascii_lower(host);
  if (port != default_port(url.scheme)) url.port = std::string(port);
  url.target = tail.empty() || tail.front() != '/' ? "/" + std::string(tail) : std::string(tail);
  return url;
}

std::string normalize_url(std::string_view text) {
  auto url = parse_url(text);
  if (!url) throw Error(ErrorCode::kMalformedUrl, "malformed url: " + std::string(text));
  return url->str();
}

std::optional<std::string> url_host(std::string_view text) {
  auto url = parse_url(text);
  if (!url) return std::nullopt;
  return url->host;
}

std::optional<std::string> resolve_url(std::string_view base, std::string_view reference) {
  const auto ref = trim(reference);
  if (ref.empty()) return std::nullopt;
  if (auto absolute = parse_url(ref)) return absolute->str();

  // Any other "scheme:" reference (javascript:, data:, mailto:, about:).
  if (const auto colon = ref.find(':'); colon != std::string::npos) {
    const auto first_delim = ref.find_first_of("/?#");
    if (colon < first_delim && valid_scheme(std::string_view(ref).substr(0, colon))) {
      return std::nullopt;
    }
  }

  auto base_url = parse_url(base);
  if (!base_url) return std::nullopt;
  for (char c : ref) {
    if (is_space(c)) return std::nullopt;
  }

  if (ref.starts_with("//")) {
    auto resolved = parse_url(base_url->scheme + ":" + ref);
    if (!resolved) return std::nullopt;
    return resolved->str();
  }

  std::string target;
  const auto base_target = base_url->target;
  const auto base_path = base_target.substr(0, base_target.find('?'));
  if (ref.front() == '#') {
    target = base_target;
  } else if (ref.front() == '?') {
    target = base_path + ref;
  } else {
    std::string path_part = ref;
    std::string query;
    if (const auto q = ref.find_first_of("?#"); q != std::string::npos) {
      path_part = ref.substr(0, q);
      query = ref.substr(q);
    }
    if (path_part.front() != '/') {
      path_part = base_path.substr(0, base_path.rfind('/') + 1) + path_part;
    }
    target = remove_dot_segments(path_part) + query;
  }
  auto resolved = parse_url(base_url->scheme + "://" + base_url->authority() + target);
  if (!resolved) return std::nullopt;
  return resolved->str();
}

std::string percent_decode(std::string_view text) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() && hex(text[i + 1]) >= 0 &&
        hex(text[i + 2]) >= 0) {
      out += static_cast<char>(hex(text[i + 1]) * 16 + hex(text[i + 2]));
      i += 2;
    } else {
      out += text[i];
    }
  }
  return out;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (is_alpha(static_cast<char>(c)) || is_digit(static_cast<char>(c)) || c == '-' ||
        c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

}  // namespace trackwall
