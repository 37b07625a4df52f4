#include "trackwall/public_suffix.hpp"

#include <algorithm>
#include <vector>

#include "trackwall/data_files.hpp"

namespace trackwall {

bool is_ip_literal(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;
  int dots = 0;
  int digits = 0;
  for (char c : host) {
    if (c == '.') {
      if (digits == 0 || digits > 3) return false;
      ++dots;
      digits = 0;
    } else if (c >= '0' && c <= '9') {
      ++digits;
    } else {
      return false;
    }
  }
  return dots == 3 && digits >= 1 && digits <= 3;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.starts_with("//")) continue;
    line = line.substr(0, line.find_first_of(" \t"));
    line = ascii_lower(line);
    if (line.starts_with("!")) {
      psl.exceptions_.insert(line.substr(1));
    } else if (line.starts_with("*.")) {
      psl.wildcards_.insert(line.substr(2));
    } else {
      psl.rules_.insert(line);
    }
  }
  return psl;
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
  std::string h = ascii_lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (h.empty() || h.find('.') == std::string::npos || is_ip_literal(h)) return h;

  const auto labels = split(h, '.');
  const std::size_t n = labels.size();
  // suffixes[i] = labels[i..n) joined
  std::vector<std::string> suffixes(n);
  suffixes[n - 1] = labels[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) suffixes[i] = labels[i] + "." + suffixes[i + 1];

  std::size_t suffix_labels = 1;
  std::size_t exception_labels = 0;
  bool exception = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t count = n - i;
    if (exceptions_.contains(suffixes[i])) {
      exception_labels = exception ? std::max(exception_labels, count - 1) : count - 1;
      exception = true;
    }
    if (rules_.contains(suffixes[i])) suffix_labels = std::max(suffix_labels, count);
    if (i + 1 < n && wildcards_.contains(suffixes[i + 1])) {
      suffix_labels = std::max(suffix_labels, count);
    }
  }
  if (exception) suffix_labels = exception_labels;
  if (suffix_labels >= n) return h;
  return suffixes[n - suffix_labels - 1];
}

}  // namespace trackwall
