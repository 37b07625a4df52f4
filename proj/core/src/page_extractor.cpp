#include "trackwall/page.hpp"

#include <string_view>
#include <unordered_map>

#include "trackwall/data_files.hpp"
#include "trackwall/text.hpp"
#include "trackwall/url.hpp"

namespace trackwall {
namespace {

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_html_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::size_t find_ci(std::string_view text, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
    if (iequals_prefix(text, i, needle)) return i;
  }
  return std::string_view::npos;
}

std::string decode_entities(std::string_view text) {
  static const std::unordered_map<std::string_view, std::string_view> kNamed = {
      {"amp", "&"},  {"lt", "<"},    {"gt", ">"},    {"quot", "\""},
      {"apos", "'"}, {"nbsp", " "},  {"mdash", " "}, {"ndash", " "},
      {"copy", " "}, {"hellip", " "}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out += text[i];
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    const auto name = text.substr(i + 1, semi - i - 1);
    if (!name.empty() && name.front() == '#') {
      char32_t cp = 0;
      bool ok = name.size() > 1;
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      for (std::size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
        const char c = name[k];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0 || cp > 0x10FFFF) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(digit);
      }
      if (ok && cp > 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        append_utf8(out, cp);
        i = semi;
        continue;
      }
      out += '&';
      continue;
    }
    if (const auto it = kNamed.find(name); it != kNamed.end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out += '&';
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_html_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

struct Tag {
  std::string name;  // lowercase, no leading '/'
  bool closing = false;
  std::unordered_map<std::string, std::string> attrs;  // lowercase names
  std::size_t end = 0;  // index just past '>' (or text size)
};

// Parses a tag starting at text[pos] == '<'. Returns false for '<' that does
// not open a tag, in which case the caller treats it as text.
bool parse_tag(std::string_view text, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < text.size() && text[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const auto name_start = i;
  while (i < text.size() && !is_html_space(text[i]) && text[i] != '>' && text[i] != '/') ++i;
  if (i == name_start) return false;
  const char first = text[name_start];
  if (!((first >= 'a' && first <= 'z') || (first >= 'A' && first <= 'Z'))) return false;
  tag.name = ascii_lower(text.substr(name_start, i - name_start));

  while (i < text.size() && text[i] != '>') {
    if (is_html_space(text[i]) || text[i] == '/') {
      ++i;
      continue;
    }
    const auto attr_start = i;
    while (i < text.size() && !is_html_space(text[i]) && text[i] != '>' && text[i] != '=' &&
           text[i] != '/')
      ++i;
    auto attr = ascii_lower(text.substr(attr_start, i - attr_start));
    if (attr.empty()) {
      ++i;
      continue;
    }
    while (i < text.size() && is_html_space(text[i])) ++i;
    std::string value;
    if (i < text.size() && text[i] == '=') {
      ++i;
      while (i < text.size() && is_html_space(text[i])) ++i;
      if (i < text.size() && (text[i] == '"' || text[i] == '\'')) {
        const char quote = text[i++];
        const auto close = text.find(quote, i);
        const auto stop = close == std::string_view::npos ? text.size() : close;
        value = text.substr(i, stop - i);
        i = close == std::string_view::npos ? text.size() : close + 1;
      } else {
        const auto v_start = i;
        while (i < text.size() && !is_html_space(text[i]) && text[i] != '>') ++i;
        value = text.substr(v_start, i - v_start);
      }
    }
    tag.attrs.emplace(std::move(attr), decode_entities(value));
  }
  tag.end = i < text.size() ? i + 1 : text.size();
  return true;
}

std::string attr_or_empty(const Tag& tag, const std::string& name) {
  const auto it = tag.attrs.find(name);
  return it == tag.attrs.end() ? std::string() : it->second;
}

}  // namespace

bool is_html_content_type(std::string_view content_type) {
  const auto lower = ascii_lower(content_type);
  return lower.find("text/html") != std::string::npos ||
         lower.find("application/xhtml+xml") != std::string::npos;
}

PageFeatures features_from_url(std::string_view url, const PublicSuffixList& psl) {
  PageFeatures f;
  if (auto parsed = parse_url(url)) {
    f.normalized_url = parsed->str();
    f.hostname = parsed->host;
    f.registrable_domain = psl.registrable_domain(parsed->host);
  } else {
    f.normalized_url = std::string(url);
  }
  return f;
}

PageFeatures extract_features(const RawPage& page, const PublicSuffixList& psl,
                              const Taxonomy& taxonomy, const ExtractOptions& options) {
  PageFeatures f = features_from_url(page.url, psl);

  std::string_view html(page.body);
  if (html.size() > options.body_cap) html = html.substr(0, options.body_cap);
  bool treat_as_html = is_html_content_type(page.content_type);
  if (!treat_as_html && trim(page.content_type).empty()) {
    const auto head = trim(html.substr(0, 512));
    treat_as_html = !head.empty() && head.front() == '<';
  }
  if (!treat_as_html) return f;

  std::string base = f.normalized_url;
  std::string body;
  std::string title;
  bool have_title = false;

  std::size_t i = 0;
  while (i < html.size()) {
    const auto lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      body += html.substr(i);
      break;
    }
    body += html.substr(i, lt - i);
    if (html.compare(lt, 4, "<!--") == 0) {
      const auto close = html.find("-->", lt + 4);
      i = close == std::string_view::npos ? html.size() : close + 3;
      continue;
    }
    if (lt + 1 < html.size() && (html[lt + 1] == '!' || html[lt + 1] == '?')) {
      const auto close = html.find('>', lt);
      i = close == std::string_view::npos ? html.size() : close + 1;
      continue;
    }
    Tag tag;
    if (!parse_tag(html, lt, tag)) {
      body += '<';
      i = lt + 1;
      continue;
    }
    i = tag.end;
    if (tag.closing) {
      body += ' ';
      continue;
    }

    if (tag.name == "script" || tag.name == "style" || tag.name == "template" ||
        tag.name == "title" || tag.name == "textarea") {
      const auto close = find_ci(html, "</" + tag.name, i);
      const auto stop = close == std::string_view::npos ? html.size() : close;
      if (tag.name == "title" && !have_title) {
        title = collapse_whitespace(decode_entities(html.substr(i, stop - i)));
        have_title = true;
      } else if (tag.name == "textarea") {
        body += html.substr(i, stop - i);
      }
      if (close == std::string_view::npos) {
        i = html.size();
      } else {
        const auto gt = html.find('>', close);
        i = gt == std::string_view::npos ? html.size() : gt + 1;
      }
      body += ' ';
      continue;
    }
    if (tag.name == "meta") {
      const auto name = ascii_lower(trim(attr_or_empty(tag, "name")));
      const auto content = attr_or_empty(tag, "content");
      if (name == "keywords") {
        for (const auto& k : split(content, ',')) {
          auto kw = trim(k);
          if (!kw.empty()) f.keywords.push_back(std::move(kw));
        }
      } else if (name == "page-category" && !f.declared_category) {
        auto declared = ascii_lower(trim(content));
        if (taxonomy.contains(declared)) f.declared_category = std::move(declared);
      }
      continue;
    }
    if (tag.name == "base") {
      if (auto resolved = resolve_url(base, attr_or_empty(tag, "href"))) base = *resolved;
      continue;
    }
    if (tag.name == "iframe") {
      if (auto src = resolve_url(base, attr_or_empty(tag, "src"))) {
        f.iframe_sources.push_back(std::move(*src));
      }
      continue;
    }
    // Block-level boundaries separate words.
    body += ' ';
  }

  f.title = std::move(title);
  f.body_text = collapse_whitespace(decode_entities(body));
  return f;
}

}  // namespace trackwall
