#include "trackwall/lexicon.hpp"

#include <charconv>
#include <cmath>

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {
namespace {

double parse_real(const std::string& text, const std::string& context) {
  const auto s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidData, "bad number '" + s + "' in " + context);
  }
  return value;
}

void require_category(const Taxonomy& taxonomy, const std::string& name,
                      const std::string& context) {
  if (!taxonomy.contains(name)) {
    throw Error(ErrorCode::kUnknownCategory, "unknown category '" + name + "' in " + context);
  }
}

}  // namespace

void Lexicon::add(std::string term, Entry entry, const Taxonomy& taxonomy) {
  const auto words = split(term, ' ');
  if (term.empty() || words.size() > 2 || term != ascii_lower(term)) {
    throw Error(ErrorCode::kInvalidData, "lexicon term must be a lowercase uni/bigram: " + term);
  }
  for (const auto& w : words) {
    if (w.empty()) throw Error(ErrorCode::kInvalidData, "empty token in lexicon term: " + term);
  }
  if (entry.idf < 0.0) throw Error(ErrorCode::kInvalidData, "negative idf for " + term);
  if (entry.category_weights.empty()) {
    throw Error(ErrorCode::kInvalidData, "lexicon term without categories: " + term);
  }
  for (const auto& [cat, w] : entry.category_weights) {
    require_category(taxonomy, cat, "lexicon term " + term);
    if (!(w > 0.0)) throw Error(ErrorCode::kInvalidData, "non-positive weight for " + term);
  }
  entries_.insert_or_assign(std::move(term), std::move(entry));
}

Lexicon Lexicon::parse(std::string_view text, const Taxonomy& taxonomy) {
  Lexicon lexicon;
  for (const auto& line : split_data_lines(text)) {
    const auto cols = split(line, '\t');
    if (cols.size() != 3) throw Error(ErrorCode::kInvalidData, "bad lexicon line: " + line);
    Entry entry;
    entry.idf = parse_real(cols[1], "lexicon line: " + line);
    for (const auto& part : split(cols[2], ',')) {
      const auto colon = part.rfind(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::kInvalidData, "bad category weight in: " + line);
      }
      entry.category_weights.emplace_back(trim(part.substr(0, colon)),
                                          parse_real(part.substr(colon + 1), line));
    }
    lexicon.add(cols[0], std::move(entry), taxonomy);
  }
  return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  return parse(read_file(path), taxonomy);
}

void DomainCategoryList::add(std::string key, std::vector<std::string> categories,
                             const Taxonomy& taxonomy) {
  key = ascii_lower(trim(key));
  if (key.empty() || key.find_first_of("/:") != std::string::npos) {
    throw Error(ErrorCode::kInvalidData, "domain list key must be a bare host: " + key);
  }
  if (categories.empty() || categories.size() > 3) {
    throw Error(ErrorCode::kInvalidData, "domain list entry needs 1-3 categories: " + key);
  }
  for (const auto& c : categories) require_category(taxonomy, c, "domain list entry " + key);
  entries_.insert_or_assign(std::move(key), std::move(categories));
}

DomainCategoryList DomainCategoryList::parse(std::string_view text, const Taxonomy& taxonomy) {
  DomainCategoryList list;
  for (const auto& line : split_data_lines(text)) {
    const auto cols = split(line, '\t');
    if (cols.size() != 2) throw Error(ErrorCode::kInvalidData, "bad domains.tsv line: " + line);
    std::vector<std::string> cats;
    for (const auto& c : split(cols[1], ',')) cats.push_back(trim(c));
    list.add(cols[0], std::move(cats), taxonomy);
  }
  return list;
}

DomainCategoryList DomainCategoryList::load(const std::filesystem::path& path,
                                            const Taxonomy& taxonomy) {
  return parse(read_file(path), taxonomy);
}

std::optional<std::vector<std::string>> categorize_by_domain(std::string_view hostname,
                                                             const DomainCategoryList& list,
                                                             const PublicSuffixList& psl) {
  const std::string host(hostname);
  if (const auto* hit = list.find(host)) return *hit;
  if (const auto* hit = list.find(psl.registrable_domain(host))) return *hit;
  return std::nullopt;
}

}  // namespace trackwall
