#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trackwall/public_suffix.hpp"
#include "trackwall/taxonomy.hpp"

namespace trackwall {

// Unigram/bigram -> (idf, per-category weights).
class Lexicon {
 public:
  struct Entry {
    double idf = 0.0;
    std::vector<std::pair<std::string, double>> category_weights;
  };

  Lexicon() = default;

  // `<term>\t<idf>\t<cat>:<w>[,<cat>:<w>...]`
  static Lexicon load(const std::filesystem::path& path, const Taxonomy& taxonomy);
  static Lexicon parse(std::string_view text, const Taxonomy& taxonomy);

  void add(std::string term, Entry entry, const Taxonomy& taxonomy);

  const Entry* find(const std::string& term) const {
    const auto it = entries_.find(term);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

// Hostnames and registrable domains whose every page belongs to the listed
// categories.
class DomainCategoryList {
 public:
  DomainCategoryList() = default;

  // `<hostname-or-domain>\t<cat>[,<cat>...]`, at most 3 categories per entry.
  static DomainCategoryList load(const std::filesystem::path& path, const Taxonomy& taxonomy);
  static DomainCategoryList parse(std::string_view text, const Taxonomy& taxonomy);

  void add(std::string key, std::vector<std::string> categories, const Taxonomy& taxonomy);

  const std::vector<std::string>* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Exact hostname first, then its registrable domain.
std::optional<std::vector<std::string>> categorize_by_domain(std::string_view hostname,
                                                             const DomainCategoryList& list,
                                                             const PublicSuffixList& psl);

}  // namespace trackwall
