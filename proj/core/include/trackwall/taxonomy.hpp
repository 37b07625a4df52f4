#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trackwall {

// Pseudo-category carried by pages nothing could classify. It is not part of
// the taxonomy, so no category policy can ever match it.
inline constexpr std::string_view kUncategorized = "uncategorized";

inline constexpr std::size_t kTopLevelCategoryCount = 32;

// Two-level interest taxonomy. Users only ever see the top level.
class Taxonomy {
 public:
  // Any non-empty list of distinct names; used directly by tests with toy
  // taxonomies. load() additionally requires exactly 32 top-level names.
  explicit Taxonomy(std::vector<std::string> top_categories,
                    std::unordered_map<std::string, std::string> subcategories = {});

  // Reads taxonomy.txt and, when present, subcategories.tsv from `dir`.
  static Taxonomy load(const std::filesystem::path& dir);

  const std::vector<std::string>& top_categories() const noexcept { return top_; }
  const std::unordered_map<std::string, std::string>& subcategories() const noexcept {
    return sub_;
  }
  std::size_t size() const noexcept { return top_.size(); }

  bool contains(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<std::string> parent_of(std::string_view subcategory) const;

 private:
  std::vector<std::string> top_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::string> sub_;
};

}  // namespace trackwall
