#include "trackwall/taxonomy.hpp"

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {

Taxonomy::Taxonomy(std::vector<std::string> top_categories,
                   std::unordered_map<std::string, std::string> subcategories)
    : top_(std::move(top_categories)), sub_(std::move(subcategories)) {
  if (top_.empty()) throw Error(ErrorCode::kInvalidData, "empty taxonomy");
  for (std::size_t i = 0; i < top_.size(); ++i) {
    if (top_[i].empty() || top_[i] != ascii_lower(top_[i])) {
      throw Error(ErrorCode::kInvalidData, "category names must be lowercase: " + top_[i]);
    }
    if (!index_.emplace(top_[i], i).second) {
      throw Error(ErrorCode::kInvalidData, "duplicate category: " + top_[i]);
    }
  }
  for (const auto& [sub, parent] : sub_) {
    if (!index_.contains(parent)) {
      throw Error(ErrorCode::kUnknownCategory,
                  "subcategory " + sub + " has unknown parent " + parent);
    }
  }
}

Taxonomy Taxonomy::load(const std::filesystem::path& dir) {
  std::vector<std::string> top;
  for (const auto& line : read_data_lines(dir / "taxonomy.txt")) top.push_back(trim(line));
  if (top.size() != kTopLevelCategoryCount) {
    throw Error(ErrorCode::kInvalidData,
                "taxonomy.txt must list 32 top-level categories, found " +
                    std::to_string(top.size()));
  }

  std::unordered_map<std::string, std::string> sub;
  const auto sub_path = dir / "subcategories.tsv";
  if (std::filesystem::exists(sub_path)) {
    for (const auto& line : read_data_lines(sub_path)) {
      const auto cols = split(line, '\t');
      if (cols.size() != 2) {
        throw Error(ErrorCode::kInvalidData, "bad subcategories.tsv line: " + line);
      }
      auto name = trim(cols[0]);
      if (!sub.emplace(name, trim(cols[1])).second) {
        throw Error(ErrorCode::kInvalidData, "subcategory listed twice: " + name);
      }
    }
  }
  return Taxonomy(std::move(top), std::move(sub));
}

bool Taxonomy::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::optional<std::size_t> Taxonomy::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Taxonomy::parent_of(std::string_view subcategory) const {
  const auto it = sub_.find(std::string(subcategory));
  if (it == sub_.end()) return std::nullopt;
  return it->second;
}

}  // namespace trackwall
