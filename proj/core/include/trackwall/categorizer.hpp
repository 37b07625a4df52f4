#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackwall/lexicon.hpp"
#include "trackwall/lru_cache.hpp"
#include "trackwall/page.hpp"
#include "trackwall/public_suffix.hpp"
#include "trackwall/taxonomy.hpp"
#include "trackwall/text.hpp"

namespace trackwall {

inline constexpr double kDefaultAlpha = 0.3;
inline constexpr std::size_t kCategoryCacheCapacity = 500;
inline constexpr std::size_t kMaxCategoriesPerPage = 3;

enum class AssignmentSource {
  kCache,
  kDeclaredTag,
  kDomainList,
  kLexicon,
  kUserOverride,
  kFallbackUncategorized,
};

std::string_view to_string(AssignmentSource source);
std::optional<AssignmentSource> assignment_source_from_string(std::string_view text);

struct CategoryAssignment {
  std::vector<std::string> categories;  // 1-3 entries, no duplicates
  AssignmentSource source = AssignmentSource::kFallbackUncategorized;

  bool uncategorized() const noexcept {
    return source == AssignmentSource::kFallbackUncategorized;
  }
  friend bool operator==(const CategoryAssignment&, const CategoryAssignment&) = default;
};

CategoryAssignment uncategorized_assignment();

// Category -> accumulated score. Missing categories score 0.
using CategoryScores = std::map<std::string, double>;

// Adds fieldWeight * tf * idf * weight for every lexicon term in `counts`.
void accumulate_scores(const TermCounts& counts, int field_weight, const Lexicon& lexicon,
                       CategoryScores& scores);

CategoryScores score_terms(const PageFeatures& features, const Lexicon& lexicon,
                           const Tokenizer& tokenizer, const FieldWeights& weights = {});

// Threshold T = alpha * (max - mean), mean over every taxonomy category.
// Returns the categories scoring strictly above T, highest first (ties by
// name), capped at 3. Throws Error(kAllZeroScores) when nothing scores > 0.
std::vector<std::string> select_categories(const CategoryScores& scores,
                                           const Taxonomy& taxonomy,
                                           double alpha = kDefaultAlpha);

double selection_threshold(const CategoryScores& scores, const Taxonomy& taxonomy,
                           double alpha = kDefaultAlpha);

struct CategorizerOptions {
  double alpha = kDefaultAlpha;
  std::size_t cache_capacity = kCategoryCacheCapacity;
  FieldWeights field_weights;
};

// Resolution order: user override, cache, declared tag, domain list, lexicon,
// uncategorized. Results from the declared tag, domain list and lexicon are
// cached by normalized URL. Safe for concurrent callers.
class Categorizer {
 public:
  using OverrideLookup =
      std::function<std::optional<std::vector<std::string>>(const std::string& url)>;

  Categorizer(const Taxonomy& taxonomy, const DomainCategoryList& domains,
              const Lexicon& lexicon, const Tokenizer& tokenizer, const PublicSuffixList& psl,
              CategorizerOptions options = {});

  CategoryAssignment categorize_page(const PageFeatures& features,
                                     const OverrideLookup& overrides = {});

  void invalidate(const std::string& normalized_url);
  void clear_cache();
  std::size_t cache_size() const;
  bool cached(const std::string& normalized_url) const;

  // Number of times lexicon scoring actually ran.
  std::uint64_t scoring_invocations() const noexcept { return scoring_runs_.load(); }

  const Taxonomy& taxonomy() const noexcept { return taxonomy_; }

 private:
  std::optional<CategoryAssignment> classify_uncached(const PageFeatures& features);

  const Taxonomy& taxonomy_;
  const DomainCategoryList& domains_;
  const Lexicon& lexicon_;
  const Tokenizer& tokenizer_;
  const PublicSuffixList& psl_;
  CategorizerOptions options_;

  mutable std::mutex cache_mutex_;
  LruCache<std::string, CategoryAssignment> cache_;
  std::atomic<std::uint64_t> scoring_runs_{0};
};

}  // namespace trackwall
