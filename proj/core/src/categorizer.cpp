#include "trackwall/categorizer.hpp"

#include <algorithm>
#include <span>

#include "trackwall/errors.hpp"

namespace trackwall {

std::string_view to_string(AssignmentSource source) {
  switch (source) {
    case AssignmentSource::kCache: return "cache";
    case AssignmentSource::kDeclaredTag: return "declared-tag";
    case AssignmentSource::kDomainList: return "domain-list";
    case AssignmentSource::kLexicon: return "lexicon";
    case AssignmentSource::kUserOverride: return "user-override";
    case AssignmentSource::kFallbackUncategorized: return "fallback-uncategorized";
  }
  return "";
}

std::optional<AssignmentSource> assignment_source_from_string(std::string_view text) {
  for (auto s : {AssignmentSource::kCache, AssignmentSource::kDeclaredTag,
                 AssignmentSource::kDomainList, AssignmentSource::kLexicon,
                 AssignmentSource::kUserOverride, AssignmentSource::kFallbackUncategorized}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

CategoryAssignment uncategorized_assignment() {
  return {{std::string(kUncategorized)}, AssignmentSource::kFallbackUncategorized};
}

void accumulate_scores(const TermCounts& counts, int field_weight, const Lexicon& lexicon,
                       CategoryScores& scores) {
  for (const auto& [term, tf] : counts) {
    const auto* entry = lexicon.find(term);
    if (!entry) continue;
    const double base = static_cast<double>(field_weight * tf);
    for (const auto& [category, weight] : entry->category_weights) {
      scores[category] += base * entry->idf * weight;
    }
  }
}

CategoryScores score_terms(const PageFeatures& features, const Lexicon& lexicon,
                           const Tokenizer& tokenizer, const FieldWeights& weights) {
  CategoryScores scores;
  TermCounts counts;
  count_ngrams(features.normalized_url, tokenizer, counts);
  accumulate_scores(counts, weights.url, lexicon, scores);

  counts.clear();
  count_ngrams(features.title, tokenizer, counts);
  accumulate_scores(counts, weights.title, lexicon, scores);

  accumulate_scores(count_ngrams(std::span<const std::string>(features.keywords), tokenizer),
                    weights.keywords, lexicon, scores);

  counts.clear();
  count_ngrams(features.body_text, tokenizer, counts);
  accumulate_scores(counts, weights.body, lexicon, scores);
  return scores;
}

namespace {

double score_of(const CategoryScores& scores, const std::string& category) {
  const auto it = scores.find(category);
  return it == scores.end() ? 0.0 : it->second;
}

}  // namespace

double selection_threshold(const CategoryScores& scores, const Taxonomy& taxonomy,
                           double alpha) {
  double max = 0.0;
  double total = 0.0;
  for (const auto& c : taxonomy.top_categories()) {
    const double s = score_of(scores, c);
    max = std::max(max, s);
    total += s;
  }
  const double mean = total / static_cast<double>(taxonomy.size());
  return alpha * (max - mean);
}

std::vector<std::string> select_categories(const CategoryScores& scores,
                                           const Taxonomy& taxonomy, double alpha) {
  std::vector<std::pair<double, const std::string*>> ranked;
  ranked.reserve(taxonomy.size());
  double max = 0.0;
  for (const auto& c : taxonomy.top_categories()) {
    const double s = score_of(scores, c);
    ranked.emplace_back(s, &c);
    max = std::max(max, s);
  }
  if (!(max > 0.0)) throw Error(ErrorCode::kAllZeroScores, "no category scored above zero");

  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });

  const double threshold = selection_threshold(scores, taxonomy, alpha);
  std::vector<std::string> selected;
  for (const auto& [s, name] : ranked) {
    if (selected.size() == kMaxCategoriesPerPage || !(s > threshold)) break;
    selected.push_back(*name);
  }
  if (selected.empty()) selected.push_back(*ranked.front().second);
  return selected;
}

Categorizer::Categorizer(const Taxonomy& taxonomy, const DomainCategoryList& domains,
                         const Lexicon& lexicon, const Tokenizer& tokenizer,
                         const PublicSuffixList& psl, CategorizerOptions options)
    : taxonomy_(taxonomy),
      domains_(domains),
      lexicon_(lexicon),
      tokenizer_(tokenizer),
      psl_(psl),
      options_(options),
      cache_(options.cache_capacity) {}

std::optional<CategoryAssignment> Categorizer::classify_uncached(const PageFeatures& features) {
  if (features.declared_category && taxonomy_.contains(*features.declared_category)) {
    return CategoryAssignment{{*features.declared_category}, AssignmentSource::kDeclaredTag};
  }
  if (!features.hostname.empty()) {
    if (auto cats = categorize_by_domain(features.hostname, domains_, psl_)) {
      return CategoryAssignment{std::move(*cats), AssignmentSource::kDomainList};
    }
  }
  scoring_runs_.fetch_add(1, std::memory_order_relaxed);
  const auto scores = score_terms(features, lexicon_, tokenizer_, options_.field_weights);
  try {
    return CategoryAssignment{select_categories(scores, taxonomy_, options_.alpha),
                              AssignmentSource::kLexicon};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllZeroScores) throw;
  }
  return std::nullopt;
}

CategoryAssignment Categorizer::categorize_page(const PageFeatures& features,
                                                const OverrideLookup& overrides) {
  const auto& url = features.normalized_url;
  if (overrides) {
    if (auto cats = overrides(url)) {
      return CategoryAssignment{std::move(*cats), AssignmentSource::kUserOverride};
    }
  }
  {
    std::lock_guard lock(cache_mutex_);
    if (auto hit = cache_.get(url)) {
      hit->source = AssignmentSource::kCache;
      return *hit;
    }
  }
  auto result = classify_uncached(features);
  if (!result) return uncategorized_assignment();
  {
    std::lock_guard lock(cache_mutex_);
    cache_.put(url, *result);
  }
  return *result;
}

void Categorizer::invalidate(const std::string& normalized_url) {
  std::lock_guard lock(cache_mutex_);
  cache_.erase(normalized_url);
}

void Categorizer::clear_cache() {
  std::lock_guard lock(cache_mutex_);
  cache_.clear();
}

std::size_t Categorizer::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

bool Categorizer::cached(const std::string& normalized_url) const {
  std::lock_guard lock(cache_mutex_);
  return cache_.contains(normalized_url);
}

}  // namespace trackwall
