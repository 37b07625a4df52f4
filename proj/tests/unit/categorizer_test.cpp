#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"
#include "trackwall/categorizer.hpp"
#include "trackwall/errors.hpp"

namespace trackwall {
namespace {

const Resources& res() { return testing::shared_resources(); }

TEST(Select, WorkedExample) {
  const Taxonomy tax({"a", "b", "c", "d"});
  // max 10, mean 5.5, T = 0.3 * 4.5 = 1.35.
  const CategoryScores scores{{"a", 10.0}, {"b", 8.0}, {"c", 1.4}, {"d", 2.6}};
  EXPECT_DOUBLE_EQ(selection_threshold(scores, tax), 0.3 * (10.0 - 5.5));
  EXPECT_EQ(select_categories(scores, tax), (std::vector<std::string>{"a", "b", "d"}));
}

TEST(Select, StrictThresholdAndTieOrder) {
  const Taxonomy tax({"b", "a", "c", "d"});
  // One positive category out of four: mean 1, T = 0.3 * 3 = 0.9.
  EXPECT_EQ(select_categories({{"c", 4.0}}, tax), (std::vector<std::string>{"c"}));
  // All equal: T = 0, everything above, capped at 3 in byte order.
  EXPECT_EQ(select_categories({{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 1.0}}, tax),
            (std::vector<std::string>{"a", "b", "c"}));
  // Score exactly at T is not selected: {6, 3, 3, 0} has mean 3, T = 0.9 at
  // alpha 0.3; with alpha 1 T = 3 so only the strict maximum survives.
  EXPECT_EQ(select_categories({{"a", 6.0}, {"b", 3.0}, {"c", 3.0}}, tax, 1.0),
            (std::vector<std::string>{"a"}));
}

TEST(Select, AllZeroRaises) {
  const Taxonomy tax({"a", "b"});
  try {
    select_categories({}, tax);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllZeroScores);
  }
  EXPECT_THROW(select_categories({{"a", 0.0}}, tax), Error);
}

TEST(Select, FallsBackToMaxWhenNothingPassesThreshold) {
  const Taxonomy tax({"a", "b"});
  // alpha above 1 puts T over the max.
  EXPECT_EQ(select_categories({{"a", 2.0}, {"b", 1.0}}, tax, 5.0), (std::vector<std::string>{"a"}));
}

TEST(Select, MatchesBruteForceOnRandomVectors) {
  std::mt19937 rng(1);
  const auto& tax = res().taxonomy;
  for (int i = 0; i < 5000; ++i) {
    const auto scores = oracle::random_scores(rng, tax);
    ASSERT_EQ(select_categories(scores, tax), oracle::select(scores, tax, kDefaultAlpha)) << i;
  }
}

TEST(Select, ScaleInvariant) {
  std::mt19937 rng(2);
  const auto& tax = res().taxonomy;
  std::uniform_real_distribution<double> u(0.001, 100.0);
  for (int i = 0; i < 500; ++i) {
    CategoryScores scores;
    for (const auto& c : tax.top_categories()) {
      if (rng() % 2) scores[c] = u(rng);
    }
    if (scores.empty()) continue;
    const auto base = select_categories(scores, tax);
    for (double k : {0.1, 7.0, 1000.0}) {
      CategoryScores scaled;
      for (const auto& [c, v] : scores) scaled[c] = v * k;
      ASSERT_EQ(select_categories(scaled, tax), base) << i << " k=" << k;
    }
  }
}

TEST(Scoring, AdditiveAcrossFields) {
  const auto& r = res();
  PageFeatures both;
  both.normalized_url = "http://x.example/diabetes-diet";
  both.title = "basketball coach";
  both.body_text = "credit card budget";
  PageFeatures url_only;
  url_only.normalized_url = both.normalized_url;
  PageFeatures rest;
  rest.normalized_url = "";
  rest.title = both.title;
  rest.body_text = both.body_text;

  const auto s_both = score_terms(both, r.lexicon, r.tokenizer);
  const auto s_url = score_terms(url_only, r.lexicon, r.tokenizer);
  const auto s_rest = score_terms(rest, r.lexicon, r.tokenizer);
  ASSERT_FALSE(s_both.empty());
  for (const auto& [cat, v] : s_both) {
    const double a = s_url.contains(cat) ? s_url.at(cat) : 0.0;
    const double b = s_rest.contains(cat) ? s_rest.at(cat) : 0.0;
    EXPECT_NEAR(v, a + b, 1e-9 * std::max(1.0, v)) << cat;
  }
}

TEST(Scoring, TermContributionFormula) {
  const Taxonomy tax({"sports", "travel"});
  Lexicon lex;
  lex.add("surf", {2.0, {{"sports", 0.5}, {"travel", 1.0}}}, tax);
  lex.add("surf camp", {3.0, {{"travel", 1.0}}}, tax);
  const Tokenizer tokenizer;
  PageFeatures f;
  f.title = "surf camp";                 // weight 4
  f.keywords = {"surf", "surf"};         // weight 5, tf 2
  f.body_text = "surf surf surf camp";   // weight 1
  const auto s = score_terms(f, lex, tokenizer);
  // sports: surf * 0.5 * 2.0 * (4*1 + 5*2 + 1*3) = 17
  EXPECT_DOUBLE_EQ(s.at("sports"), 17.0);
  // travel: surf 2.0 * 17 = 34, bigram 3.0 * (4 + 1) = 15
  EXPECT_DOUBLE_EQ(s.at("travel"), 49.0);
}

class CategorizerTest : public ::testing::Test {
 protected:
  CategorizerTest()
      : cat_(res().taxonomy, res().domains, res().lexicon, res().tokenizer, res().psl) {}

  static PageFeatures lexicon_page(int i) {
    PageFeatures f;
    f.normalized_url = "http://blog" + std::to_string(i) + ".example/post";
    f.hostname = "blog" + std::to_string(i) + ".example";
    f.title = "diabetes exercise";
    f.body_text = "fitness doctor cholesterol";
    return f;
  }

  Categorizer cat_;
};

TEST_F(CategorizerTest, ResolutionOrder) {
  auto f = lexicon_page(1);
  f.hostname = "techcrunch.com";
  f.normalized_url = "https://techcrunch.com/a";
  f.declared_category = "travel";
  Categorizer::OverrideLookup overrides = [](const std::string& url)
      -> std::optional<std::vector<std::string>> {
    if (url == "https://techcrunch.com/a") return std::vector<std::string>{"law"};
    return std::nullopt;
  };
  EXPECT_EQ(cat_.categorize_page(f, overrides),
            (CategoryAssignment{{"law"}, AssignmentSource::kUserOverride}));
  EXPECT_EQ(cat_.categorize_page(f), (CategoryAssignment{{"travel"}, AssignmentSource::kDeclaredTag}));
  EXPECT_EQ(cat_.categorize_page(f), (CategoryAssignment{{"travel"}, AssignmentSource::kCache}));

  f.normalized_url = "https://techcrunch.com/b";
  f.declared_category.reset();
  EXPECT_EQ(cat_.categorize_page(f),
            (CategoryAssignment{{"technology & computing"}, AssignmentSource::kDomainList}));

  const auto lex = cat_.categorize_page(lexicon_page(2));
  EXPECT_EQ(lex.source, AssignmentSource::kLexicon);
  EXPECT_NE(std::find(lex.categories.begin(), lex.categories.end(), "health & fitness"),
            lex.categories.end());
}

TEST_F(CategorizerTest, UncategorizedIsNotCached) {
  PageFeatures f;
  f.normalized_url = "http://nothing.example/";
  f.hostname = "nothing.example";
  f.body_text = "zzzz qqqq";
  EXPECT_EQ(cat_.categorize_page(f), uncategorized_assignment());
  EXPECT_EQ(cat_.categorize_page(f).source, AssignmentSource::kFallbackUncategorized);
  EXPECT_FALSE(cat_.cached(f.normalized_url));
  EXPECT_EQ(cat_.scoring_invocations(), 2u);
  EXPECT_EQ(uncategorized_assignment().categories, (std::vector<std::string>{"uncategorized"}));
}

TEST_F(CategorizerTest, LruEvictsExactlyTheOldest) {
  for (int i = 0; i <= 500; ++i) cat_.categorize_page(lexicon_page(i));
  EXPECT_EQ(cat_.cache_size(), 500u);
  EXPECT_FALSE(cat_.cached(lexicon_page(0).normalized_url));
  for (int i = 1; i <= 500; ++i) ASSERT_TRUE(cat_.cached(lexicon_page(i).normalized_url)) << i;

  const auto runs = cat_.scoring_invocations();
  EXPECT_EQ(cat_.categorize_page(lexicon_page(1)).source, AssignmentSource::kCache);
  EXPECT_EQ(cat_.scoring_invocations(), runs);
  // Page 1 was just touched, so page 2 is now the oldest.
  cat_.categorize_page(lexicon_page(501));
  EXPECT_TRUE(cat_.cached(lexicon_page(1).normalized_url));
  EXPECT_FALSE(cat_.cached(lexicon_page(2).normalized_url));
}

TEST_F(CategorizerTest, InvalidateForcesRescore) {
  const auto f = lexicon_page(7);
  cat_.categorize_page(f);
  cat_.invalidate(f.normalized_url);
  EXPECT_FALSE(cat_.cached(f.normalized_url));
  EXPECT_EQ(cat_.categorize_page(f).source, AssignmentSource::kLexicon);
  EXPECT_EQ(cat_.scoring_invocations(), 2u);
  cat_.clear_cache();
  EXPECT_EQ(cat_.cache_size(), 0u);
}

TEST(AssignmentSource, StringsRoundTrip) {
  for (auto s : {AssignmentSource::kCache, AssignmentSource::kDeclaredTag,
                 AssignmentSource::kDomainList, AssignmentSource::kLexicon,
                 AssignmentSource::kUserOverride, AssignmentSource::kFallbackUncategorized}) {
    EXPECT_EQ(assignment_source_from_string(to_string(s)), s);
  }
  EXPECT_EQ(to_string(AssignmentSource::kFallbackUncategorized), "fallback-uncategorized");
  EXPECT_FALSE(assignment_source_from_string("bogus"));
}

}  // namespace
}  // namespace trackwall
