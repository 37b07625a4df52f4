#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "trackwall/canonical_json.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/events.hpp"

namespace trackwall {
namespace {

TEST(PageHash, Fnv1aReferenceValues) {
  EXPECT_EQ(page_hash(""), "cbf29ce484222325");
  EXPECT_EQ(page_hash("https://example.com/"), "0c8b41cfdcb3c914");
  EXPECT_EQ(page_hash("http://a.b/c?d"), "d5e9ea0a24eee203");
}

BrowsingEvent sample() {
  BrowsingEvent e;
  e.timestamp = 1452470400;
  e.user = "u1";
  e.page_hash = page_hash("http://a.example/");
  e.categories = {"politics", "news"};
  e.source = AssignmentSource::kLexicon;
  e.verdict = Verdict::kBlock;
  e.reason = DecisionReason::kCategoryMatch;
  e.matched_categories = {"politics"};
  e.third_parties = {"doubleclick.net", "cloudfront.net"};
  e.trackers = {"doubleclick.net"};
  e.blocked = {"doubleclick.net"};
  e.iframes = {"https://ad.doubleclick.net/x"};
  return e;
}

TEST(Event, LineHasFixedKeyOrder) {
  EXPECT_EQ(event_to_line(sample()),
            R"({"ts":1452470400,"user":"u1","page":")" + page_hash("http://a.example/") +
                R"(","categories":["politics","news"],"source":"lexicon","verdict":"block",)"
                R"("reason":"category-match","matched":["politics"],)"
                R"("thirdParties":["doubleclick.net","cloudfront.net"],"trackers":["doubleclick.net"],)"
                R"("blocked":["doubleclick.net"],"iframes":["https://ad.doubleclick.net/x"]})");
  auto anon = sample();
  anon.user.reset();
  EXPECT_EQ(event_to_line(anon).find("\"user\""), std::string::npos);
}

TEST(Event, JsonRoundTrip) {
  const auto e = sample();
  EXPECT_EQ(event_from_json(nlohmann::json::parse(event_to_line(e))), e);
  auto anon = e;
  anon.user.reset();
  EXPECT_EQ(event_from_json(nlohmann::json::parse(event_to_line(anon))), anon);
}

TEST(Event, RejectsSchemaViolations) {
  auto j = nlohmann::json::parse(event_to_line(sample()));
  auto expect_malformed = [](const nlohmann::json& doc) {
    try {
      event_from_json(doc);
      ADD_FAILURE() << doc.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    }
  };
  auto bad = j;
  bad.erase("ts");
  expect_malformed(bad);
  bad = j;
  bad["verdict"] = "maybe";
  expect_malformed(bad);
  bad = j;
  bad["categories"] = {"a", "b", "c", "d"};
  expect_malformed(bad);
  bad = j;
  bad["blocked"] = {"elsewhere.com"};
  expect_malformed(bad);
  bad = j;
  bad["thirdParties"] = "x";
  expect_malformed(bad);
  expect_malformed(nlohmann::json::array());
}

TEST(Event, AddUniqueKeepsFirstSeenOrder) {
  std::vector<std::string> v;
  for (const char* s : {"b", "a", "b", "c", "a"}) add_unique(v, s);
  EXPECT_EQ(v, (std::vector<std::string>{"b", "a", "c"}));
}

TEST(EventLog, MirrorsToFileAndAppends) {
  testing::TempDir dir;
  const auto path = dir.path() / "events.jsonl";
  {
    EventLog log(path);
    log.append(sample());
    EXPECT_EQ(log.size(), 1u);
  }
  {
    EventLog log(path);
    auto e = sample();
    e.timestamp += 1;
    log.append(e);
    EXPECT_EQ(log.events().size(), 1u);
  }
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], event_to_line(sample()));
  EXPECT_EQ(event_from_json(nlohmann::json::parse(lines[1])).timestamp, sample().timestamp + 1);
}

}  // namespace
}  // namespace trackwall
