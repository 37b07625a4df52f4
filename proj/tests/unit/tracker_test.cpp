#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/tracker.hpp"

namespace trackwall {
namespace {

const PublicSuffixList& psl() { return testing::shared_resources().psl; }

const PolicyDecision kBlockPage{Verdict::kBlock, DecisionReason::kCategoryMatch, {"adult"}};
const PolicyDecision kAllowPage{};

TEST(ThirdParty, ComparesRegistrableDomains) {
  EXPECT_FALSE(is_third_party("cdn.example.co.uk", "www.example.co.uk", psl()));
  EXPECT_TRUE(is_third_party("example.com", "example.co.uk", psl()));
  EXPECT_TRUE(is_third_party("a.example.co.uk", "b.example2.co.uk", psl()));
}

TEST(Registry, BecomesTrackerOnThirdFirstParty) {
  TrackerRegistry reg;
  const AllowedDomains allow({"cdn.net"});
  const std::string pages[] = {"www.a.com", "b.org", "shop.c.co.uk", "d.net"};
  // Seen on the first two pages: not a tracker yet, nothing blocked.
  for (int i = 0; i < 2; ++i) {
    const auto v = evaluate_request("px.ads.example", pages[i], kBlockPage, reg, allow, psl());
    EXPECT_TRUE(v.third_party);
    EXPECT_FALSE(v.tracker) << i;
    EXPECT_FALSE(v.blocked) << i;
  }
  // Repeat visit to a known first party adds nothing.
  EXPECT_FALSE(evaluate_request("px.ads.example", "a.com", kBlockPage, reg, allow, psl()).tracker);
  EXPECT_EQ(reg.first_party_count("ads.example"), 2u);
  // The third distinct first party counts on the very request that adds it.
  const auto third = evaluate_request("px.ads.example", pages[2], kBlockPage, reg, allow, psl());
  EXPECT_TRUE(third.tracker);
  EXPECT_TRUE(third.blocked);
  EXPECT_EQ(third.domain, "ads.example");
  EXPECT_EQ(reg.first_parties("ads.example"),
            (std::set<std::string>{"a.com", "b.org", "c.co.uk"}));
}

// Every combination of the four inputs of the blocking rule.
TEST(Registry, BlockingIsTheConjunction) {
  for (int mask = 0; mask < 16; ++mask) {
    const bool block_page = mask & 1;
    const bool third = mask & 2;
    const bool allowlisted = mask & 4;
    const bool tracker = mask & 8;

    TrackerRegistry reg;
    const std::string target = allowlisted ? "cdn.net" : "ads.example";
    if (tracker) {
      reg.record(target, "x1.com");
      reg.record(target, "x2.com");
      reg.record(target, "x3.com");
    }
    const AllowedDomains allow({"cdn.net"});
    const std::string page_host = third ? "www.news.com" : "www." + target;
    const auto v = evaluate_request("img." + target, page_host, block_page ? kBlockPage : kAllowPage,
                                    reg, allow, psl());
    EXPECT_EQ(v.blocked, block_page && third && !allowlisted && tracker) << mask;
    EXPECT_EQ(v.third_party, third) << mask;
    if (third) {
      EXPECT_EQ(v.tracker, tracker) << mask;
      EXPECT_EQ(v.allowlisted, allowlisted) << mask;
    }
  }
}

TEST(Registry, FirstPartyRequestsAreNotRecorded) {
  TrackerRegistry reg;
  evaluate_request("static.a.com", "www.a.com", kBlockPage, reg, AllowedDomains{}, psl());
  EXPECT_EQ(reg.size(), 0u);
  EXPECT_THROW(reg.record("a.com", "a.com"), Error);
  try {
    reg.record("a.com", "a.com");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSameParty);
  }
}

TEST(Registry, MonotoneUnderRandomObservations) {
  std::mt19937 rng(7);
  TrackerRegistry reg;
  std::map<std::string, std::size_t> last;
  std::set<std::string> trackers;
  for (int i = 0; i < 5000; ++i) {
    const auto third = "t" + std::to_string(rng() % 30) + ".com";
    const auto first = "f" + std::to_string(rng() % 40) + ".org";
    const auto n = reg.record(third, first);
    ASSERT_GE(n, last[third]);
    ASSERT_LE(n, last[third] + 1);
    last[third] = n;
    for (const auto& t : trackers) ASSERT_TRUE(reg.is_tracker(t));
    if (reg.is_tracker(third)) trackers.insert(third);
  }
}

TEST(Registry, JsonRoundTripAndPersistence) {
  testing::TempDir dir;
  const auto path = dir.path() / "registry.json";
  {
    TrackerRegistry reg(path);
    reg.record("ads.example", "a.com");
    reg.record("ads.example", "b.com");
    reg.record("px.example", "a.com");
    reg.save();
    EXPECT_EQ(TrackerRegistry::from_json(reg.to_json()).observations(), reg.observations());
  }
  const auto loaded = TrackerRegistry::open(path);
  EXPECT_EQ(loaded->first_party_count("ads.example"), 2u);
  EXPECT_EQ(TrackerRegistry::open(path, true)->size(), 0u);
  EXPECT_THROW(TrackerRegistry::from_json(nlohmann::json::parse(R"({"a.com":["a.com"]})")), Error);
  EXPECT_THROW(TrackerRegistry::from_json(nlohmann::json::parse("[]")), Error);
}

TEST(AllowedDomains, LoadsShippedList) {
  const auto& allow = testing::shared_resources().allowlist;
  EXPECT_TRUE(allow.contains("cloudfront.net"));
  EXPECT_FALSE(allow.contains("doubleclick.net"));
  testing::TempDir dir;
  std::ofstream(dir.path() / "empty.txt") << "# nothing\n";
  EXPECT_THROW(AllowedDomains::load(dir.path() / "empty.txt"), Error);
}

}  // namespace
}  // namespace trackwall
