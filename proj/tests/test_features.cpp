#include "churnforge/errors.hpp"
#include "churnforge/features.hpp"
#include "churnforge/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace churnforge;

namespace {

double f(const std::array<double, kNumFeatures>& v, const char* name) {
  return v[feature_index(name)];
}

}  // namespace

TEST_CASE("feature names are stable and indexable") {
  const auto& names = feature_names();
  CHECK(names.size() == kNumFeatures);
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(feature_index(names[i]) == i);
  }
  CHECK_THROWS_AS(feature_index("nope"), DomainError);
}

TEST_CASE("brand-new player boundary values") {
  auto t = testutil::timeline("a", {{10, 3600, 1, 0, 0, 0}}, 100);
  auto v = build_features(t, 10);
  CHECK(f(v, "age_days") == 0);
  CHECK(f(v, "playtime_7d") == doctest::Approx(1.0));  // hours
  CHECK(f(v, "days_since_last_session") == 0);
  CHECK(f(v, "cumulative_spend") == 0);
  CHECK(f(v, "days_since_last_purchase") == 0);  // capped at age
  CHECK(f(v, "purchase_count_total") == 0);
}

TEST_CASE("as_of before first login is an error") {
  auto t = testutil::timeline("a", {{10, 3600, 1, 0, 0, 0}}, 100);
  CHECK_THROWS_AS(build_features(t, 9), DomainError);
}

TEST_CASE("scripted 60-day history matches a hand-computed vector") {
  // Day 0: 2h, 2 sessions, level-up to 1.
  // Day 10: 1h, 1 session, purchase 5.00.
  // Day 40: 0.5h, 3 sessions, level-ups to 3.
  // Day 55: 1.5h, 1 session, purchase 2.50.
  // Day 58: 2h, 2 sessions.
  auto t = testutil::timeline("a",
                              {{0, 7200, 2, 1, 0, 0},
                               {10, 3600, 1, 0, 1, 500},
                               {40, 1800, 3, 2, 0, 0},
                               {55, 5400, 1, 0, 1, 250},
                               {58, 7200, 2, 0, 0, 0}},
                              100);
  auto v = build_features(t, 60);
  CHECK(f(v, "age_days") == 60);
  CHECK(f(v, "cumulative_playtime_h") ==
        doctest::Approx((7200 + 3600 + 1800 + 5400 + 7200) / 3600.0));
  // 7-day window (53, 60]: days 55 and 58.
  CHECK(f(v, "playtime_7d") == doctest::Approx((5400 + 7200) / 3600.0));
  CHECK(f(v, "sessions_7d") == 3);
  // 30-day window (30, 60]: days 40, 55, 58.
  CHECK(f(v, "playtime_30d") ==
        doctest::Approx((1800 + 5400 + 7200) / 3600.0));
  CHECK(f(v, "sessions_30d") == 6);
  CHECK(f(v, "levelups_30d") == 2);
  CHECK(f(v, "purchases_30d") == 1);
  CHECK(f(v, "spend_30d") == doctest::Approx(2.50));
  // Session days in window: 40, 55, 58 -> gaps {15, 3}, mean 9.
  CHECK(f(v, "mean_session_gap_30d") == doctest::Approx(9.0));
  CHECK(f(v, "days_since_last_session") == 2);
  CHECK(f(v, "level") == 3);
  CHECK(f(v, "cumulative_spend") == doctest::Approx(7.50));
  CHECK(f(v, "days_since_last_purchase") == 5);
  CHECK(f(v, "purchase_count_total") == 2);
  // Actions in 30d window: sessions 6 + levelups 2 + purchases 1 = 9.
  CHECK(f(v, "actions_per_day_30d") == doctest::Approx(9.0 / 30.0));
}

TEST_CASE("never-purchased cap and single-session-day gap default") {
  auto t = testutil::timeline("a", {{0, 600, 1, 0, 0, 0}, {20, 600, 1, 0, 0, 0}},
                              100);
  auto v = build_features(t, 25);
  CHECK(f(v, "days_since_last_purchase") == 25);  // == age_days
  // Only one session day inside (x-30, 25]: windows with < 2 session days
  // report the window length.
  auto v2 = build_features(t, 55);
  CHECK(f(v2, "mean_session_gap_30d") == 30);
}

TEST_CASE("no future leakage: records after as_of never matter") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<testutil::Day> days;
    Date d = 0;
    while (d <= 80) {
      testutil::Day day{d};
      day.playtime_s = 100 + rng.uniform() * 5000;
      day.sessions = 1 + static_cast<int>(rng.uniform_index(4));
      day.levelups = static_cast<int>(rng.uniform_index(2));
      if (rng.bernoulli(0.3)) {
        day.purchases = 1;
        day.spend_cents = 100;
      }
      days.push_back(day);
      d += 1 + static_cast<Date>(rng.uniform_index(6));
    }
    const Date as_of = 40;
    // Truncated twin: drop everything after as_of.
    std::vector<testutil::Day> prefix;
    for (const auto& day : days) {
      if (day.date <= as_of) prefix.push_back(day);
    }
    if (prefix.empty()) continue;
    auto full = testutil::timeline("a", days, 80);
    auto cut = testutil::timeline("a", prefix, 80);
    auto v1 = build_features(full, as_of);
    auto v2 = build_features(cut, as_of);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      CHECK(v1[i] == v2[i]);
    }
  }
}
