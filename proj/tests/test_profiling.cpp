#include <vector>

#include "churnforge/errors.hpp"
#include "churnforge/profiling.hpp"
#include "churnforge/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace churnforge;

namespace {

ProfilingRules default_rules() { return ProfilingRules{}; }

// Every-day timeline with heavy engagement.
PlayerTimeline engaged_player(Date end) {
  std::vector<testutil::Day> days;
  for (Date d = 0; d <= end; ++d) {
    days.push_back({d, 7200, 3, 1, 1, 500});
  }
  return testutil::timeline("engaged", days, end);
}

}  // namespace

TEST_CASE("fully engaged player is normal everywhere with no episodes") {
  auto st = label_states(engaged_player(90), default_rules());
  for (Date d = st.start; d <= st.end; ++d) {
    CHECK(st.login_state(d) == LoginState::active);
    CHECK(st.engagement_state(d) == EngagementState::normal);
    CHECK(st.purchase_state(d) == PurchaseState::paying_active);
  }
  CHECK(st.episodes.empty());
  CHECK_FALSE(st.zombie_since.has_value());
  CHECK_FALSE(st.resurrected_since.has_value());
}

TEST_CASE("35-day gap yields a resurrection; churned states retained") {
  // Active days 0..5, gap of 35 inactive days (6..40), returns day 41.
  auto t = testutil::active_days("a", {0, 1, 2, 3, 4, 5, 41, 42}, 50);
  auto st = label_states(t, default_rules());
  REQUIRE(st.episodes.size() == 1);
  CHECK(st.episodes[0].kind == EpisodeKind::resurrection);
  CHECK(st.episodes[0].start == 5);
  CHECK(st.episodes[0].gap_length == 35);
  REQUIRE(st.episodes[0].end.has_value());
  CHECK(*st.episodes[0].end == 41);
  // Day-scan oracle: churned exactly when days since last activity > 9.
  const std::vector<Date> active = {0, 1, 2, 3, 4, 5, 41, 42};
  for (Date d = 0; d <= 50; ++d) {
    Date last_active = 0;
    for (Date a : active) {
      if (a <= d) last_active = a;
    }
    const bool churned = (d - last_active) > 9;
    CHECK(st.login_state(d) ==
          (churned ? LoginState::churned : LoginState::active));
  }
  REQUIRE(st.resurrected_since.has_value());
  CHECK(*st.resurrected_since == 41);
  CHECK_FALSE(st.ever_resurrected_asof(40));
  CHECK(st.ever_resurrected_asof(41));
}

TEST_CASE("15-day gap is a genuine false churn and gets annulled") {
  auto t = testutil::active_days("a", {0, 1, 2, 17, 18}, 25);
  auto st = label_states(t, default_rules());
  REQUIRE(st.episodes.size() == 1);
  CHECK(st.episodes[0].kind == EpisodeKind::genuine_false_churn);
  CHECK(st.episodes[0].gap_length == 14);
  // Annulment: the whole gap is relabeled active.
  for (Date d = 0; d <= 18; ++d) {
    CHECK(st.login_state(d) == LoginState::active);
  }
  CHECK_FALSE(st.resurrected_since.has_value());
}

TEST_CASE("open trailing gap stays churned") {
  auto t = testutil::active_days("a", {0, 1, 2}, 30);
  auto st = label_states(t, default_rules());
  REQUIRE(st.episodes.size() == 1);
  CHECK(st.episodes[0].kind == EpisodeKind::churn);
  CHECK_FALSE(st.episodes[0].end.has_value());
  // Flip day: last_active + window + 1 = 2 + 9 + 1 = 12.
  CHECK(st.login_state(11) == LoginState::active);
  CHECK(st.login_state(12) == LoginState::churned);
  CHECK(st.login_state(30) == LoginState::churned);
}

TEST_CASE("purchase churn and purchase resurrection") {
  // Purchases on days 0 and 60 (gap 59 > 50); logins frequent throughout.
  std::vector<testutil::Day> days;
  for (Date d = 0; d <= 70; d += 2) {
    testutil::Day day{d};
    if (d == 0 || d == 60) {
      day.purchases = 1;
      day.spend_cents = 100;
    }
    days.push_back(day);
  }
  auto st = label_states(testutil::timeline("a", days, 70), default_rules());
  bool found = false;
  for (const auto& ep : st.episodes) {
    if (ep.kind == EpisodeKind::purchase_resurrection) {
      found = true;
      CHECK(ep.start == 0);
      CHECK(ep.gap_length == 59);
    }
  }
  CHECK(found);
  REQUIRE(st.purchase_resurrected_since.has_value());
  CHECK(*st.purchase_resurrected_since == 60);
  // Purchase-churn flip day: 0 + 50 + 1 = 51; timeline has even days only.
  CHECK(st.purchase_state(50) == PurchaseState::paying_active);
  CHECK(st.purchase_state(51) == PurchaseState::purchase_churned);
  CHECK(st.purchase_state(60) == PurchaseState::paying_active);
}

TEST_CASE("never-paid players are never purchase churned") {
  auto st =
      label_states(testutil::active_days("a", {0, 40}, 80), default_rules());
  for (Date d = st.start; d <= st.end; ++d) {
    CHECK(st.purchase_state(d) == PurchaseState::never_paid);
  }
}

TEST_CASE("stricter purchase_resurrect_min_gap filters short gaps") {
  std::vector<testutil::Day> days;
  for (Date d = 0; d <= 70; ++d) {
    testutil::Day day{d};
    if (d == 0 || d == 55) {
      day.purchases = 1;
      day.spend_cents = 100;
    }
    days.push_back(day);
  }
  auto t = testutil::timeline("a", days, 70);
  auto rules = default_rules();
  auto st = label_states(t, rules);
  CHECK(st.purchase_resurrected_since.has_value());  // gap 54 > 50
  rules.purchase_resurrect_min_gap = 60;
  auto st2 = label_states(t, rules);
  CHECK_FALSE(st2.purchase_resurrected_since.has_value());
}

TEST_CASE("zombie labeling follows the trailing-window thresholds") {
  // 45 days of engaged play, then thin 60-second logins with no level-ups
  // or purchases.
  std::vector<testutil::Day> days;
  for (Date d = 0; d <= 44; ++d) days.push_back({d, 7200, 2, 1, 0, 0});
  for (Date d = 45; d <= 120; ++d) days.push_back({d, 60, 1, 0, 0, 0});
  auto st = label_states(testutil::timeline("a", days, 120), default_rules());
  // While any engaged day is inside the 30-day lookback the playtime sum
  // exceeds 3 hours; first all-thin window ends at 45 + 30 = 75... the
  // window [d-29, d] is all-thin from d = 74; sum = 30*60s < 10800.
  CHECK(st.engagement_state(70) == EngagementState::normal);
  CHECK(st.engagement_state(74) == EngagementState::zombie);
  CHECK(st.engagement_state(120) == EngagementState::zombie);
  REQUIRE(st.zombie_since.has_value());
  CHECK(*st.zombie_since == 74);
  CHECK(st.ever_zombie_asof(74));
  CHECK_FALSE(st.ever_zombie_asof(73));
}

TEST_CASE("players younger than the lookback are never zombies") {
  std::vector<testutil::Day> days;
  for (Date d = 0; d <= 25; ++d) days.push_back({d, 60, 1, 0, 0, 0});
  auto st = label_states(testutil::timeline("a", days, 25), default_rules());
  for (Date d = 0; d <= 25; ++d) {
    CHECK(st.engagement_state(d) == EngagementState::normal);
  }
}

TEST_CASE("single 40-day resolved gap counts as ever-resurrected") {
  auto c = testutil::cohort({testutil::active_days("a", {0, 41}, 60)}, 0, 60);
  auto report = segment_cohort(c, default_rules(), 60);
  CHECK(report.players == 1);
  CHECK(report.ever_resurrected == 1);
  CHECK(report.frac(report.ever_resurrected) == doctest::Approx(1.0));
}

TEST_CASE("always-active cohort is 100% normal") {
  auto c = testutil::cohort({engaged_player(60)}, 0, 60);
  auto report = segment_cohort(c, default_rules(), 60);
  CHECK(report.currently_churned == 0);
  CHECK(report.normal == 1);
}

TEST_CASE("state partition and annulment invariants on random traces") {
  Rng rng(31337);
  const auto rules = default_rules();
  for (int trial = 0; trial < 120; ++trial) {
    std::vector<testutil::Day> days;
    Date d = 0;
    const Date end = 150;
    while (d <= end) {
      testutil::Day day{d};
      day.playtime_s = rng.bernoulli(0.3) ? 60 : 5000;
      day.levelups = rng.bernoulli(0.4) ? 1 : 0;
      if (rng.bernoulli(0.2)) {
        day.purchases = 1;
        day.spend_cents = 100;
      }
      days.push_back(day);
      // Mix of short and long gaps.
      if (rng.bernoulli(0.15)) {
        d += 10 + static_cast<Date>(rng.uniform_index(50));
      } else {
        d += 1 + static_cast<Date>(rng.uniform_index(4));
      }
    }
    auto t = testutil::timeline("p", days, end);
    auto st = label_states(t, rules);

    for (Date day = st.start; day <= st.end; ++day) {
      // zombie implies active.
      if (st.engagement_state(day) == EngagementState::zombie) {
        CHECK(st.login_state(day) == LoginState::active);
      }
    }
    // Annulment: no resolved gap < resurrect_min_gap remains churned.
    for (const auto& ep : st.episodes) {
      if (ep.end && ep.gap_length < rules.resurrect_min_gap &&
          (ep.kind == EpisodeKind::churn ||
           ep.kind == EpisodeKind::genuine_false_churn)) {
        CHECK(ep.kind == EpisodeKind::genuine_false_churn);
        for (Date day = ep.start; day < *ep.end; ++day) {
          CHECK(st.login_state(day) == LoginState::active);
        }
      }
      if (ep.kind == EpisodeKind::resurrection) {
        CHECK(ep.gap_length >= rules.resurrect_min_gap);
      }
      if (ep.kind == EpisodeKind::purchase_resurrection) {
        CHECK(ep.gap_length > rules.purchase_window);
      }
    }
    // Determinism: pure function of (timeline, rules).
    auto st2 = label_states(t, rules);
    CHECK(st.episodes.size() == st2.episodes.size());
    for (Date day = st.start; day <= st.end; ++day) {
      CHECK(st.login_state(day) == st2.login_state(day));
      CHECK(st.engagement_state(day) == st2.engagement_state(day));
      CHECK(st.purchase_state(day) == st2.purchase_state(day));
    }
  }
}

TEST_CASE("point-in-time queries are truncation-consistent") {
  // login_churned_at(t, rules, d) must equal the retrospective labeling of
  // the truncated timeline (records <= d) at day d, pre-annulment.
  Rng rng(77);
  const auto rules = default_rules();
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int> offsets;
    Date d = 0;
    while (d <= 120) {
      offsets.push_back(d);
      d += 1 + static_cast<Date>(rng.uniform_index(30));
    }
    auto t = testutil::active_days("p", offsets, 120);
    for (Date as_of = t.first_login; as_of <= 120; as_of += 7) {
      // Oracle: days since last activity <= as_of.
      Date last = t.first_login;
      for (int o : offsets) {
        if (o <= as_of) last = o;
      }
      CHECK(login_churned_at(t, rules, as_of) ==
            ((as_of - last) > rules.login_window));
    }
  }
}

TEST_CASE("rules validation rejects inconsistent settings") {
  ProfilingRules r;
  r.resurrect_min_gap = 5;  // must exceed login_window
  CHECK_THROWS_AS(r.validate(), DomainError);
  ProfilingRules r2;
  r2.login_window = 0;
  CHECK_THROWS_AS(r2.validate(), DomainError);
}
