#include <cmath>
#include <vector>

#include "churnforge/errors.hpp"
#include "churnforge/rng.hpp"
#include "churnforge/survival.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace churnforge;

namespace {

SurvivalSample s(double t, bool event) {
  SurvivalSample x;
  x.time = t;
  x.event = event;
  return x;
}

}  // namespace

TEST_CASE("kaplan-meier hand values") {
  SUBCASE("{(1,e),(2,c),(3,e)} -> 2/3 then 0") {
    auto curve = kaplan_meier({s(1, true), s(2, false), s(3, true)});
    CHECK(curve.at(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(curve.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(curve.at(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(curve.at(3) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("no censoring reduces to the empirical survivor function") {
    auto curve = kaplan_meier({s(1, true), s(2, true), s(3, true)});
    CHECK(curve.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(curve.at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(curve.at(3) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("all censored -> S = 1, CI = [1,1]") {
    auto curve = kaplan_meier({s(1, false), s(5, false)});
    for (const auto& p : curve.points) {
      CHECK(p.s == 1.0);
      CHECK(p.ci_low == 1.0);
      CHECK(p.ci_high == 1.0);
    }
  }
  SUBCASE("event/censoring ties: events first") {
    // At t=2: event and censoring tied. Events first means n_at_risk=2 for
    // the event, so S(2) = (1 - 1/3) * (1 - 1/2) after the t=1 event... the
    // t=1 event has n=3: S(1)=2/3; at t=2 the censored sample still counts
    // at risk: S(2) = 2/3 * (1 - 1/2) = 1/3.
    auto curve = kaplan_meier({s(1, true), s(2, true), s(2, false)});
    CHECK(curve.at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("kaplan-meier invariants on random inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<SurvivalSample> samples;
    const int n = 1 + static_cast<int>(rng.uniform_index(40));
    for (int i = 0; i < n; ++i) {
      samples.push_back(
          s(std::floor(rng.uniform() * 20), rng.bernoulli(0.6)));
    }
    auto curve = kaplan_meier(samples);
    REQUIRE(!curve.points.empty());
    CHECK(curve.points.front().t == 0.0);
    CHECK(curve.points.front().s == 1.0);
    double prev = 1.0;
    for (const auto& p : curve.points) {
      CHECK(p.s <= prev + 1e-15);
      CHECK(p.ci_low >= 0.0);
      CHECK(p.ci_high <= 1.0);
      CHECK(p.ci_low <= p.s + 1e-12);
      CHECK(p.s <= p.ci_high + 1e-12);
      prev = p.s;
    }
  }
}

TEST_CASE("nelson-aalen hand values") {
  SUBCASE("{(1,e),(2,e),(3,c)}") {
    auto na = nelson_aalen({s(1, true), s(2, true), s(3, false)});
    CHECK(na.at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(na.at(2) == doctest::Approx(1.0 / 3.0 + 0.5).epsilon(1e-12));
    CHECK(na.at(3) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(na.at(0.5) == 0.0);
  }
  SUBCASE("all censored -> 0") {
    auto na = nelson_aalen({s(1, false), s(2, false)});
    CHECK(na.at(10) == 0.0);
  }
  SUBCASE("single event") {
    auto na = nelson_aalen({s(1, true)});
    CHECK(na.at(1) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("km and nelson-aalen share the same risk table") {
  Rng rng(9);
  std::vector<SurvivalSample> samples;
  for (int i = 0; i < 30; ++i) {
    samples.push_back(s(std::floor(rng.uniform() * 12), rng.bernoulli(0.5)));
  }
  auto table = risk_table(samples);
  // Recompute both estimators from the table and compare.
  auto curve = kaplan_meier(samples);
  auto na = nelson_aalen(samples);
  double surv = 1.0, haz = 0.0;
  for (const auto& row : table) {
    if (row.events <= 0) continue;
    surv *= 1.0 - row.events / row.at_risk;
    haz += row.events / row.at_risk;
    CHECK(curve.at(row.t) == doctest::Approx(surv).epsilon(1e-12));
    CHECK(na.at(row.t) == doctest::Approx(haz).epsilon(1e-12));
  }
}

TEST_CASE("weighted km with unit weights equals unweighted km") {
  Rng rng(17);
  std::vector<SurvivalSample> samples;
  std::vector<double> times, weights;
  std::vector<bool> events;
  for (int i = 0; i < 25; ++i) {
    double t = std::floor(rng.uniform() * 15);
    bool e = rng.bernoulli(0.6);
    samples.push_back(s(t, e));
    times.push_back(t);
    events.push_back(e);
    weights.push_back(1.0);
  }
  auto a = kaplan_meier(samples);
  auto b = kaplan_meier_weighted(times, events, weights);
  for (double t = 0; t <= 15; t += 0.5) {
    CHECK(a.at(t) == doctest::Approx(b.at(t)).epsilon(1e-12));
  }
}

TEST_CASE("greenwood log-log CI coverage near 95%") {
  // 1000 exponential replicates; band must cover the true S at the median
  // event time in 93-97% of runs.
  const double rate = 0.1;
  int covered = 0, total = 0;
  Rng rng(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<SurvivalSample> samples;
    std::vector<double> event_times;
    for (int i = 0; i < 80; ++i) {
      double t = rng.exponential(rate);
      double c = rng.exponential(rate * 0.4);
      if (t <= c) {
        samples.push_back(s(t, true));
        event_times.push_back(t);
      } else {
        samples.push_back(s(c, false));
      }
    }
    if (event_times.size() < 5) continue;
    std::sort(event_times.begin(), event_times.end());
    const double tm = event_times[event_times.size() / 2];
    const double truth = std::exp(-rate * tm);
    auto curve = kaplan_meier(samples);
    // Find the CI at tm (last point with t <= tm).
    const CurvePoint* at = &curve.points.front();
    for (const auto& p : curve.points) {
      if (p.t <= tm) at = &p;
    }
    ++total;
    if (at->ci_low <= truth && truth <= at->ci_high) ++covered;
  }
  const double coverage = static_cast<double>(covered) / total;
  CHECK(coverage >= 0.93);
  CHECK(coverage <= 0.97);
}

TEST_CASE("survival samples from traces") {
  ProfilingRules rules;
  SUBCASE("event sample at the gap start on each axis") {
    // Active days 0..99 with 30-minute days and a level-up every 5th day,
    // then churn (open gap).
    std::vector<testutil::Day> days;
    for (Date d = 0; d < 100; ++d) {
      days.push_back({d, 1980, 1, d % 5 == 0 ? 1 : 0, 0, 0});
    }
    auto t = testutil::timeline("a", days, 200);
    auto st = label_states(t, rules);
    auto life = survival_sample_for(t, st, SurvivalAxis::lifetime_days,
                                    GapKind::login, 200, rules);
    REQUIRE(life.has_value());
    CHECK(life->event);
    CHECK(life->time == doctest::Approx(99.0));  // gap starts at day 99
    auto level = survival_sample_for(t, st, SurvivalAxis::level,
                                     GapKind::login, 200, rules);
    REQUIRE(level.has_value());
    CHECK(level->time == doctest::Approx(20.0));
    auto play = survival_sample_for(t, st, SurvivalAxis::playtime_hours,
                                    GapKind::login, 200, rules);
    REQUIRE(play.has_value());
    CHECK(play->time == doctest::Approx(100 * 1980 / 3600.0));
  }
  SUBCASE("active through cutoff is censored at the cutoff value") {
    std::vector<testutil::Day> days;
    for (Date d = 0; d <= 220; ++d) days.push_back({d});
    auto t = testutil::timeline("a", days, 220);
    auto st = label_states(t, rules);
    auto life = survival_sample_for(t, st, SurvivalAxis::lifetime_days,
                                    GapKind::login, 200, rules);
    REQUIRE(life.has_value());
    CHECK_FALSE(life->event);
    CHECK(life->time == doctest::Approx(200.0));
  }
  SUBCASE("annulled gap is skipped; first surviving churn wins") {
    // Genuine false churn around day 50 (gap 15), real churn from day 90.
    std::vector<testutil::Day> days;
    for (Date d = 0; d <= 50; ++d) days.push_back({d});
    for (Date d = 66; d <= 90; ++d) days.push_back({d});
    auto t = testutil::timeline("a", days, 200);
    auto st = label_states(t, rules);
    auto life = survival_sample_for(t, st, SurvivalAxis::lifetime_days,
                                    GapKind::login, 200, rules);
    REQUIRE(life.has_value());
    CHECK(life->event);
    CHECK(life->time == doctest::Approx(90.0));
  }
  SUBCASE("never-paid players are out of scope for purchase kind") {
    auto t = testutil::active_days("a", {0, 1, 2}, 100);
    auto st = label_states(t, rules);
    CHECK_FALSE(survival_sample_for(t, st, SurvivalAxis::lifetime_days,
                                    GapKind::purchase, 100, rules)
                    .has_value());
  }
  SUBCASE("churn too close to the cutoff is censored, not an event") {
    // Gap starts day 30; flip day is 30 + 9 + 1 = 40 > cutoff 35.
    auto t = testutil::active_days("a", {0, 10, 20, 30}, 200);
    auto st = label_states(t, rules);
    auto life = survival_sample_for(t, st, SurvivalAxis::lifetime_days,
                                    GapKind::login, 35, rules);
    REQUIRE(life.has_value());
    CHECK_FALSE(life->event);
    CHECK(life->time == doctest::Approx(35.0));
  }
}

TEST_CASE("stratified km: single stratum equals pooled; pooled is bounded") {
  ProfilingRules rules;
  // Build a cohort with clear strata: some resurrected, some normal.
  std::vector<PlayerTimeline> ts;
  for (int i = 0; i < 15; ++i) {
    std::vector<int> offs;
    for (int d = 0; d <= 40 + i; ++d) offs.push_back(d);
    ts.push_back(testutil::active_days("n" + std::to_string(i), offs, 200));
  }
  for (int i = 0; i < 15; ++i) {
    // 40-day gap then return: resurrected.
    std::vector<int> offs;
    for (int d = 0; d <= 20 + i; ++d) offs.push_back(d);
    offs.push_back(20 + i + 41);
    ts.push_back(testutil::active_days("r" + std::to_string(i), offs, 200));
  }
  auto cohort = testutil::cohort(std::move(ts), 0, 200);
  std::vector<StateTimeline> states;
  for (const auto& t : cohort.timelines) {
    states.push_back(label_states(t, rules));
  }
  auto strata = km_stratified(cohort, states, SurvivalAxis::lifetime_days,
                              GapKind::login, 200, rules);
  REQUIRE(strata.count("normal") == 1);
  REQUIRE(strata.count("resurrected") == 1);
  auto samples = to_survival_samples(cohort, states,
                                     SurvivalAxis::lifetime_days,
                                     GapKind::login, 200, rules);
  auto pooled = kaplan_meier(samples);
  // Pooled lies between the stratum curves at every probe point.
  for (double t = 1; t <= 120; t += 7) {
    double lo = std::min(strata.at("normal").curve.at(t),
                         strata.at("resurrected").curve.at(t));
    double hi = std::max(strata.at("normal").curve.at(t),
                         strata.at("resurrected").curve.at(t));
    CHECK(pooled.at(t) >= lo - 1e-12);
    CHECK(pooled.at(t) <= hi + 1e-12);
  }
  // Small stratum flagging.
  auto strata2 = km_stratified(cohort, states, SurvivalAxis::lifetime_days,
                               GapKind::login, 200, rules, 100);
  CHECK(strata2.at("normal").low_confidence);
}

TEST_CASE("axis name round trip") {
  for (auto a : {SurvivalAxis::lifetime_days, SurvivalAxis::level,
                 SurvivalAxis::playtime_hours}) {
    CHECK(parse_axis(axis_name(a)) == a);
  }
  CHECK(parse_axis("lifetime") == SurvivalAxis::lifetime_days);
  CHECK(parse_axis("playtime") == SurvivalAxis::playtime_hours);
  CHECK_THROWS_AS(parse_axis("bogus"), DomainError);
}

TEST_CASE("step function semantics") {
  StepFunction f(1.0, {{1.0, 0.8}, {3.0, 0.5}});
  CHECK(f.at(0.5) == 1.0);
  CHECK(f.at(1.0) == 0.8);   // right-continuous
  CHECK(f.before(1.0) == 1.0);
  CHECK(f.at(2.9) == 0.8);
  CHECK(f.at(3.0) == 0.5);
  CHECK(f.before(3.0) == 0.8);
  CHECK(f.at(100.0) == 0.5);
}
