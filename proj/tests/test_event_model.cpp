#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "churnforge/errors.hpp"
#include "churnforge/event_model.hpp"
#include "churnforge/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace churnforge;

namespace {

const char* kHeader =
    "player_id,date,playtime_s,sessions,level,levelups,purchases,spend\n";

std::string row(const std::string& id, const std::string& date,
                double playtime, int sessions, int level, int levelups,
                int purchases, const std::string& spend) {
  std::ostringstream ss;
  ss << id << ',' << date << ',' << playtime << ',' << sessions << ','
     << level << ',' << levelups << ',' << purchases << ',' << spend << '\n';
  return ss.str();
}

}  // namespace

TEST_CASE("duplicate day rows merge additively, level max-merged") {
  std::string csv = kHeader;
  csv += row("a", "2020-01-01", 100, 1, 2, 2, 1, "3.00");
  csv += row("a", "2020-01-01", 200, 2, 3, 1, 1, "2.00");
  Cohort c = ingest_events(csv);
  REQUIRE(c.timelines.size() == 1);
  const auto& r = c.timelines[0].records.at(0);
  CHECK(r.playtime_s == 300);
  CHECK(r.sessions == 3);
  CHECK(r.level == 3);
  CHECK(r.levelups == 3);
  CHECK(r.purchases == 2);
  CHECK(r.spend_cents == 500);
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(ingest_events(""), DomainError);
  CHECK_THROWS_AS(ingest_events(kHeader), DomainError);
}

TEST_CASE("ingest counting oracle on a randomized fixture") {
  // 3 players, 100 rows with random dates (duplicates included); the
  // oracle counts distinct (player, date) pairs independently.
  Rng rng(42);
  const char* ids[3] = {"p1", "p2", "p3"};
  std::map<std::string, std::set<int>> expected;
  std::string csv = kHeader;
  for (int i = 0; i < 100; ++i) {
    const char* id = ids[rng.uniform_index(3)];
    const int day = static_cast<int>(rng.uniform_index(40));
    expected[id].insert(day);
    // Zero levels keep the monotonicity validator satisfied under any
    // interleaving.
    csv += row(id, format_date(make_date(2020, 1, 1) + day), 60, 1, 0, 0, 0,
               "0");
  }
  IngestReport report;
  Cohort c = ingest_events(csv, {}, &report);
  CHECK(report.rows_read == 100);
  REQUIRE(c.timelines.size() == expected.size());
  for (const auto& t : c.timelines) {
    CHECK(t.records.size() == expected.at(t.player_id).size());
    CHECK(t.first_login == t.records.front().date);
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      CHECK(t.records[i - 1].date < t.records[i].date);
    }
  }
}

TEST_CASE("non-monotone level rejected per player") {
  std::string csv = kHeader;
  csv += row("a", "2020-01-01", 100, 1, 5, 5, 0, "0");
  csv += row("a", "2020-01-02", 100, 1, 4, 0, 0, "0");
  CHECK_THROWS_WITH_AS(ingest_events(csv),
                       doctest::Contains("2020-01-02"), DomainError);
}

TEST_CASE("levelups must equal the level increase") {
  std::string csv = kHeader;
  csv += row("a", "2020-01-01", 100, 1, 1, 1, 0, "0");
  csv += row("a", "2020-01-02", 100, 1, 5, 2, 0, "0");
  CHECK_THROWS_AS(ingest_events(csv), DomainError);
}

TEST_CASE("malformed rows respect the error budget") {
  std::string good = kHeader;
  good += row("a", "2020-01-01", 100, 1, 0, 0, 0, "0");
  std::string bad = good + "a,not-a-date,1,1,0,0,0,0\n";
  CHECK_THROWS_AS(ingest_events(bad), DomainError);

  IngestOptions opts;
  opts.error_budget = 1;
  IngestReport report;
  Cohort c = ingest_events(bad, opts, &report);
  CHECK(c.timelines.size() == 1);
  CHECK(report.rows_rejected == 1);
  REQUIRE(report.row_errors.size() == 1);
  CHECK(report.row_errors[0].find("line 3") != std::string::npos);
}

TEST_CASE("jsonl input matches csv input") {
  std::string csv = kHeader;
  csv += row("a", "2020-01-01", 100, 2, 1, 1, 1, "4.50");
  std::string jsonl =
      R"({"player_id":"a","date":"2020-01-01","playtime_s":100,)"
      R"("sessions":2,"level":1,"levelups":1,"purchases":1,"spend":"4.50"})"
      "\n";
  Cohort c1 = ingest_events(csv);
  Cohort c2 = ingest_events(jsonl);
  REQUIRE(c1.timelines.size() == c2.timelines.size());
  CHECK(c1.timelines[0].records[0].spend_cents ==
        c2.timelines[0].records[0].spend_cents);
  CHECK(c1.timelines[0].records[0].sessions ==
        c2.timelines[0].records[0].sessions);
}

TEST_CASE("activity gap hand cases") {
  // Active on days 1 and 5 only: one resolved gap of 3 inactive days.
  auto t = testutil::active_days("a", {1, 5}, 5);
  auto gaps = activity_gaps(t, GapKind::login);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].length == 3);
  CHECK(gaps[0].resolved);
  CHECK(gaps[0].start == 1);
  CHECK(gaps[0].end == 5);

  // Purchases on day 1 only, observed to day 60: open purchase gap of 59.
  auto t2 = testutil::timeline("b", {{1, 600, 1, 0, 1, 100}}, 60);
  auto pg = activity_gaps(t2, GapKind::purchase);
  REQUIRE(pg.size() == 1);
  CHECK(pg[0].length == 59);
  CHECK_FALSE(pg[0].resolved);

  // No purchases at all: empty purchase gap list.
  CHECK(activity_gaps(t, GapKind::purchase).empty());

  // Single-day timeline: no gaps.
  CHECK(activity_gaps(testutil::active_days("c", {3}, 3), GapKind::login)
            .empty());
}

TEST_CASE("activity gaps match a day-by-day bitmap oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> offsets;
    int d = 0;
    const int n = 2 + static_cast<int>(rng.uniform_index(20));
    for (int i = 0; i < n; ++i) {
      offsets.push_back(d);
      d += 1 + static_cast<int>(rng.uniform_index(40));
    }
    const Date last_observed =
        offsets.back() + static_cast<int>(rng.uniform_index(30));
    auto t = testutil::active_days("x", offsets, last_observed);
    auto gaps = activity_gaps(t, GapKind::login);

    // Oracle: expand to a daily bitmap and scan runs of zeros.
    std::vector<int> bitmap(static_cast<std::size_t>(last_observed) + 1, 0);
    for (int o : offsets) bitmap[static_cast<std::size_t>(o)] = 1;
    std::vector<std::pair<int, bool>> expected;  // (length, resolved)
    int run = 0;
    for (Date day = offsets.front() + 1; day <= last_observed; ++day) {
      if (bitmap[static_cast<std::size_t>(day)]) {
        if (run > 0) expected.emplace_back(run, true);
        run = 0;
      } else {
        ++run;
      }
    }
    if (run > 0) expected.emplace_back(run, false);

    REQUIRE(gaps.size() == expected.size());
    int total_gap_days = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      CHECK(gaps[i].length == expected[i].first);
      CHECK(gaps[i].resolved == expected[i].second);
      total_gap_days += gaps[i].length;
    }
    // Calendar partition: active days + gap days cover the span.
    CHECK(static_cast<int>(offsets.size()) + total_gap_days ==
          last_observed - offsets.front() + 1);
  }
}

TEST_CASE("vip selection hand and enumeration cases") {
  auto spender = [](const std::string& id, std::int64_t cents) {
    return testutil::timeline(id, {{0, 600, 1, 0, 1, cents}}, 10);
  };
  SUBCASE("prefix minimality") {
    auto c = testutil::cohort({spender("A", 10000), spender("B", 5000),
                               spender("C", 1000), spender("D", 500),
                               spender("E", 100)},
                              0, 10);
    auto vip = select_vip(c, 0.5, 0, 10);
    CHECK(vip.threshold_cents == 10000);
    CHECK(vip.vip_ids == std::set<std::string>{"A"});
    CHECK(vip.realized_share == doctest::Approx(10000.0 / 16600.0));
  }
  SUBCASE("ties at threshold are included") {
    auto c = testutil::cohort({spender("A", 1000), spender("B", 1000),
                               spender("C", 1000), spender("D", 1000)},
                              0, 10);
    auto vip = select_vip(c, 0.5, 0, 10);
    CHECK(vip.vip_ids.size() == 4);
    CHECK(vip.realized_share == doctest::Approx(1.0));
  }
  SUBCASE("single paying player at any target") {
    auto c = testutil::cohort(
        {spender("A", 700), testutil::active_days("B", {0, 1}, 10)}, 0, 10);
    for (double target : {0.1, 0.5, 0.9}) {
      CHECK(select_vip(c, target, 0, 10).vip_ids ==
            std::set<std::string>{"A"});
    }
  }
  SUBCASE("no revenue is an error") {
    auto c = testutil::cohort({testutil::active_days("A", {0}, 10)}, 0, 10);
    CHECK_THROWS_AS(select_vip(c, 0.5, 0, 10), DomainError);
  }
  SUBCASE("share always reaches the target (enumeration)") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<PlayerTimeline> ts;
      const int n = 2 + static_cast<int>(rng.uniform_index(18));
      for (int i = 0; i < n; ++i) {
        ts.push_back(spender("p" + std::to_string(i),
                             1 + static_cast<std::int64_t>(
                                     rng.uniform_index(5000))));
      }
      auto c = testutil::cohort(std::move(ts), 0, 10);
      const double target = 0.1 + 0.8 * rng.uniform();
      auto vip = select_vip(c, target, 0, 10);
      CHECK(vip.realized_share >= target);
    }
  }
}

TEST_CASE("cohort save/load round trip is exact") {
  std::string csv = kHeader;
  csv += row("a", "2020-01-01", 100.5, 1, 1, 1, 1, "3.33");
  csv += row("a", "2020-01-04", 50, 2, 1, 0, 0, "0");
  csv += row("b", "2020-01-02", 7200, 3, 2, 2, 0, "0");
  Cohort c = ingest_events(csv);
  const auto dir =
      (std::filesystem::temp_directory_path() / "cf_cohort_rt").string();
  save_cohort(c, dir);
  Cohort c2 = load_cohort(dir);
  REQUIRE(c2.timelines.size() == c.timelines.size());
  CHECK(c2.period_start == c.period_start);
  CHECK(c2.period_end == c.period_end);
  for (std::size_t i = 0; i < c.timelines.size(); ++i) {
    const auto& t1 = c.timelines[i];
    const auto& t2 = c2.timelines[i];
    CHECK(t1.player_id == t2.player_id);
    CHECK(t1.first_login == t2.first_login);
    CHECK(t1.last_observed == t2.last_observed);
    REQUIRE(t1.records.size() == t2.records.size());
    for (std::size_t r = 0; r < t1.records.size(); ++r) {
      CHECK(t1.records[r].date == t2.records[r].date);
      CHECK(t1.records[r].playtime_s == t2.records[r].playtime_s);
      CHECK(t1.records[r].spend_cents == t2.records[r].spend_cents);
      CHECK(t1.records[r].level == t2.records[r].level);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("timeline point queries") {
  auto t = testutil::timeline(
      "a", {{0, 600, 1, 1, 0, 0}, {3, 1200, 2, 2, 1, 250}}, 10);
  CHECK(t.level_at(-1) == 0);
  CHECK(t.level_at(0) == 1);
  CHECK(t.level_at(2) == 1);
  CHECK(t.level_at(3) == 3);
  CHECK(t.playtime_at(3) == 1800);
  CHECK(t.spend_at(2) == 0);
  CHECK(t.spend_at(3) == 250);
  CHECK_FALSE(t.has_purchase_by(2));
  CHECK(t.has_purchase_by(3));
  CHECK(t.record_on(1) == nullptr);
  REQUIRE(t.record_on(3) != nullptr);
}
