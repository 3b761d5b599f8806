#pragma once

#include <string>
#include <vector>

#include "churnforge/dates.hpp"
#include "churnforge/event_model.hpp"

namespace testutil {

struct Day {
  churnforge::Date date;
  double playtime_s = 600;
  int sessions = 1;
  int levelups = 0;
  int purchases = 0;
  std::int64_t spend_cents = 0;
};

// Hand-built timeline; level accumulates from levelups.
inline churnforge::PlayerTimeline timeline(const std::string& id,
                                           const std::vector<Day>& days,
                                           churnforge::Date last_observed) {
  churnforge::PlayerTimeline t;
  t.player_id = id;
  int level = 0;
  for (const auto& d : days) {
    churnforge::PlayerDayRecord r;
    r.date = d.date;
    r.playtime_s = d.playtime_s;
    r.sessions = d.sessions;
    level += d.levelups;
    r.level = level;
    r.levelups = d.levelups;
    r.purchases = d.purchases;
    r.spend_cents = d.spend_cents;
    t.records.push_back(r);
  }
  t.first_login = days.front().date;
  t.last_observed = last_observed;
  return t;
}

// Active on the given day offsets (uniform playtime), observed to
// last_observed.
inline churnforge::PlayerTimeline active_days(const std::string& id,
                                              const std::vector<int>& offsets,
                                              churnforge::Date last_observed,
                                              churnforge::Date base = 0) {
  std::vector<Day> days;
  for (int o : offsets) days.push_back({base + o});
  return timeline(id, days, last_observed);
}

inline churnforge::Cohort cohort(std::vector<churnforge::PlayerTimeline> ts,
                                 churnforge::Date start,
                                 churnforge::Date end) {
  churnforge::Cohort c;
  c.timelines = std::move(ts);
  std::sort(c.timelines.begin(), c.timelines.end(),
            [](const auto& a, const auto& b) {
              return a.player_id < b.player_id;
            });
  c.period_start = start;
  c.period_end = end;
  return c;
}

}  // namespace testutil
