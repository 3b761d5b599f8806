#include "churnforge/profiling.hpp"

#include <algorithm>

#include "churnforge/errors.hpp"

namespace churnforge {

const char* episode_kind_name(EpisodeKind k) {
  switch (k) {
    case EpisodeKind::churn: return "churn";
    case EpisodeKind::genuine_false_churn: return "genuine_false_churn";
    case EpisodeKind::resurrection: return "resurrection";
    case EpisodeKind::purchase_churn: return "purchase_churn";
    case EpisodeKind::purchase_resurrection: return "purchase_resurrection";
  }
  return "?";
}

void ProfilingRules::validate() const {
  if (login_window < 1) throw DomainError("login_window must be >= 1");
  if (purchase_window < 1) throw DomainError("purchase_window must be >= 1");
  if (resurrect_min_gap <= login_window) {
    throw DomainError("resurrect_min_gap must exceed login_window");
  }
  // purchase_window < login_window is unusual but not fatal; a login churner
  // is then not necessarily a purchase churner.
}

namespace {

// Last date <= as_of with qualifying activity, or nullopt.
std::optional<Date> last_activity_before(const PlayerTimeline& t, GapKind kind,
                                         Date as_of) {
  std::optional<Date> last;
  for (const auto& r : t.records) {
    if (r.date > as_of) break;
    const bool q = (kind == GapKind::login) ? r.login_activity()
                                            : r.purchase_activity();
    if (q) last = r.date;
  }
  return last;
}

}  // namespace

StateTimeline label_states(const PlayerTimeline& timeline,
                           const ProfilingRules& rules) {
  rules.validate();
  StateTimeline st;
  st.player_id = timeline.player_id;
  st.start = timeline.first_login;
  st.end = timeline.last_observed;
  const std::size_t n = static_cast<std::size_t>(st.end - st.start + 1);
  st.login_states.assign(n, LoginState::active);
  st.engagement_states.assign(n, EngagementState::normal);
  st.purchase_states.assign(n, PurchaseState::never_paid);

  auto day = [&](Date d) { return static_cast<std::size_t>(d - st.start); };

  // Login churn episodes. The state flips the day the gap first exceeds the
  // window (last activity + window + 1). Resolved gaps shorter than the
  // resurrection bar are annulled: recorded as genuine false churn and left
  // active.
  for (const auto& g : activity_gaps(timeline, GapKind::login)) {
    if (g.length <= rules.login_window) continue;
    const Date flip = g.start + rules.login_window + 1;
    if (!g.resolved) {
      st.episodes.push_back({EpisodeKind::churn, g.start, std::nullopt,
                             g.length});
      for (Date d = flip; d <= st.end; ++d) {
        st.login_states[day(d)] = LoginState::churned;
      }
      continue;
    }
    if (g.length >= rules.resurrect_min_gap) {
      st.episodes.push_back({EpisodeKind::resurrection, g.start, g.end,
                             g.length});
      for (Date d = flip; d < g.end; ++d) {
        st.login_states[day(d)] = LoginState::churned;
      }
      if (!st.resurrected_since) st.resurrected_since = g.end;
    } else {
      st.episodes.push_back({EpisodeKind::genuine_false_churn, g.start, g.end,
                             g.length});
    }
  }

  // Purchase states: never_paid before the first purchase, then
  // paying_active except inside qualifying purchase-churn gaps.
  std::optional<Date> first_purchase;
  for (const auto& r : timeline.records) {
    if (r.purchases > 0) {
      first_purchase = r.date;
      break;
    }
  }
  if (first_purchase) {
    for (Date d = *first_purchase; d <= st.end; ++d) {
      st.purchase_states[day(d)] = PurchaseState::paying_active;
    }
    const int min_gap = rules.purchase_resurrect_min_gap.value_or(0);
    for (const auto& g : activity_gaps(timeline, GapKind::purchase)) {
      if (g.length <= rules.purchase_window) continue;
      const Date flip = g.start + rules.purchase_window + 1;
      if (!g.resolved) {
        st.episodes.push_back({EpisodeKind::purchase_churn, g.start,
                               std::nullopt, g.length});
        for (Date d = flip; d <= st.end; ++d) {
          st.purchase_states[day(d)] = PurchaseState::purchase_churned;
        }
        continue;
      }
      if (g.length < min_gap) continue;  // stricter variant: disregarded
      st.episodes.push_back({EpisodeKind::purchase_resurrection, g.start,
                             g.end, g.length});
      for (Date d = flip; d < g.end; ++d) {
        st.purchase_states[day(d)] = PurchaseState::purchase_churned;
      }
      if (!st.purchase_resurrected_since) {
        st.purchase_resurrected_since = g.end;
      }
    }
  }

  // Zombies: judged point-in-time (a gap later annulled still suspends
  // zombie eligibility while it looks like churn), so the trigger date only
  // depends on data available on that date.
  for (Date d = st.start; d <= st.end; ++d) {
    if (zombie_at(timeline, rules, d)) {
      st.engagement_states[day(d)] = EngagementState::zombie;
      if (!st.zombie_since) st.zombie_since = d;
    }
  }

  std::sort(st.episodes.begin(), st.episodes.end(),
            [](const Episode& a, const Episode& b) {
              if (a.start != b.start) return a.start < b.start;
              return static_cast<int>(a.kind) < static_cast<int>(b.kind);
            });
  return st;
}

bool login_churned_at(const PlayerTimeline& t, const ProfilingRules& rules,
                      Date as_of) {
  auto last = last_activity_before(t, GapKind::login, as_of);
  if (!last) return false;  // no observed activity yet
  return as_of - *last > rules.login_window;
}

PurchaseState purchase_state_at(const PlayerTimeline& t,
                                const ProfilingRules& rules, Date as_of) {
  auto last = last_activity_before(t, GapKind::purchase, as_of);
  if (!last) return PurchaseState::never_paid;
  return (as_of - *last > rules.purchase_window)
             ? PurchaseState::purchase_churned
             : PurchaseState::paying_active;
}

bool zombie_at(const PlayerTimeline& t, const ProfilingRules& rules,
               Date as_of) {
  if (as_of < t.first_login || as_of > t.last_observed) return false;
  // New players (shorter history than the lookback) are never zombies.
  if (as_of - t.first_login + 1 < rules.zombie_lookback) return false;
  if (login_churned_at(t, rules, as_of)) return false;
  const Date from = as_of - rules.zombie_lookback + 1;  // window includes d
  double playtime = 0.0;
  int levelups = 0, purchases = 0;
  for (const auto& r : t.records) {
    if (r.date > as_of) break;
    if (r.date < from) continue;
    playtime += r.playtime_s;
    levelups += r.levelups;
    purchases += r.purchases;
  }
  return playtime < rules.zombie_max_playtime_s &&
         levelups <= rules.zombie_max_levelups &&
         purchases <= rules.zombie_max_purchases;
}

SegmentReport segment_cohort(const Cohort& cohort, const ProfilingRules& rules,
                             Date as_of) {
  if (as_of < cohort.period_start || as_of > cohort.period_end) {
    throw DomainError("as_of outside cohort period");
  }
  SegmentReport rep;
  for (const auto& t : cohort.timelines) {
    if (t.first_login > as_of) continue;
    ++rep.players;
    StateTimeline st = label_states(t, rules);
    const bool churned = login_churned_at(t, rules, as_of);
    const bool p_churned =
        purchase_state_at(t, rules, as_of) == PurchaseState::purchase_churned;
    const bool z = st.ever_zombie_asof(as_of);
    const bool r = st.ever_resurrected_asof(as_of);
    const bool pr = st.ever_purchase_resurrected_asof(as_of);
    rep.currently_churned += churned;
    rep.currently_purchase_churned += p_churned;
    rep.currently_zombie += zombie_at(t, rules, as_of);
    rep.ever_zombie += z;
    rep.ever_resurrected += r;
    rep.ever_purchase_resurrected += pr;
    rep.normal += (!churned && !z && !r && !pr);
  }
  return rep;
}

}  // namespace churnforge
