#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "churnforge/event_model.hpp"

namespace churnforge {

enum class LoginState : std::uint8_t { active, churned };
enum class EngagementState : std::uint8_t { normal, zombie };
enum class PurchaseState : std::uint8_t {
  never_paid,
  paying_active,
  purchase_churned
};

enum class EpisodeKind : std::uint8_t {
  churn,                 // open login-churn gap
  genuine_false_churn,   // resolved gap shorter than the resurrection bar
  resurrection,          // resolved gap at or above the resurrection bar
  purchase_churn,        // open purchase gap
  purchase_resurrection  // resolved purchase gap
};

const char* episode_kind_name(EpisodeKind k);

struct Episode {
  EpisodeKind kind;
  Date start = 0;                // last qualifying activity before the gap
  std::optional<Date> end;       // return date; empty while open
  int gap_length = 0;            // whole inactive days
};

struct ProfilingRules {
  int login_window = 9;
  int purchase_window = 50;
  int resurrect_min_gap = 30;
  // Purchase resurrection is unconditional by default (every resolved
  // purchase gap qualifies); raise this for the stricter variant.
  std::optional<int> purchase_resurrect_min_gap;
  int zombie_lookback = 30;
  double zombie_max_playtime_s = 10800.0;  // < 3 hours
  int zombie_max_levelups = 0;
  int zombie_max_purchases = 0;

  void validate() const;
};

struct StateTimeline {
  std::string player_id;
  Date start = 0;  // first_login
  Date end = 0;    // last_observed
  std::vector<LoginState> login_states;          // one per day in [start,end]
  std::vector<EngagementState> engagement_states;
  std::vector<PurchaseState> purchase_states;
  std::optional<Date> zombie_since;
  std::optional<Date> resurrected_since;
  std::optional<Date> purchase_resurrected_since;
  std::vector<Episode> episodes;

  LoginState login_state(Date d) const { return login_states[idx(d)]; }
  EngagementState engagement_state(Date d) const {
    return engagement_states[idx(d)];
  }
  PurchaseState purchase_state(Date d) const { return purchase_states[idx(d)]; }

  bool ever_zombie_asof(Date d) const {
    return zombie_since && *zombie_since <= d;
  }
  bool ever_resurrected_asof(Date d) const {
    return resurrected_since && *resurrected_since <= d;
  }
  bool ever_purchase_resurrected_asof(Date d) const {
    return purchase_resurrected_since && *purchase_resurrected_since <= d;
  }

 private:
  std::size_t idx(Date d) const { return static_cast<std::size_t>(d - start); }
};

// Full retrospective labeling of one player: gap episodes, genuine-false
// annulment, resurrection labels, zombie flags. Pure function of its inputs.
StateTimeline label_states(const PlayerTimeline& timeline,
                           const ProfilingRules& rules);

// Point-in-time queries using only records dated <= as_of (leakage-free;
// unresolved gaps count as churn regardless of later annulment).
bool login_churned_at(const PlayerTimeline& t, const ProfilingRules& rules,
                      Date as_of);
PurchaseState purchase_state_at(const PlayerTimeline& t,
                                const ProfilingRules& rules, Date as_of);
bool zombie_at(const PlayerTimeline& t, const ProfilingRules& rules,
               Date as_of);

struct SegmentReport {
  long players = 0;
  long currently_churned = 0;
  long currently_purchase_churned = 0;
  long currently_zombie = 0;
  long ever_zombie = 0;
  long ever_resurrected = 0;
  long ever_purchase_resurrected = 0;
  long normal = 0;  // no ever-labels and not currently churned

  double frac(long n) const {
    return players ? static_cast<double>(n) / static_cast<double>(players)
                   : 0.0;
  }
};

SegmentReport segment_cohort(const Cohort& cohort, const ProfilingRules& rules,
                             Date as_of);

}  // namespace churnforge
