#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "churnforge/dates.hpp"

namespace churnforge {

struct PlayerDayRecord {
  Date date = 0;
  double playtime_s = 0.0;  // <= 86400
  int sessions = 0;
  int level = 0;  // level reached at end of day
  int levelups = 0;
  int purchases = 0;
  std::int64_t spend_cents = 0;

  bool login_activity() const {
    return playtime_s > 0 || sessions > 0 || purchases > 0;
  }
  bool purchase_activity() const { return purchases > 0; }
};

struct PlayerTimeline {
  std::string player_id;
  Date first_login = 0;
  Date last_observed = 0;
  std::vector<PlayerDayRecord> records;  // strictly increasing dates

  // Record for a given date, if any.
  const PlayerDayRecord* record_on(Date d) const;
  // Level reached by end of date d (0 before the first record).
  int level_at(Date d) const;
  // Cumulative playtime seconds over records dated <= d.
  double playtime_at(Date d) const;
  std::int64_t spend_at(Date d) const;
  bool has_purchase_by(Date d) const;
};

struct Cohort {
  std::vector<PlayerTimeline> timelines;  // sorted by player_id
  Date period_start = 0;
  Date period_end = 0;

  const PlayerTimeline* find(const std::string& player_id) const;
};

// Column mapping from input header names to the canonical schema. Empty
// target means "use the canonical name itself".
struct IngestSchema {
  std::string player_id = "player_id";
  std::string date = "date";
  std::string playtime_s = "playtime_s";
  std::string sessions = "sessions";
  std::string level = "level";
  std::string levelups = "levelups";
  std::string purchases = "purchases";
  std::string spend = "spend";
};

struct IngestOptions {
  IngestSchema schema;
  int error_budget = 0;  // malformed rows tolerated before aborting
  std::optional<Date> period_start;
  std::optional<Date> period_end;
};

struct IngestReport {
  std::vector<std::string> row_errors;  // "line N: ..." diagnostics
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
};

// Parses CSV (with header) or JSON-lines into a Cohort. Duplicate
// (player, date) rows merge: additive fields summed, level max-merged.
Cohort ingest_events(const std::string& text, const IngestOptions& opts = {},
                     IngestReport* report = nullptr);

Cohort ingest_events_file(const std::string& path,
                          const IngestOptions& opts = {},
                          IngestReport* report = nullptr);

enum class GapKind { login, purchase };

struct ActivityGap {
  Date start = 0;      // last qualifying-activity day before the gap
  int length = 0;      // whole days with no qualifying activity
  bool resolved = false;
  Date end = 0;        // return day when resolved, last_observed when open
};

// Inactivity gaps between consecutive qualifying-activity days; a trailing
// gap up to last_observed is emitted as open. Zero-length gaps are omitted.
std::vector<ActivityGap> activity_gaps(const PlayerTimeline& timeline,
                                       GapKind kind);

struct VipSelection {
  std::int64_t threshold_cents = 0;
  std::set<std::string> vip_ids;
  double realized_share = 0.0;
};

// Ranks players by spend inside [window_start, window_end] and returns the
// smallest top-spender prefix reaching the revenue share target; ties at the
// threshold are included.
VipSelection select_vip(const Cohort& cohort, double revenue_share_target,
                        Date window_start, Date window_end);

// Restricts every timeline to records within [start, end]; players with no
// record in range are dropped. first_login is preserved when it precedes the
// range only if the player has records in range starting at the range; the
// restricted timeline's first_login is its first in-range record date.
Cohort restrict_cohort(const Cohort& cohort, Date start, Date end);

// Directory serialization: manifest.json + players.csv.
void save_cohort(const Cohort& cohort, const std::string& dir);
Cohort load_cohort(const std::string& dir);

}  // namespace churnforge
