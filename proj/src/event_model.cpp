#include "churnforge/event_model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "churnforge/errors.hpp"
#include "churnforge/io.hpp"
#include "json.hpp"

namespace churnforge {

namespace {

struct RawRow {
  std::string player_id;
  Date date;
  PlayerDayRecord rec;
};

double parse_nonneg_double(const std::string& s, const char* field) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size() || !(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("bad ") + field + ": " + s);
  }
  return v;
}

int parse_nonneg_int(const std::string& s, const char* field) {
  std::size_t pos = 0;
  long v = std::stol(s, &pos);
  if (pos != s.size() || v < 0) {
    throw std::invalid_argument(std::string("bad ") + field + ": " + s);
  }
  return static_cast<int>(v);
}

void check_row_invariants(const PlayerDayRecord& r) {
  if (r.playtime_s > 86400.0) {
    throw std::invalid_argument("playtime exceeds 86400 seconds");
  }
  if (r.spend_cents > 0 && r.purchases == 0) {
    throw std::invalid_argument("spend > 0 with zero purchases");
  }
}

}  // namespace

const PlayerDayRecord* PlayerTimeline::record_on(Date d) const {
  auto it = std::lower_bound(
      records.begin(), records.end(), d,
      [](const PlayerDayRecord& r, Date x) { return r.date < x; });
  if (it != records.end() && it->date == d) return &*it;
  return nullptr;
}

int PlayerTimeline::level_at(Date d) const {
  int level = 0;
  for (const auto& r : records) {
    if (r.date > d) break;
    level = r.level;
  }
  return level;
}

double PlayerTimeline::playtime_at(Date d) const {
  double total = 0.0;
  for (const auto& r : records) {
    if (r.date > d) break;
    total += r.playtime_s;
  }
  return total;
}

std::int64_t PlayerTimeline::spend_at(Date d) const {
  std::int64_t total = 0;
  for (const auto& r : records) {
    if (r.date > d) break;
    total += r.spend_cents;
  }
  return total;
}

bool PlayerTimeline::has_purchase_by(Date d) const {
  for (const auto& r : records) {
    if (r.date > d) break;
    if (r.purchases > 0) return true;
  }
  return false;
}

const PlayerTimeline* Cohort::find(const std::string& player_id) const {
  auto it = std::lower_bound(
      timelines.begin(), timelines.end(), player_id,
      [](const PlayerTimeline& t, const std::string& id) {
        return t.player_id < id;
      });
  if (it != timelines.end() && it->player_id == player_id) return &*it;
  return nullptr;
}

Cohort ingest_events(const std::string& text, const IngestOptions& opts,
                     IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;

  std::vector<std::string> lines = split_lines(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DomainError("empty input");

  const bool jsonl = !lines[0].empty() && lines[0][0] == '{';

  // Column index per canonical field, CSV mode only.
  std::map<std::string, int> col;
  std::size_t first_data_line = 0;
  if (!jsonl) {
    auto header = split_csv_line(lines[0]);
    const IngestSchema& s = opts.schema;
    const std::pair<std::string, std::string> wanted[] = {
        {"player_id", s.player_id}, {"date", s.date},
        {"playtime_s", s.playtime_s}, {"sessions", s.sessions},
        {"level", s.level},         {"levelups", s.levelups},
        {"purchases", s.purchases}, {"spend", s.spend}};
    for (const auto& [canon, name] : wanted) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) {
        col[canon] = static_cast<int>(it - header.begin());
      }
    }
    if (!col.count("player_id") || !col.count("date")) {
      throw DomainError("header missing player_id/date columns");
    }
    bool any_activity = false;
    for (const char* c : {"playtime_s", "sessions", "level", "levelups",
                          "purchases", "spend"}) {
      any_activity = any_activity || col.count(c);
    }
    if (!any_activity) throw DomainError("no activity columns in header");
    first_data_line = 1;
  }

  auto reject = [&](std::size_t line_no, const std::string& why) {
    ++rep.rows_rejected;
    rep.row_errors.push_back("line " + std::to_string(line_no + 1) + ": " +
                             why);
    if (static_cast<int>(rep.rows_rejected) > opts.error_budget) {
      throw DomainError("error budget exceeded; first errors: " +
                        rep.row_errors.front());
    }
  };

  std::map<std::string, std::map<Date, PlayerDayRecord>> by_player;
  for (std::size_t i = first_data_line; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    ++rep.rows_read;
    RawRow row;
    try {
      if (jsonl) {
        auto j = nlohmann::json::parse(line);
        row.player_id = j.at(opts.schema.player_id).get<std::string>();
        row.date = parse_date(j.at(opts.schema.date).get<std::string>());
        auto num = [&](const std::string& key) -> std::string {
          if (!j.contains(key)) return "0";
          const auto& v = j.at(key);
          if (v.is_string()) return v.get<std::string>();
          std::ostringstream ss;
          ss << v;
          return ss.str();
        };
        row.rec.playtime_s = parse_nonneg_double(num(opts.schema.playtime_s),
                                                 "playtime_s");
        row.rec.sessions = parse_nonneg_int(num(opts.schema.sessions),
                                            "sessions");
        row.rec.level = parse_nonneg_int(num(opts.schema.level), "level");
        row.rec.levelups = parse_nonneg_int(num(opts.schema.levelups),
                                            "levelups");
        row.rec.purchases = parse_nonneg_int(num(opts.schema.purchases),
                                             "purchases");
        row.rec.spend_cents = parse_cents(num(opts.schema.spend));
      } else {
        auto fields = split_csv_line(line);
        auto get = [&](const char* canon) -> std::string {
          auto it = col.find(canon);
          if (it == col.end()) return "0";
          if (it->second >= static_cast<int>(fields.size())) {
            throw std::invalid_argument("short row");
          }
          return fields[static_cast<std::size_t>(it->second)];
        };
        row.player_id = get("player_id");
        row.date = parse_date(get("date"));
        row.rec.playtime_s = parse_nonneg_double(get("playtime_s"),
                                                 "playtime_s");
        row.rec.sessions = parse_nonneg_int(get("sessions"), "sessions");
        row.rec.level = parse_nonneg_int(get("level"), "level");
        row.rec.levelups = parse_nonneg_int(get("levelups"), "levelups");
        row.rec.purchases = parse_nonneg_int(get("purchases"), "purchases");
        row.rec.spend_cents = parse_cents(get("spend"));
      }
      if (row.player_id.empty()) {
        throw std::invalid_argument("empty player_id");
      }
      check_row_invariants(row.rec);
    } catch (const std::exception& e) {
      reject(i, e.what());
      continue;
    }
    row.rec.date = row.date;
    auto& slot = by_player[row.player_id][row.date];
    if (slot.date == 0 && slot.sessions == 0 && slot.playtime_s == 0 &&
        slot.level == 0 && slot.levelups == 0 && slot.purchases == 0 &&
        slot.spend_cents == 0) {
      slot = row.rec;
    } else {
      slot.playtime_s += row.rec.playtime_s;
      slot.sessions += row.rec.sessions;
      slot.levelups += row.rec.levelups;
      slot.purchases += row.rec.purchases;
      slot.spend_cents += row.rec.spend_cents;
      slot.level = std::max(slot.level, row.rec.level);
      if (slot.playtime_s > 86400.0) {
        throw DomainError("player " + row.player_id + " on " +
                          format_date(row.date) +
                          ": merged playtime exceeds one day");
      }
    }
  }

  if (by_player.empty()) throw DomainError("empty input (no valid rows)");

  Date min_date = 0, max_date = 0;
  bool first = true;
  for (const auto& [id, days] : by_player) {
    for (const auto& [d, rec] : days) {
      if (first || d < min_date) min_date = d;
      if (first || d > max_date) max_date = d;
      first = false;
    }
  }
  Cohort cohort;
  cohort.period_start = opts.period_start.value_or(min_date);
  cohort.period_end = opts.period_end.value_or(max_date);
  if (cohort.period_start > min_date || cohort.period_end < max_date) {
    throw DomainError("records outside the configured cohort period");
  }

  for (auto& [id, days] : by_player) {
    PlayerTimeline t;
    t.player_id = id;
    t.first_login = days.begin()->first;
    t.last_observed = cohort.period_end;
    int prev_level = -1;
    Date prev_date = 0;
    std::vector<std::string> level_errors;
    for (auto& [d, rec] : days) {
      if (prev_level >= 0) {
        if (rec.level < prev_level) {
          level_errors.push_back("non-monotone level on " + format_date(d));
        } else if (rec.levelups != rec.level - prev_level) {
          level_errors.push_back("levelups mismatch on " + format_date(d) +
                                 " (level " + std::to_string(prev_level) +
                                 " -> " + std::to_string(rec.level) + ", " +
                                 std::to_string(rec.levelups) + " levelups)");
        }
      }
      prev_level = rec.level;
      prev_date = d;
      t.records.push_back(rec);
    }
    (void)prev_date;
    if (!level_errors.empty()) {
      std::string msg = "player " + id + ": ";
      for (std::size_t k = 0; k < level_errors.size(); ++k) {
        if (k) msg += "; ";
        msg += level_errors[k];
      }
      throw DomainError(msg);
    }
    cohort.timelines.push_back(std::move(t));
  }
  // std::map iteration already yields sorted player ids.
  return cohort;
}

Cohort ingest_events_file(const std::string& path, const IngestOptions& opts,
                          IngestReport* report) {
  return ingest_events(read_file(path), opts, report);
}

std::vector<ActivityGap> activity_gaps(const PlayerTimeline& timeline,
                                       GapKind kind) {
  std::vector<Date> active;
  for (const auto& r : timeline.records) {
    const bool qualifies = (kind == GapKind::login) ? r.login_activity()
                                                    : r.purchase_activity();
    if (qualifies) active.push_back(r.date);
  }
  std::vector<ActivityGap> gaps;
  if (active.empty()) return gaps;
  for (std::size_t i = 1; i < active.size(); ++i) {
    int len = active[i] - active[i - 1] - 1;
    if (len > 0) {
      gaps.push_back({active[i - 1], len, true, active[i]});
    }
  }
  int trailing = timeline.last_observed - active.back();
  if (trailing > 0) {
    gaps.push_back({active.back(), trailing, false, timeline.last_observed});
  }
  return gaps;
}

VipSelection select_vip(const Cohort& cohort, double revenue_share_target,
                        Date window_start, Date window_end) {
  if (!(revenue_share_target > 0.0 && revenue_share_target < 1.0)) {
    throw DomainError("revenue share target must be in (0, 1)");
  }
  struct Spend {
    std::int64_t cents;
    const std::string* id;
  };
  std::vector<Spend> spends;
  std::int64_t total = 0;
  for (const auto& t : cohort.timelines) {
    std::int64_t s = 0;
    for (const auto& r : t.records) {
      if (r.date >= window_start && r.date <= window_end) s += r.spend_cents;
    }
    total += s;
    spends.push_back({s, &t.player_id});
  }
  if (total == 0) throw DomainError("no revenue in window");

  std::sort(spends.begin(), spends.end(), [](const Spend& a, const Spend& b) {
    if (a.cents != b.cents) return a.cents > b.cents;
    return *a.id < *b.id;
  });

  const double target_cents = revenue_share_target * static_cast<double>(total);
  std::int64_t cum = 0;
  std::int64_t threshold = 0;
  for (const auto& s : spends) {
    cum += s.cents;
    threshold = s.cents;
    if (static_cast<double>(cum) >= target_cents) break;
  }

  VipSelection sel;
  sel.threshold_cents = threshold;
  std::int64_t vip_total = 0;
  for (const auto& s : spends) {
    if (s.cents >= threshold && s.cents > 0) {
      sel.vip_ids.insert(*s.id);
      vip_total += s.cents;
    }
  }
  sel.realized_share = static_cast<double>(vip_total) /
                       static_cast<double>(total);
  return sel;
}

Cohort restrict_cohort(const Cohort& cohort, Date start, Date end) {
  Cohort out;
  out.period_start = start;
  out.period_end = end;
  for (const auto& t : cohort.timelines) {
    PlayerTimeline r;
    r.player_id = t.player_id;
    for (const auto& rec : t.records) {
      if (rec.date >= start && rec.date <= end) r.records.push_back(rec);
    }
    if (r.records.empty()) continue;
    r.first_login = r.records.front().date;
    r.last_observed = end;
    out.timelines.push_back(std::move(r));
  }
  return out;
}

void save_cohort(const Cohort& cohort, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::size_t n_records = 0;
  for (const auto& t : cohort.timelines) n_records += t.records.size();
  nlohmann::json manifest = {
      {"schema_version", 1},
      {"period",
       {{"start", format_date(cohort.period_start)},
        {"end", format_date(cohort.period_end)}}},
      {"n_players", cohort.timelines.size()},
      {"n_records", n_records},
  };
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");

  std::ostringstream csv;
  csv << "player_id,date,playtime_s,sessions,level,levelups,purchases,spend\n";
  for (const auto& t : cohort.timelines) {
    for (const auto& r : t.records) {
      char num[32];
      std::snprintf(num, sizeof(num), "%.10g", r.playtime_s);
      csv << t.player_id << ',' << format_date(r.date) << ',' << num << ','
          << r.sessions << ',' << r.level << ',' << r.levelups << ','
          << r.purchases << ',' << format_cents(r.spend_cents) << '\n';
    }
  }
  write_file(dir + "/players.csv", csv.str());
}

Cohort load_cohort(const std::string& dir) {
  auto manifest = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  IngestOptions opts;
  opts.period_start = parse_date(manifest.at("period").at("start"));
  opts.period_end = parse_date(manifest.at("period").at("end"));
  return ingest_events_file(dir + "/players.csv", opts);
}

}  // namespace churnforge
