#include "churnforge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "churnforge/calibration.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/io.hpp"
#include "json.hpp"

namespace churnforge {

void SimConfig::validate() const {
  if (n_players < 0) throw DomainError("n_players must be >= 0");
  if (period_end < period_start) throw DomainError("empty simulation period");
  if (!planted) {
    if (archetypes.empty()) throw DomainError("no archetypes configured");
    double total = 0.0;
    for (const auto& a : archetypes) {
      if (a.weight < 0) throw DomainError("negative archetype weight");
      total += a.weight;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw DomainError("archetype weights must sum to 1");
    }
  }
  if (arrival != "uniform" && arrival != "front_loaded") {
    throw DomainError("arrival must be uniform or front_loaded");
  }
}

namespace {

struct DayRow {
  Date date;
  int playtime_s = 0;
  int sessions = 0;
  int level = 1;
  int levelups = 0;
  int purchases = 0;
  std::int64_t spend_cents = 0;
};

std::string player_name(int idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%05d", idx);
  return buf;
}

double hazard_at(const std::vector<HazardPiece>& pieces, int tenure) {
  for (const auto& p : pieces) {
    if (p.until_day > 0 && tenure < p.until_day) return p.hazard;
  }
  return pieces.empty() ? 0.0 : pieces.back().hazard;
}

void emit_rows(std::ostringstream& csv, const std::string& id,
               const std::vector<DayRow>& rows) {
  for (const auto& r : rows) {
    csv << id << ',' << format_date(r.date) << ',' << r.playtime_s << ','
        << r.sessions << ',' << r.level << ',' << r.levelups << ','
        << r.purchases << ',' << format_cents(r.spend_cents) << '\n';
  }
}

// Stochastic archetype-driven trace for one player.
PlayerTruth simulate_player(const SimConfig& cfg, std::uint64_t seed, int idx,
                            std::vector<DayRow>& rows) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(idx)));

  // Archetype pick.
  double u = rng.uniform();
  std::size_t which = cfg.archetypes.size() - 1;
  double acc = 0.0;
  for (std::size_t a = 0; a < cfg.archetypes.size(); ++a) {
    acc += cfg.archetypes[a].weight;
    if (u < acc) {
      which = a;
      break;
    }
  }
  const ArchetypeParams& ap = cfg.archetypes[which];

  const int span = cfg.period_end - cfg.period_start + 1;
  double au = rng.uniform();
  int offset = (cfg.arrival == "uniform")
                   ? static_cast<int>(au * span)
                   : static_cast<int>(au * au * 0.7 * span);
  offset = std::min(offset, span - 1);
  const Date arrival = cfg.period_start + offset;

  PlayerTruth truth;
  truth.player_id = player_name(idx);
  truth.archetype = ap.name;

  enum class State { active, zombie, churned };
  State state = State::active;
  Date zombie_end = 0;
  Date return_day = -1;
  Date last_active = arrival;
  Date purchase_pause_until = arrival - 1;
  int level = 1;

  for (Date day = arrival; day <= cfg.period_end; ++day) {
    if (state == State::churned) {
      if (return_day >= 0 && day == return_day) {
        state = State::active;
      } else {
        continue;
      }
    }
    if (state == State::zombie && day >= zombie_end) state = State::active;

    const bool forced_login = (day == arrival) || (day == return_day);

    if (state == State::active && !forced_login) {
      // Churn draw happens before any activity today: the gap starts right
      // after the last active day.
      const double hz = hazard_at(ap.churn_hazard, day - arrival);
      if (hz > 0 && rng.bernoulli(hz)) {
        truth.churn_dates.push_back(last_active);
        state = State::churned;
        return_day = -1;
        if (rng.bernoulli(ap.resurrect_prob)) {
          const double extra_mean =
              std::max(1.0, ap.resurrect_gap_mean - ap.resurrect_gap_min);
          const int gap =
              ap.resurrect_gap_min + rng.geometric(1.0 / extra_mean);
          const Date ret = last_active + gap + 1;
          if (ret <= cfg.period_end) {
            return_day = ret;
            truth.resurrection_gaps.push_back({last_active, gap});
          }
        }
        continue;
      }
      if (ap.zombie_entry_prob > 0 && rng.bernoulli(ap.zombie_entry_prob)) {
        state = State::zombie;
        const int dur = 1 + rng.geometric(1.0 / ap.zombie_duration_mean);
        zombie_end = day + dur;
        truth.zombie_phases.push_back(
            {day, std::min<Date>(zombie_end, cfg.period_end)});
      }
    }

    const double login_p =
        state == State::zombie ? ap.zombie_login_prob : ap.login_prob;
    if (!forced_login && !rng.bernoulli(login_p)) continue;

    DayRow row;
    row.date = day;
    row.sessions = 1;
    if (state == State::zombie) {
      row.playtime_s = 60 + static_cast<int>(rng.uniform() * 240.0);
    } else {
      // A resurrection return is a binge day: catching up yields a long
      // session and at least one level-up from accumulated progress.
      const bool comeback = (day == return_day) && (day != arrival);
      double pt = rng.lognormal(ap.playtime_mu + (comeback ? 1.0 : 0.0),
                                ap.playtime_sigma);
      row.playtime_s =
          static_cast<int>(std::clamp(pt, 60.0, 86400.0));
      row.sessions += rng.poisson(ap.extra_sessions);
      row.levelups = (comeback ? 1 : 0) + rng.poisson(ap.levelup_rate);
      level += row.levelups;
      // Purchase pauses are one-shot early-tenure lapses: a player who is
      // going to lapse does so in the first 90 days and then resumes for
      // good, so the lapse is an artifact of their ramp-up, not a trend.
      if (ap.purchase_pause_prob > 0 && purchase_pause_until < arrival &&
          day - arrival < 90 && rng.bernoulli(ap.purchase_pause_prob)) {
        purchase_pause_until =
            day + 1 + rng.geometric(1.0 / ap.purchase_pause_mean);
      }
      if (day > purchase_pause_until && rng.bernoulli(ap.purchase_prob)) {
        row.purchases = 1;
        double spend = rng.pareto(ap.spend_scale, ap.spend_alpha);
        row.spend_cents =
            std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                          std::llround(spend * 100.0)));
      }
    }
    row.level = level;
    rows.push_back(row);
    last_active = day;
  }
  return truth;
}

// Deterministic trace for the planted calibration layout.
PlayerTruth plant_player(const SimConfig& cfg, int idx,
                         std::vector<DayRow>& rows) {
  const PlantedCalibration& pc = *cfg.planted;
  const int n = cfg.n_players;
  const int n_true = static_cast<int>(pc.frac_true_churners * n);
  const int n_false = static_cast<int>(pc.frac_false_churners * n);
  enum class Role { normal, true_churner, false_churner };
  Role role = Role::normal;
  if (idx < n_true) {
    role = Role::true_churner;
  } else if (idx < n_true + n_false) {
    role = Role::false_churner;
  }

  const Date arrival = cfg.period_start + (idx % 7);
  const Date stop = cfg.period_start + 45;  // churners' last qualifying day
  const Date resume = stop + pc.target_window + 1;

  PlayerTruth truth;
  truth.player_id = player_name(idx);
  truth.archetype = role == Role::normal ? "planted_normal"
                    : role == Role::true_churner ? "planted_churner"
                                                 : "planted_false_churner";

  const bool login_kind = pc.kind == GapKind::login;
  for (Date day = arrival; day <= cfg.period_end; ++day) {
    bool active_today = true;   // login activity
    bool purchase_today = false;
    if (login_kind) {
      purchase_today = (day == arrival);  // one purchase so revenue exists
      if (role != Role::normal && day > stop) {
        if (role == Role::true_churner || day < resume) active_today = false;
      }
    } else {
      purchase_today = true;  // daily purchases define the purchase bitmap
      if (role != Role::normal && day > stop) {
        if (role == Role::true_churner || day < resume) purchase_today = false;
      }
    }
    if (!active_today) continue;
    DayRow row;
    row.date = day;
    row.sessions = 1;
    row.playtime_s = 3600;
    row.level = 1;
    if (purchase_today) {
      row.purchases = 1;
      row.spend_cents = login_kind ? 1000 : 100;
    }
    rows.push_back(row);
  }
  if (role == Role::true_churner) {
    truth.churn_dates.push_back(login_kind ? stop : stop);
  }
  return truth;
}

}  // namespace

SimOutput simulate(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  SimOutput out;
  std::ostringstream csv;
  csv << "player_id,date,playtime_s,sessions,level,levelups,purchases,spend\n";
  for (int idx = 0; idx < config.n_players; ++idx) {
    std::vector<DayRow> rows;
    PlayerTruth truth = config.planted
                            ? plant_player(config, idx, rows)
                            : simulate_player(config, seed, idx, rows);
    emit_rows(csv, truth.player_id, rows);
    out.truth.push_back(std::move(truth));
  }
  out.events_csv = csv.str();
  return out;
}

std::string truth_to_json(const std::vector<PlayerTruth>& truth) {
  nlohmann::json players = nlohmann::json::array();
  for (const auto& t : truth) {
    nlohmann::json zombies = nlohmann::json::array();
    for (const auto& z : t.zombie_phases) {
      zombies.push_back({{"start", format_date(z.start)},
                         {"end", format_date(z.end)}});
    }
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : t.resurrection_gaps) {
      gaps.push_back({{"start", format_date(g.start)},
                      {"gap_length", g.gap_length}});
    }
    nlohmann::json churns = nlohmann::json::array();
    for (Date d : t.churn_dates) churns.push_back(format_date(d));
    players.push_back({{"player_id", t.player_id},
                       {"archetype", t.archetype},
                       {"churn_dates", std::move(churns)},
                       {"zombie_phases", std::move(zombies)},
                       {"resurrection_gaps", std::move(gaps)}});
  }
  return nlohmann::json{{"players", std::move(players)}}.dump(1) + "\n";
}

SimConfig default_sim_config() {
  SimConfig cfg;
  cfg.n_players = 1000;
  cfg.period_start = parse_date("2020-01-01");
  cfg.period_end = parse_date("2020-12-31");
  cfg.arrival = "front_loaded";
  cfg.seed = 1;

  ArchetypeParams engaged;
  engaged.name = "engaged";
  engaged.weight = 0.30;
  engaged.login_prob = 0.92;
  engaged.playtime_mu = 8.3;
  engaged.playtime_sigma = 0.5;
  engaged.levelup_rate = 0.4;
  engaged.purchase_prob = 0.15;
  engaged.spend_scale = 5.0;
  engaged.spend_alpha = 1.8;
  engaged.churn_hazard = {{60, 0.003}, {0, 0.001}};
  engaged.resurrect_prob = 0.42;
  engaged.purchase_pause_prob = 0.010;
  engaged.purchase_pause_mean = 75.0;
  engaged.resurrect_gap_min = 30;
  engaged.resurrect_gap_mean = 50.0;

  ArchetypeParams casual;
  casual.name = "casual";
  casual.weight = 0.25;
  casual.login_prob = 0.55;
  casual.playtime_mu = 7.3;
  casual.playtime_sigma = 0.7;
  casual.levelup_rate = 0.15;
  casual.purchase_prob = 0.25;
  casual.spend_scale = 3.0;
  casual.spend_alpha = 1.8;
  casual.churn_hazard = {{30, 0.006}, {90, 0.012}, {0, 0.001}};
  casual.resurrect_prob = 0.45;
  casual.resurrect_gap_min = 30;
  casual.resurrect_gap_mean = 45.0;

  ArchetypeParams zombie_prone;
  zombie_prone.name = "zombie_prone";
  zombie_prone.weight = 0.15;
  zombie_prone.login_prob = 0.75;
  zombie_prone.playtime_mu = 7.8;
  zombie_prone.playtime_sigma = 0.6;
  zombie_prone.levelup_rate = 0.2;
  zombie_prone.purchase_prob = 0.0;
  zombie_prone.spend_scale = 3.0;
  zombie_prone.spend_alpha = 1.8;
  zombie_prone.churn_hazard = {{0, 0.001}};
  zombie_prone.resurrect_prob = 0.18;
  zombie_prone.zombie_entry_prob = 0.012;
  zombie_prone.zombie_duration_mean = 60.0;

  ArchetypeParams resurrect_prone;
  resurrect_prone.name = "resurrect_prone";
  resurrect_prone.weight = 0.20;
  resurrect_prone.login_prob = 0.92;
  resurrect_prone.playtime_mu = 8.3;
  resurrect_prone.playtime_sigma = 0.5;
  resurrect_prone.levelup_rate = 0.4;
  resurrect_prone.purchase_prob = 0.15;
  resurrect_prone.spend_scale = 5.0;
  resurrect_prone.spend_alpha = 1.8;
  resurrect_prone.churn_hazard = {{60, 0.030}, {0, 0.0}};
  resurrect_prone.resurrect_prob = 0.85;
  resurrect_prone.resurrect_gap_min = 30;
  resurrect_prone.resurrect_gap_mean = 40.0;

  ArchetypeParams whale;
  whale.name = "whale";
  whale.weight = 0.10;
  whale.login_prob = 0.95;
  whale.playtime_mu = 8.6;
  whale.playtime_sigma = 0.5;
  whale.levelup_rate = 0.5;
  whale.purchase_prob = 0.35;
  whale.spend_scale = 20.0;
  whale.spend_alpha = 1.2;
  whale.churn_hazard = {{90, 0.002}, {0, 0.0006}};
  whale.resurrect_prob = 0.30;
  whale.purchase_pause_prob = 0.010;
  whale.purchase_pause_mean = 80.0;

  cfg.archetypes = {engaged, casual, zombie_prone, resurrect_prone, whale};
  return cfg;
}

namespace {

nlohmann::json archetype_to_json(const ArchetypeParams& a) {
  nlohmann::json hz = nlohmann::json::array();
  for (const auto& p : a.churn_hazard) {
    hz.push_back({{"until_day", p.until_day}, {"hazard", p.hazard}});
  }
  return {{"name", a.name},
          {"weight", a.weight},
          {"login_prob", a.login_prob},
          {"playtime_mu", a.playtime_mu},
          {"playtime_sigma", a.playtime_sigma},
          {"extra_sessions", a.extra_sessions},
          {"levelup_rate", a.levelup_rate},
          {"purchase_prob", a.purchase_prob},
          {"spend_scale", a.spend_scale},
          {"spend_alpha", a.spend_alpha},
          {"churn_hazard", std::move(hz)},
          {"resurrect_prob", a.resurrect_prob},
          {"resurrect_gap_min", a.resurrect_gap_min},
          {"resurrect_gap_mean", a.resurrect_gap_mean},
          {"zombie_entry_prob", a.zombie_entry_prob},
          {"zombie_duration_mean", a.zombie_duration_mean},
          {"zombie_login_prob", a.zombie_login_prob},
          {"purchase_pause_prob", a.purchase_pause_prob},
          {"purchase_pause_mean", a.purchase_pause_mean}};
}

ArchetypeParams archetype_from_json(const nlohmann::json& j) {
  ArchetypeParams a;
  a.name = j.at("name");
  a.weight = j.at("weight");
  a.login_prob = j.value("login_prob", a.login_prob);
  a.playtime_mu = j.value("playtime_mu", a.playtime_mu);
  a.playtime_sigma = j.value("playtime_sigma", a.playtime_sigma);
  a.extra_sessions = j.value("extra_sessions", a.extra_sessions);
  a.levelup_rate = j.value("levelup_rate", a.levelup_rate);
  a.purchase_prob = j.value("purchase_prob", a.purchase_prob);
  a.spend_scale = j.value("spend_scale", a.spend_scale);
  a.spend_alpha = j.value("spend_alpha", a.spend_alpha);
  if (j.contains("churn_hazard")) {
    a.churn_hazard.clear();
    for (const auto& p : j.at("churn_hazard")) {
      a.churn_hazard.push_back({p.at("until_day"), p.at("hazard")});
    }
  }
  a.resurrect_prob = j.value("resurrect_prob", a.resurrect_prob);
  a.resurrect_gap_min = j.value("resurrect_gap_min", a.resurrect_gap_min);
  a.resurrect_gap_mean = j.value("resurrect_gap_mean", a.resurrect_gap_mean);
  a.zombie_entry_prob = j.value("zombie_entry_prob", a.zombie_entry_prob);
  a.zombie_duration_mean =
      j.value("zombie_duration_mean", a.zombie_duration_mean);
  a.zombie_login_prob = j.value("zombie_login_prob", a.zombie_login_prob);
  a.purchase_pause_prob =
      j.value("purchase_pause_prob", a.purchase_pause_prob);
  a.purchase_pause_mean =
      j.value("purchase_pause_mean", a.purchase_pause_mean);
  return a;
}

}  // namespace

std::string sim_config_to_json(const SimConfig& config) {
  nlohmann::json j = {
      {"n_players", config.n_players},
      {"period",
       {{"start", format_date(config.period_start)},
        {"end", format_date(config.period_end)}}},
      {"arrival", config.arrival},
      {"seed", config.seed},
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : config.archetypes) arr.push_back(archetype_to_json(a));
  j["archetypes"] = std::move(arr);
  if (config.planted) {
    j["planted_calibration"] = {
        {"target_window", config.planted->target_window},
        {"kind", config.planted->kind == GapKind::login ? "login" : "purchase"},
        {"frac_true_churners", config.planted->frac_true_churners},
        {"frac_false_churners", config.planted->frac_false_churners}};
  }
  return j.dump(2) + "\n";
}

SimConfig sim_config_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  SimConfig cfg;
  cfg.n_players = j.at("n_players");
  cfg.period_start = parse_date(j.at("period").at("start"));
  cfg.period_end = parse_date(j.at("period").at("end"));
  cfg.arrival = j.value("arrival", cfg.arrival);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("archetypes")) {
    for (const auto& aj : j.at("archetypes")) {
      cfg.archetypes.push_back(archetype_from_json(aj));
    }
  }
  if (j.contains("planted_calibration")) {
    const auto& pj = j.at("planted_calibration");
    PlantedCalibration pc;
    pc.target_window = pj.at("target_window");
    pc.kind = pj.value("kind", "login") == std::string("purchase")
                  ? GapKind::purchase
                  : GapKind::login;
    pc.frac_true_churners = pj.value("frac_true_churners", 0.3);
    pc.frac_false_churners = pj.value("frac_false_churners", 0.3);
    cfg.planted = pc;
  }
  cfg.validate();
  return cfg;
}

SimConfig plant_calibration_case(int target_window, GapKind kind,
                                 int n_players) {
  if (target_window < 3 || target_window > 90) {
    throw DomainError("target window must be in 3..90");
  }
  SimConfig cfg;
  cfg.n_players = n_players;
  cfg.period_start = parse_date("2020-01-01");
  cfg.period_end = cfg.period_start + 199;
  cfg.seed = 7;
  PlantedCalibration pc;
  pc.target_window = target_window;
  pc.kind = kind;
  cfg.planted = pc;

  // Verify the construction against the calibration scan before handing the
  // config out.
  SimOutput out = simulate(cfg, cfg.seed);
  Cohort cohort = ingest_events(out.events_csv);
  CalibrationOutcome res =
      calibrate_window(cohort, default_grid(), 0.05, 0.01, kind);
  if (res.window != target_window) {
    throw DomainError("planted calibration case infeasible: scan chose " +
                      std::to_string(res.window));
  }
  return cfg;
}

}  // namespace churnforge
