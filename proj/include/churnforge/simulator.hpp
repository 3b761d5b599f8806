#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "churnforge/event_model.hpp"
#include "churnforge/rng.hpp"

namespace churnforge {

struct HazardPiece {
  int until_day = 0;  // tenure upper bound (exclusive); last piece unbounded
  double hazard = 0.0;
};

struct ArchetypeParams {
  std::string name;
  double weight = 0.0;
  double login_prob = 0.9;
  double playtime_mu = 8.0;      // lognormal of seconds
  double playtime_sigma = 0.6;
  double extra_sessions = 0.5;   // sessions = 1 + poisson(extra)
  double levelup_rate = 0.3;     // poisson per active day
  double purchase_prob = 0.05;   // per active day
  double spend_scale = 3.0;      // pareto minimum, currency units
  double spend_alpha = 1.6;      // pareto tail index
  std::vector<HazardPiece> churn_hazard = {{30, 0.002}, {0, 0.004}};
  double resurrect_prob = 0.3;       // chance a churn gap ever resolves
  int resurrect_gap_min = 30;        // inactive days before return
  double resurrect_gap_mean = 45.0;
  double zombie_entry_prob = 0.0;    // per active day
  double zombie_duration_mean = 45.0;
  double zombie_login_prob = 0.35;
  double purchase_pause_prob = 0.0;  // per day: stop purchasing for a while
  double purchase_pause_mean = 80.0;
};

// Deterministic trace layout used by plant_calibration_case: a share of
// players with one resolved gap of exactly target_window days, a share with
// long open gaps, the rest continuously active.
struct PlantedCalibration {
  int target_window = 9;
  GapKind kind = GapKind::login;
  double frac_true_churners = 0.3;
  double frac_false_churners = 0.3;
};

struct SimConfig {
  int n_players = 1000;
  Date period_start = 0;
  Date period_end = 0;
  std::string arrival = "front_loaded";  // or "uniform"
  std::vector<ArchetypeParams> archetypes;
  std::optional<PlantedCalibration> planted;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ZombiePhase {
  Date start;
  Date end;
};

struct ResurrectionGap {
  Date start;  // last active day before the gap
  int gap_length;
};

struct PlayerTruth {
  std::string player_id;
  std::string archetype;
  std::vector<Date> churn_dates;  // last active day of each planted churn
  std::vector<ZombiePhase> zombie_phases;
  std::vector<ResurrectionGap> resurrection_gaps;
};

struct SimOutput {
  std::string events_csv;  // ingest-ready
  std::vector<PlayerTruth> truth;
};

// Deterministic given (config, seed): per-player derived RNG streams, output
// canonicalized by (player_id, date).
SimOutput simulate(const SimConfig& config, std::uint64_t seed);

std::string truth_to_json(const std::vector<PlayerTruth>& truth);

SimConfig default_sim_config();
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& config);

// Config whose generated cohort makes calibrate_window select exactly
// target_window under the default 5%/1% thresholds; verified by running the
// calibration scan on the generated cohort before returning.
SimConfig plant_calibration_case(int target_window,
                                 GapKind kind = GapKind::login,
                                 int n_players = 300);

}  // namespace churnforge
