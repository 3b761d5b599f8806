#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "churnforge/evaluation.hpp"
#include "churnforge/model.hpp"
#include "churnforge/profiling.hpp"

namespace churnforge {

// Segment labels usable in exclusion combos.
enum class Segment { zombie, resurrected, p_resurrected };
const char* segment_name(Segment s);
Segment parse_segment(const std::string& s);
std::string combo_name(const std::vector<Segment>& combo);

// The eight rows of the default exclusion design.
std::vector<std::vector<Segment>> default_combos();

struct ExperimentSpec {
  Date split_date = 0;
  Date validation_end = 0;
  std::vector<std::vector<Segment>> exclusion_combos = default_combos();
  bool run_binary = true;
  bool run_survival = true;
  std::vector<GapKind> kinds = {GapKind::login, GapKind::purchase};
  std::vector<SurvivalAxis> axes = {SurvivalAxis::lifetime_days,
                                    SurvivalAxis::level,
                                    SurvivalAxis::playtime_hours};
  ProfilingRules rules;
  ForestParams forest;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate(const Cohort& cohort) const;
};

std::string experiment_spec_to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const std::string& text);

struct CellResult {
  std::optional<double> value;  // AUC or IBS; empty on per-cell error
  std::string error;
  std::uint64_t seed = 0;
  std::size_t training_rows = 0;
};

struct ResultsRow {
  std::vector<Segment> combo;
  std::map<std::string, CellResult> cells;  // column key -> result
};

struct ResultsTable {
  std::vector<ResultsRow> rows;
  std::vector<std::string> columns;  // fixed column order
  std::string validation_hash;
  std::size_t validation_size = 0;
  std::map<std::string, std::string> best_row_per_column;  // bold marking
  // Deterministically named curve files: curves_<kind>_<axis>_<combo>.csv.
  std::map<std::string, std::string> curve_files;
};

// True when the player's point-in-time churn state (of the given kind)
// flips to churned at some date in (after, until].
bool churned_within(const PlayerTimeline& t, const ProfilingRules& rules,
                    GapKind kind, Date after, Date until);

// Options for one model fit outside the full experiment harness.
struct SnapshotModelOptions {
  bool survival = false;
  GapKind kind = GapKind::login;
  SurvivalAxis axis = SurvivalAxis::lifetime_days;
  Date split_date = 0;         // feature snapshot / survival cutoff
  Date label_horizon_end = 0;  // binary-label horizon and validation cutoff
  std::vector<Segment> exclusions;
  ProfilingRules rules;
};

// Feature rows for eligible players minus excluded segments, with either
// binary labels over (split, horizon] or survival responses cut at split.
TrainingSet build_training_set(const Cohort& cohort,
                               const std::vector<StateTimeline>& states,
                               const SnapshotModelOptions& opts);

struct ValidationData {
  std::vector<std::string> ids;  // normal-only players as of split_date
  std::vector<std::vector<double>> features;
  std::vector<SurvivalSample> samples;  // survival models
  std::vector<int> labels;              // binary models
};

ValidationData build_validation(const Cohort& cohort,
                                const std::vector<StateTimeline>& states,
                                const SnapshotModelOptions& opts);

ResultsTable run_experiment(const Cohort& cohort, const ExperimentSpec& spec);

// results.csv (Table-1 layout), results.json (full metadata), curves/*.csv.
void emit_reports(const ResultsTable& table, const std::string& out_dir);

}  // namespace churnforge
