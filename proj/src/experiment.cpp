#include "churnforge/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "churnforge/errors.hpp"
#include "churnforge/features.hpp"
#include "churnforge/io.hpp"
#include "json.hpp"

namespace churnforge {

const char* segment_name(Segment s) {
  switch (s) {
    case Segment::zombie: return "zombie";
    case Segment::resurrected: return "resurrected";
    case Segment::p_resurrected: return "p_resurrected";
  }
  return "?";
}

Segment parse_segment(const std::string& s) {
  if (s == "zombie") return Segment::zombie;
  if (s == "resurrected") return Segment::resurrected;
  if (s == "p_resurrected" || s == "purchase_resurrected") {
    return Segment::p_resurrected;
  }
  throw DomainError("unknown segment: " + s);
}

std::string combo_name(const std::vector<Segment>& combo) {
  if (combo.empty()) return "none";
  std::string name;
  for (const auto& s : combo) {
    if (!name.empty()) name += "+";
    name += segment_name(s);
  }
  return name;
}

std::vector<std::vector<Segment>> default_combos() {
  using S = Segment;
  return {{},
          {S::zombie},
          {S::resurrected},
          {S::p_resurrected},
          {S::zombie, S::resurrected},
          {S::zombie, S::p_resurrected},
          {S::resurrected, S::p_resurrected},
          {S::zombie, S::resurrected, S::p_resurrected}};
}

void ExperimentSpec::validate(const Cohort& cohort) const {
  if (!(split_date < validation_end)) {
    throw DomainError("split_date must precede validation_end");
  }
  if (validation_end > cohort.period_end) {
    throw DomainError("validation_end beyond cohort period");
  }
  std::set<std::string> seen;
  for (const auto& c : exclusion_combos) {
    if (!seen.insert(combo_name(c)).second) {
      throw DomainError("duplicate exclusion combo: " + combo_name(c));
    }
  }
  if (exclusion_combos.empty()) throw DomainError("no exclusion combos");
  rules.validate();
}

bool churned_within(const PlayerTimeline& t, const ProfilingRules& rules,
                    GapKind kind, Date after, Date until) {
  const int window =
      kind == GapKind::login ? rules.login_window : rules.purchase_window;
  std::vector<Date> active;
  for (const auto& r : t.records) {
    if (r.date > until) break;
    const bool q = kind == GapKind::login ? r.login_activity()
                                          : r.purchase_activity();
    if (q) active.push_back(r.date);
  }
  if (active.empty()) return false;
  for (std::size_t i = 0; i < active.size(); ++i) {
    // Last day of this inactivity stretch visible within the horizon.
    const Date stretch_end =
        (i + 1 < active.size()) ? active[i + 1] - 1 : until;
    const Date d = std::min(stretch_end, until);
    // The state flips on the first day the gap exceeds the window; the flip
    // must itself land inside (after, until] and before any return.
    const Date flip = active[i] + window + 1;
    if (flip > after && flip <= d) return true;
  }
  return false;
}

TrainingSet build_training_set(const Cohort& cohort,
                               const std::vector<StateTimeline>& states,
                               const SnapshotModelOptions& opts) {
  TrainingSet ts;
  ts.feature_names.assign(feature_names().begin(), feature_names().end());
  ts.columns.assign(kNumFeatures, {});
  ts.type = opts.survival ? ResponseType::survival : ResponseType::binary;
  ts.exclusion_tag = combo_name(opts.exclusions);
  for (std::size_t i = 0; i < cohort.timelines.size(); ++i) {
    const auto& t = cohort.timelines[i];
    if (t.first_login > opts.split_date) continue;
    bool excluded = false;
    for (Segment s : opts.exclusions) {
      const bool has =
          s == Segment::zombie
              ? states[i].ever_zombie_asof(opts.split_date)
              : s == Segment::resurrected
                    ? states[i].ever_resurrected_asof(opts.split_date)
                    : states[i].ever_purchase_resurrected_asof(opts.split_date);
      if (has) excluded = true;
    }
    if (excluded) continue;

    double time = 0;
    bool event = false;
    if (opts.survival) {
      auto s = survival_sample_for(t, states[i], opts.axis, opts.kind,
                                   opts.split_date, opts.rules);
      if (!s) continue;
      time = s->time;
      event = s->event;
    } else {
      if (opts.kind == GapKind::purchase &&
          !t.has_purchase_by(opts.split_date)) {
        continue;
      }
    }
    auto f = build_features(t, opts.split_date);
    for (std::size_t fi = 0; fi < kNumFeatures; ++fi) {
      ts.columns[fi].push_back(f[fi]);
    }
    if (opts.survival) {
      ts.times.push_back(time);
      ts.events.push_back(event);
    } else {
      ts.labels.push_back(churned_within(t, opts.rules, opts.kind,
                                         opts.split_date,
                                         opts.label_horizon_end)
                              ? 1
                              : 0);
    }
    ts.row_ids.push_back(t.player_id);
  }
  if (ts.n_rows() == 0) throw DomainError("empty training set");
  return ts;
}

ValidationData build_validation(const Cohort& cohort,
                                const std::vector<StateTimeline>& states,
                                const SnapshotModelOptions& opts) {
  ValidationData v;
  for (std::size_t i = 0; i < cohort.timelines.size(); ++i) {
    const auto& t = cohort.timelines[i];
    if (t.first_login > opts.split_date) continue;
    if (login_churned_at(t, opts.rules, opts.split_date)) continue;
    if (states[i].ever_zombie_asof(opts.split_date) ||
        states[i].ever_resurrected_asof(opts.split_date) ||
        states[i].ever_purchase_resurrected_asof(opts.split_date)) {
      continue;
    }
    auto f = build_features(t, opts.split_date);
    if (opts.survival) {
      auto s = survival_sample_for(t, states[i], opts.axis, opts.kind,
                                   opts.label_horizon_end, opts.rules);
      if (!s) continue;
      v.samples.push_back(std::move(*s));
    } else {
      if (opts.kind == GapKind::purchase &&
          !t.has_purchase_by(opts.split_date)) {
        continue;
      }
      v.labels.push_back(churned_within(t, opts.rules, opts.kind,
                                        opts.split_date,
                                        opts.label_horizon_end)
                             ? 1
                             : 0);
    }
    v.ids.push_back(t.player_id);
    v.features.emplace_back(f.begin(), f.end());
  }
  if (v.ids.empty()) throw DomainError("empty validation cohort");
  return v;
}

namespace {

std::string fnv1a_hash(const std::vector<std::string>& ids) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& id : ids) {
    for (char c : id) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct PlayerContext {
  bool eligible = false;  // first_login <= split_date
  bool validation = false;
  bool has_segment[3] = {false, false, false};
  std::vector<double> features;  // as of split_date
};

std::uint64_t family_id(bool survival) { return survival ? 2 : 1; }
std::uint64_t kind_id(GapKind k) { return k == GapKind::login ? 1 : 2; }
std::uint64_t axis_id(SurvivalAxis a) {
  return static_cast<std::uint64_t>(a) + 1;
}

}  // namespace

ResultsTable run_experiment(const Cohort& cohort, const ExperimentSpec& spec) {
  spec.validate(cohort);
  const std::size_t n = cohort.timelines.size();

  std::vector<StateTimeline> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i] = label_states(cohort.timelines[i], spec.rules);
  }

  // Per-player context: eligibility, segment labels as of the split date,
  // features as of the split date.
  std::vector<PlayerContext> ctx(n);
  std::vector<std::string> validation_ids;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = cohort.timelines[i];
    auto& c = ctx[i];
    if (t.first_login > spec.split_date) continue;
    c.eligible = true;
    c.has_segment[0] = states[i].ever_zombie_asof(spec.split_date);
    c.has_segment[1] = states[i].ever_resurrected_asof(spec.split_date);
    c.has_segment[2] =
        states[i].ever_purchase_resurrected_asof(spec.split_date);
    const bool churned = login_churned_at(t, spec.rules, spec.split_date);
    c.validation = !churned && !c.has_segment[0] && !c.has_segment[1] &&
                   !c.has_segment[2];
    auto f = build_features(t, spec.split_date);
    c.features.assign(f.begin(), f.end());
    if (c.validation) validation_ids.push_back(t.player_id);
  }

  ResultsTable table;
  table.validation_hash = fnv1a_hash(validation_ids);
  table.validation_size = validation_ids.size();
  if (validation_ids.empty()) throw DomainError("empty validation cohort");

  // Precomputed responses (combo-independent).
  struct KindData {
    std::vector<int> binary_label;        // -1 out of scope, else 0/1
    std::vector<int> val_binary_label;
  };
  std::map<GapKind, KindData> kind_data;
  for (GapKind kind : spec.kinds) {
    KindData kd;
    kd.binary_label.assign(n, -1);
    kd.val_binary_label.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!ctx[i].eligible) continue;
      const auto& t = cohort.timelines[i];
      if (kind == GapKind::purchase && !t.has_purchase_by(spec.split_date)) {
        continue;
      }
      const int label = churned_within(t, spec.rules, kind, spec.split_date,
                                       spec.validation_end)
                            ? 1
                            : 0;
      kd.binary_label[i] = label;
      if (ctx[i].validation) kd.val_binary_label[i] = label;
    }
    kind_data.emplace(kind, std::move(kd));
  }

  struct SurvData {
    std::vector<std::optional<SurvivalSample>> train_sample;  // cutoff=split
    std::vector<SurvivalSample> val_samples;
    std::vector<std::vector<double>> val_features;
    std::vector<double> grid;
  };
  std::map<std::pair<int, int>, SurvData> surv_data;
  if (spec.run_survival) {
    for (GapKind kind : spec.kinds) {
      for (SurvivalAxis axis : spec.axes) {
        SurvData sd;
        sd.train_sample.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (!ctx[i].eligible) continue;
          sd.train_sample[i] =
              survival_sample_for(cohort.timelines[i], states[i], axis, kind,
                                  spec.split_date, spec.rules);
          if (ctx[i].validation) {
            auto vs = survival_sample_for(cohort.timelines[i], states[i],
                                          axis, kind, spec.validation_end,
                                          spec.rules);
            if (vs) {
              sd.val_samples.push_back(std::move(*vs));
              sd.val_features.push_back(ctx[i].features);
            }
          }
        }
        if (!sd.val_samples.empty()) {
          const double tau = default_tau(sd.val_samples);
          sd.grid = evaluation_grid(sd.val_samples, tau);
        }
        surv_data.emplace(
            std::make_pair(static_cast<int>(kind), static_cast<int>(axis)),
            std::move(sd));
      }
    }
  }

  // Fixed column order: AUCs first, then IBS by kind then axis.
  if (spec.run_binary) {
    for (GapKind kind : spec.kinds) {
      table.columns.push_back(
          std::string("auc_") + (kind == GapKind::login ? "login" : "purchase"));
    }
  }
  if (spec.run_survival) {
    for (GapKind kind : spec.kinds) {
      for (SurvivalAxis axis : spec.axes) {
        table.columns.push_back(
            std::string("ibs_") +
            (kind == GapKind::login ? "login_" : "purchase_") +
            axis_name(axis));
      }
    }
  }

  for (std::size_t combo_idx = 0; combo_idx < spec.exclusion_combos.size();
       ++combo_idx) {
    const auto& combo = spec.exclusion_combos[combo_idx];
    ResultsRow row;
    row.combo = combo;

    std::vector<int> train_rows;  // player indices kept under this combo
    for (std::size_t i = 0; i < n; ++i) {
      if (!ctx[i].eligible) continue;
      bool excluded = false;
      for (Segment s : combo) {
        if (ctx[i].has_segment[static_cast<int>(s)]) excluded = true;
      }
      if (!excluded) train_rows.push_back(static_cast<int>(i));
    }

    auto run_cell = [&](const std::string& column, std::uint64_t cell_seed,
                        auto&& body) {
      CellResult cell;
      cell.seed = cell_seed;
      try {
        body(cell);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      row.cells[column] = std::move(cell);
    };

    if (spec.run_binary) {
      for (GapKind kind : spec.kinds) {
        const std::string column =
            std::string("auc_") +
            (kind == GapKind::login ? "login" : "purchase");
        const std::uint64_t cell_seed = derive_seed(
            spec.seed, combo_idx, family_id(false) * 16 + kind_id(kind), 0);
        run_cell(column, cell_seed, [&](CellResult& cell) {
          const auto& kd = kind_data.at(kind);
          TrainingSet ts;
          ts.feature_names.assign(feature_names().begin(),
                                  feature_names().end());
          ts.columns.assign(kNumFeatures, {});
          ts.type = ResponseType::binary;
          ts.exclusion_tag = combo_name(combo);
          for (int i : train_rows) {
            if (kd.binary_label[static_cast<std::size_t>(i)] < 0) continue;
            for (std::size_t f = 0; f < kNumFeatures; ++f) {
              ts.columns[f].push_back(
                  ctx[static_cast<std::size_t>(i)].features[f]);
            }
            ts.labels.push_back(
                kd.binary_label[static_cast<std::size_t>(i)]);
            ts.row_ids.push_back(
                cohort.timelines[static_cast<std::size_t>(i)].player_id);
          }
          cell.training_rows = ts.n_rows();
          Forest forest = fit_forest(ts, spec.forest, cell_seed, spec.workers);
          std::vector<double> scores;
          std::vector<int> labels;
          for (std::size_t i = 0; i < n; ++i) {
            if (kd.val_binary_label[i] < 0) continue;
            scores.push_back(predict_probability(forest, ctx[i].features));
            labels.push_back(kd.val_binary_label[i]);
          }
          cell.value = auc(scores, labels);
        });
      }
    }

    if (spec.run_survival) {
      for (GapKind kind : spec.kinds) {
        for (SurvivalAxis axis : spec.axes) {
          const std::string column =
              std::string("ibs_") +
              (kind == GapKind::login ? "login_" : "purchase_") +
              axis_name(axis);
          const std::uint64_t cell_seed =
              derive_seed(spec.seed, combo_idx,
                          family_id(true) * 16 + kind_id(kind), axis_id(axis));
          run_cell(column, cell_seed, [&](CellResult& cell) {
            const auto& sd = surv_data.at(
                {static_cast<int>(kind), static_cast<int>(axis)});
            if (sd.val_samples.empty()) {
              throw DomainError("no validation samples for this cell");
            }
            TrainingSet ts;
            ts.feature_names.assign(feature_names().begin(),
                                    feature_names().end());
            ts.columns.assign(kNumFeatures, {});
            ts.type = ResponseType::survival;
            ts.exclusion_tag = combo_name(combo);
            for (int i : train_rows) {
              const auto& s = sd.train_sample[static_cast<std::size_t>(i)];
              if (!s) continue;
              for (std::size_t f = 0; f < kNumFeatures; ++f) {
                ts.columns[f].push_back(
                    ctx[static_cast<std::size_t>(i)].features[f]);
              }
              ts.times.push_back(s->time);
              ts.events.push_back(s->event);
              ts.row_ids.push_back(s->player_id);
            }
            cell.training_rows = ts.n_rows();
            Forest forest =
                fit_forest(ts, spec.forest, cell_seed, spec.workers);
            PredictionErrorCurve curve = error_curves(
                forest, sd.val_features, sd.val_samples, sd.grid);
            cell.value = curve.ibs;

            std::ostringstream csv;
            csv << "t,bs,baseline_km_bs,baseline_const_bs\n";
            for (std::size_t g = 0; g < curve.grid.size(); ++g) {
              csv << fmt(curve.grid[g]) << ',' << fmt(curve.bs[g]) << ','
                  << fmt(curve.baseline_km_bs[g]) << ','
                  << fmt(curve.baseline_const_bs[g]) << '\n';
            }
            const std::string fname =
                "curves_" +
                std::string(kind == GapKind::login ? "login" : "purchase") +
                "_" + axis_name(axis) + "_" + combo_name(combo) + ".csv";
            table.curve_files[fname] = csv.str();
          });
        }
      }
    }
    table.rows.push_back(std::move(row));
  }

  // Bold marking: max AUC, min IBS per column, over successful cells.
  for (const auto& column : table.columns) {
    const bool is_auc = column.rfind("auc_", 0) == 0;
    std::string best_row;
    double best = 0;
    bool have = false;
    for (const auto& row : table.rows) {
      auto it = row.cells.find(column);
      if (it == row.cells.end() || !it->second.value) continue;
      const double v = *it->second.value;
      if (!have || (is_auc ? v > best : v < best)) {
        best = v;
        best_row = combo_name(row.combo);
        have = true;
      }
    }
    if (have) table.best_row_per_column[column] = best_row;
  }
  return table;
}

void emit_reports(const ResultsTable& table, const std::string& out_dir) {
  if (table.rows.empty()) throw DomainError("empty results table");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/curves");

  std::ostringstream csv;
  csv << "excluding_from_training";
  for (const auto& c : table.columns) csv << ',' << c;
  csv << '\n';
  for (const auto& row : table.rows) {
    csv << combo_name(row.combo);
    for (const auto& c : table.columns) {
      auto it = row.cells.find(c);
      csv << ',';
      if (it != row.cells.end() && it->second.value) {
        csv << fmt(*it->second.value, "%.6f");
      } else {
        csv << "NA";
      }
    }
    csv << '\n';
  }
  write_file(out_dir + "/results.csv", csv.str());

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json cells;
    for (const auto& [column, cell] : row.cells) {
      nlohmann::json cj = {{"seed", cell.seed},
                           {"training_rows", cell.training_rows},
                           {"validation_hash", table.validation_hash}};
      if (cell.value) {
        cj["value"] = *cell.value;
      } else {
        cj["error"] = cell.error;
      }
      cells[column] = std::move(cj);
    }
    rows.push_back(
        {{"combo", combo_name(row.combo)}, {"cells", std::move(cells)}});
  }
  nlohmann::json j = {{"rows", std::move(rows)},
                      {"columns", table.columns},
                      {"validation_hash", table.validation_hash},
                      {"validation_size", table.validation_size},
                      {"best_row_per_column", table.best_row_per_column}};
  write_file(out_dir + "/results.json", j.dump(2) + "\n");

  for (const auto& [name, content] : table.curve_files) {
    write_file(out_dir + "/curves/" + name, content);
  }
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json combos = nlohmann::json::array();
  for (const auto& combo : spec.exclusion_combos) {
    nlohmann::json c = nlohmann::json::array();
    for (Segment s : combo) c.push_back(segment_name(s));
    combos.push_back(std::move(c));
  }
  nlohmann::json kinds = nlohmann::json::array();
  for (GapKind k : spec.kinds) {
    kinds.push_back(k == GapKind::login ? "login" : "purchase");
  }
  nlohmann::json axes = nlohmann::json::array();
  for (SurvivalAxis a : spec.axes) axes.push_back(axis_name(a));
  return nlohmann::json{
      {"split_date", format_date(spec.split_date)},
      {"validation_end", format_date(spec.validation_end)},
      {"exclusion_combos", std::move(combos)},
      {"run_binary", spec.run_binary},
      {"run_survival", spec.run_survival},
      {"kinds", std::move(kinds)},
      {"axes", std::move(axes)},
      {"rules",
       {{"login_window", spec.rules.login_window},
        {"purchase_window", spec.rules.purchase_window},
        {"resurrect_min_gap", spec.rules.resurrect_min_gap},
        {"zombie_lookback", spec.rules.zombie_lookback},
        {"zombie_max_playtime_s", spec.rules.zombie_max_playtime_s}}},
      {"forest",
       {{"ensemble_size", spec.forest.ensemble_size},
        {"subsample_fraction", spec.forest.subsample_fraction},
        {"alpha", spec.forest.tree.alpha},
        {"mtry", spec.forest.tree.mtry},
        {"min_node", spec.forest.tree.min_node}}},
      {"seed", spec.seed},
      {"workers", spec.workers}}.dump(2) +
      "\n";
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ExperimentSpec spec;
  spec.split_date = parse_date(j.at("split_date"));
  spec.validation_end = parse_date(j.at("validation_end"));
  if (j.contains("exclusion_combos")) {
    spec.exclusion_combos.clear();
    for (const auto& cj : j.at("exclusion_combos")) {
      std::vector<Segment> combo;
      for (const auto& sj : cj) combo.push_back(parse_segment(sj));
      spec.exclusion_combos.push_back(std::move(combo));
    }
  }
  spec.run_binary = j.value("run_binary", true);
  spec.run_survival = j.value("run_survival", true);
  if (j.contains("kinds")) {
    spec.kinds.clear();
    for (const auto& kj : j.at("kinds")) {
      spec.kinds.push_back(kj == std::string("purchase") ? GapKind::purchase
                                                         : GapKind::login);
    }
  }
  if (j.contains("axes")) {
    spec.axes.clear();
    for (const auto& aj : j.at("axes")) {
      spec.axes.push_back(parse_axis(aj.get<std::string>()));
    }
  }
  if (j.contains("rules")) {
    const auto& r = j.at("rules");
    spec.rules.login_window = r.value("login_window", spec.rules.login_window);
    spec.rules.purchase_window =
        r.value("purchase_window", spec.rules.purchase_window);
    spec.rules.resurrect_min_gap =
        r.value("resurrect_min_gap", spec.rules.resurrect_min_gap);
    spec.rules.zombie_lookback =
        r.value("zombie_lookback", spec.rules.zombie_lookback);
    spec.rules.zombie_max_playtime_s =
        r.value("zombie_max_playtime_s", spec.rules.zombie_max_playtime_s);
  }
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    spec.forest.ensemble_size =
        f.value("ensemble_size", spec.forest.ensemble_size);
    spec.forest.subsample_fraction =
        f.value("subsample_fraction", spec.forest.subsample_fraction);
    spec.forest.tree.alpha = f.value("alpha", spec.forest.tree.alpha);
    spec.forest.tree.mtry = f.value("mtry", spec.forest.tree.mtry);
    spec.forest.tree.min_node = f.value("min_node", spec.forest.tree.min_node);
  }
  spec.seed = j.value("seed", spec.seed);
  spec.workers = j.value("workers", spec.workers);
  return spec;
}

}  // namespace churnforge
