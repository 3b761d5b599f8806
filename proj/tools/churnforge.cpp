// churnforge: player-lifecycle churn analytics toolkit.
//
// Subcommands: simulate, ingest, calibrate, label, km, train, predict,
// evaluate, experiment. All randomness flows from --seed; worker count
// never changes numeric output.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "churnforge/calibration.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/evaluation.hpp"
#include "churnforge/event_model.hpp"
#include "churnforge/experiment.hpp"
#include "churnforge/features.hpp"
#include "churnforge/io.hpp"
#include "churnforge/model.hpp"
#include "churnforge/profiling.hpp"
#include "churnforge/simulator.hpp"
#include "churnforge/survival.hpp"
#include "json.hpp"

namespace cf = churnforge;
using nlohmann::json;

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Events file (CSV/JSONL, optionally gzipped) or a saved cohort directory.
cf::Cohort load_data(const std::string& path, int error_budget = 0) {
  if (std::filesystem::is_directory(path)) return cf::load_cohort(path);
  cf::IngestOptions opts;
  opts.error_budget = error_budget;
  return cf::ingest_events_file(path, opts);
}

cf::ProfilingRules load_rules(const std::string& rules_path) {
  cf::ProfilingRules rules;
  if (rules_path.empty()) return rules;
  auto j = json::parse(cf::read_file(rules_path));
  rules.login_window = j.value("login_window", rules.login_window);
  rules.purchase_window = j.value("purchase_window", rules.purchase_window);
  rules.resurrect_min_gap =
      j.value("resurrect_min_gap", rules.resurrect_min_gap);
  if (j.contains("purchase_resurrect_min_gap") &&
      !j["purchase_resurrect_min_gap"].is_null()) {
    rules.purchase_resurrect_min_gap =
        j["purchase_resurrect_min_gap"].get<int>();
  }
  rules.zombie_lookback = j.value("zombie_lookback", rules.zombie_lookback);
  rules.zombie_max_playtime_s =
      j.value("zombie_max_playtime_s", rules.zombie_max_playtime_s);
  rules.zombie_max_levelups =
      j.value("zombie_max_levelups", rules.zombie_max_levelups);
  rules.zombie_max_purchases =
      j.value("zombie_max_purchases", rules.zombie_max_purchases);
  rules.validate();
  return rules;
}

cf::GapKind parse_kind(const std::string& s) {
  if (s == "login") return cf::GapKind::login;
  if (s == "purchase") return cf::GapKind::purchase;
  throw cf::DomainError("unknown gap kind: " + s);
}

std::vector<int> parse_grid(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw cf::DomainError("grid must be LO:HI, got: " + s);
  }
  const int lo = std::stoi(s.substr(0, colon));
  const int hi = std::stoi(s.substr(colon + 1));
  if (lo < 1 || hi < lo) throw cf::DomainError("bad grid range: " + s);
  std::vector<int> grid;
  for (int w = lo; w <= hi; ++w) grid.push_back(w);
  return grid;
}

const char* login_state_name(cf::LoginState s) {
  return s == cf::LoginState::active ? "active" : "churned";
}
const char* engagement_state_name(cf::EngagementState s) {
  return s == cf::EngagementState::normal ? "normal" : "zombie";
}
const char* purchase_state_name(cf::PurchaseState s) {
  switch (s) {
    case cf::PurchaseState::never_paid: return "never_paid";
    case cf::PurchaseState::paying_active: return "paying_active";
    case cf::PurchaseState::purchase_churned: return "purchase_churned";
  }
  return "?";
}

struct Args {
  // Shared
  std::string data;
  std::string out;
  std::string rules_path;
  std::uint64_t seed = 1;
  int workers = 1;
  // simulate
  std::string config_path;
  // ingest
  int error_budget = 0;
  std::string period_start, period_end;
  // calibrate
  std::string kind = "login";
  std::string grid = "3:90";
  double max_false = 0.05;
  double max_missed = 0.01;
  int window_months = 2;
  // label / km / train / evaluate
  std::string as_of;
  std::string axis = "lifetime";
  std::string stratify = "churner-type";
  std::string cutoff;
  std::string model_kind = "survival";
  std::string exclude;
  int trees = 1000;
  double alpha = 0.05;
  int mtry = 0;
  int min_node = 20;
  double subsample = 0.632;
  std::string split;
  std::string horizon_end;
  std::string model_path;
  std::string curves_path;
  std::string pred_grid;
  std::string spec_path;
};

int cmd_simulate(const Args& a) {
  cf::SimConfig config =
      a.config_path.empty() ? cf::default_sim_config()
                            : cf::sim_config_from_json(
                                  cf::read_file(a.config_path));
  config.seed = a.seed;
  config.validate();
  cf::SimOutput out = cf::simulate(config, a.seed);
  std::filesystem::create_directories(a.out);
  cf::write_file(a.out + "/events.csv", out.events_csv);
  cf::write_file(a.out + "/truth.json", cf::truth_to_json(out.truth));
  cf::write_file(a.out + "/sim_config.json", cf::sim_config_to_json(config));
  std::cout << json{{"players", config.n_players},
                    {"out", a.out},
                    {"seed", a.seed}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_ingest(const Args& a) {
  cf::IngestOptions opts;
  opts.error_budget = a.error_budget;
  if (!a.period_start.empty()) opts.period_start = cf::parse_date(a.period_start);
  if (!a.period_end.empty()) opts.period_end = cf::parse_date(a.period_end);
  cf::IngestReport report;
  cf::Cohort cohort = cf::ingest_events_file(a.data, opts, &report);
  cf::save_cohort(cohort, a.out);
  std::cout << json{{"players", cohort.timelines.size()},
                    {"rows_read", report.rows_read},
                    {"rows_rejected", report.rows_rejected},
                    {"period_start", cf::format_date(cohort.period_start)},
                    {"period_end", cf::format_date(cohort.period_end)}}
                   .dump()
            << "\n";
  return 0;
}

void write_curve_csv(const std::string& path, const cf::CalibrationCurve& c) {
  std::ostringstream csv;
  csv << "window,false_churner_pct,missed_sales_pct\n";
  for (const auto& p : c.points) {
    csv << p.window << ',' << fmt(p.false_churner_pct * 100.0, "%.6f") << ','
        << fmt(p.missed_sales_pct * 100.0, "%.6f") << '\n';
  }
  cf::write_file(path, csv.str());
}

int cmd_calibrate(const Args& a) {
  cf::Cohort cohort = load_data(a.data);
  auto [cal_start, cal_end] = cf::first_months_window(cohort, a.window_months);
  cf::Cohort window_cohort = cf::restrict_cohort(cohort, cal_start, cal_end);
  const cf::GapKind kind = parse_kind(a.kind);
  try {
    cf::CalibrationOutcome outcome = cf::calibrate_window(
        window_cohort, parse_grid(a.grid), a.max_false, a.max_missed, kind);
    if (!a.out.empty()) write_curve_csv(a.out, outcome.curve);
    std::cout << json{{"window", outcome.window},
                      {"kind", a.kind},
                      {"calibration_start", cf::format_date(cal_start)},
                      {"calibration_end", cf::format_date(cal_end)}}
                     .dump()
              << "\n";
    return 0;
  } catch (const cf::CalibrationError& e) {
    if (!a.out.empty()) write_curve_csv(a.out, e.curve);
    throw;
  }
}

int cmd_label(const Args& a) {
  cf::Cohort cohort = load_data(a.data);
  if (!a.as_of.empty()) {
    cohort = cf::restrict_cohort(cohort, cohort.period_start,
                                 cf::parse_date(a.as_of));
  }
  const cf::ProfilingRules rules = load_rules(a.rules_path);
  std::ostringstream states_csv, episodes_csv;
  states_csv << "player_id,date,login_state,engagement_state,purchase_state\n";
  episodes_csv << "player_id,kind,start,end,gap_length\n";
  for (const auto& t : cohort.timelines) {
    cf::StateTimeline st = cf::label_states(t, rules);
    for (cf::Date d = st.start; d <= st.end; ++d) {
      states_csv << t.player_id << ',' << cf::format_date(d) << ','
                 << login_state_name(st.login_state(d)) << ','
                 << engagement_state_name(st.engagement_state(d)) << ','
                 << purchase_state_name(st.purchase_state(d)) << '\n';
    }
    for (const auto& ep : st.episodes) {
      episodes_csv << t.player_id << ',' << cf::episode_kind_name(ep.kind)
                   << ',' << cf::format_date(ep.start) << ','
                   << (ep.end ? cf::format_date(*ep.end) : std::string())
                   << ',' << ep.gap_length << '\n';
    }
  }
  cf::write_file(a.out, states_csv.str());
  const std::string episodes_path =
      (std::filesystem::path(a.out).parent_path() / "episodes.csv").string();
  cf::write_file(episodes_path, episodes_csv.str());
  std::cout << json{{"players", cohort.timelines.size()},
                    {"states", a.out},
                    {"episodes", episodes_path}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_km(const Args& a) {
  cf::Cohort cohort = load_data(a.data);
  const cf::ProfilingRules rules = load_rules(a.rules_path);
  const cf::GapKind kind = parse_kind(a.kind);
  const cf::SurvivalAxis axis = cf::parse_axis(a.axis);
  const cf::Date cutoff =
      a.cutoff.empty() ? cohort.period_end : cf::parse_date(a.cutoff);
  std::vector<cf::StateTimeline> states;
  states.reserve(cohort.timelines.size());
  for (const auto& t : cohort.timelines) {
    states.push_back(cf::label_states(t, rules));
  }
  std::ostringstream csv;
  csv << "t,S,ci_low,ci_high,n_risk,n_event,stratum\n";
  auto append = [&](const cf::SurvivalCurve& curve, const std::string& name) {
    for (const auto& p : curve.points) {
      csv << fmt(p.t) << ',' << fmt(p.s) << ',' << fmt(p.ci_low) << ','
          << fmt(p.ci_high) << ',' << fmt(p.n_at_risk) << ','
          << fmt(p.n_events) << ',' << name << '\n';
    }
  };
  json meta;
  if (a.stratify == "churner-type") {
    auto strata =
        cf::km_stratified(cohort, states, axis, kind, cutoff, rules);
    for (const auto& [name, sc] : strata) {
      append(sc.curve, name);
      meta[name] = {{"n", sc.n_samples}, {"low_confidence", sc.low_confidence}};
    }
  } else if (a.stratify == "none") {
    auto samples =
        cf::to_survival_samples(cohort, states, axis, kind, cutoff, rules);
    append(cf::kaplan_meier(samples), "all");
    meta["all"] = {{"n", samples.size()}};
  } else {
    throw cf::DomainError("unknown stratification: " + a.stratify);
  }
  cf::write_file(a.out, csv.str());
  std::cout << json{{"out", a.out},
                    {"strata", std::move(meta)},
                    {"stratum_priority",
                     "purchase_resurrected > resurrected > zombie > normal"}}
                   .dump()
            << "\n";
  return 0;
}

cf::SnapshotModelOptions snapshot_options(const Args& a,
                                          const cf::Cohort& cohort) {
  cf::SnapshotModelOptions opts;
  opts.survival = a.model_kind == "survival";
  if (!opts.survival && a.model_kind != "binary") {
    throw cf::DomainError("model must be binary or survival: " + a.model_kind);
  }
  opts.kind = parse_kind(a.kind);
  opts.axis = cf::parse_axis(a.axis);
  if (a.split.empty()) throw cf::DomainError("--split is required");
  opts.split_date = cf::parse_date(a.split);
  opts.label_horizon_end =
      a.horizon_end.empty() ? cohort.period_end : cf::parse_date(a.horizon_end);
  opts.rules = load_rules(a.rules_path);
  if (!a.exclude.empty()) {
    std::stringstream ss(a.exclude);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) opts.exclusions.push_back(cf::parse_segment(tok));
    }
  }
  return opts;
}

int cmd_train(const Args& a) {
  cf::Cohort cohort = load_data(a.data);
  cf::SnapshotModelOptions opts = snapshot_options(a, cohort);
  std::vector<cf::StateTimeline> states;
  states.reserve(cohort.timelines.size());
  for (const auto& t : cohort.timelines) {
    states.push_back(cf::label_states(t, opts.rules));
  }
  cf::TrainingSet ts = cf::build_training_set(cohort, states, opts);
  cf::ForestParams params;
  params.ensemble_size = a.trees;
  params.subsample_fraction = a.subsample;
  params.tree.alpha = a.alpha;
  params.tree.mtry = a.mtry;
  params.tree.min_node = a.min_node;
  cf::Forest forest = cf::fit_forest(ts, params, a.seed, a.workers);
  cf::save_forest(forest, a.out);
  std::cout << json{{"model", a.out},
                    {"type", a.model_kind},
                    {"training_rows", ts.n_rows()},
                    {"trees", params.ensemble_size},
                    {"seed", a.seed}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_predict(const Args& a) {
  cf::Forest forest = cf::load_forest(a.model_path);
  cf::Cohort cohort = load_data(a.data);
  if (a.as_of.empty()) throw cf::DomainError("--as-of is required");
  const cf::Date as_of = cf::parse_date(a.as_of);

  std::vector<double> grid;
  if (forest.type == cf::ResponseType::survival) {
    if (!a.pred_grid.empty()) {
      std::stringstream ss(a.pred_grid);
      std::string tok;
      while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    } else {
      // Default: quartiles plus 90th percentile of the training times.
      std::vector<double> t = forest.train_times;
      std::sort(t.begin(), t.end());
      for (double q : {0.25, 0.5, 0.75, 0.9}) {
        grid.push_back(t[static_cast<std::size_t>(q * (t.size() - 1))]);
      }
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
  }

  std::ostringstream csv;
  std::size_t scored = 0;
  if (forest.type == cf::ResponseType::binary) {
    csv << "player_id,score\n";
  } else {
    csv << "player_id";
    for (double t : grid) csv << ",S_at_" << fmt(t);
    csv << '\n';
  }
  for (const auto& t : cohort.timelines) {
    if (t.first_login > as_of) continue;
    auto f = cf::build_features(t, as_of);
    std::vector<double> x(f.begin(), f.end());
    if (forest.type == cf::ResponseType::binary) {
      csv << t.player_id << ',' << fmt(cf::predict_probability(forest, x))
          << '\n';
    } else {
      csv << t.player_id;
      for (double s : cf::predict_survival(forest, x, grid)) {
        csv << ',' << fmt(s);
      }
      csv << '\n';
    }
    ++scored;
  }
  cf::write_file(a.out, csv.str());
  std::cout << json{{"out", a.out}, {"players", scored}}.dump() << "\n";
  return 0;
}

int cmd_evaluate(const Args& a) {
  cf::Forest forest = cf::load_forest(a.model_path);
  cf::Cohort cohort = load_data(a.data);
  Args adjusted = a;
  adjusted.model_kind =
      forest.type == cf::ResponseType::survival ? "survival" : "binary";
  cf::SnapshotModelOptions opts = snapshot_options(adjusted, cohort);
  std::vector<cf::StateTimeline> states;
  states.reserve(cohort.timelines.size());
  for (const auto& t : cohort.timelines) {
    states.push_back(cf::label_states(t, opts.rules));
  }
  cf::ValidationData val = cf::build_validation(cohort, states, opts);

  json report = {{"model", a.model_path},
                 {"validation_size", val.ids.size()},
                 {"kind", a.kind},
                 {"split_date", cf::format_date(opts.split_date)},
                 {"validation_end", cf::format_date(opts.label_horizon_end)}};
  if (forest.type == cf::ResponseType::binary) {
    std::vector<double> scores;
    scores.reserve(val.ids.size());
    for (const auto& x : val.features) {
      scores.push_back(cf::predict_probability(forest, x));
    }
    report["auc"] = cf::auc(scores, val.labels);
  } else {
    const double tau = cf::default_tau(val.samples);
    const auto grid = cf::evaluation_grid(val.samples, tau);
    cf::PredictionErrorCurve curve =
        cf::error_curves(forest, val.features, val.samples, grid);
    report["ibs"] = curve.ibs;
    report["tau"] = tau;
    report["axis"] = a.axis;
    report["baseline_km_ibs"] = curve.baseline_km_ibs;
    report["baseline_const_ibs"] = curve.baseline_const_ibs;
    if (!a.curves_path.empty()) {
      std::ostringstream csv;
      csv << "t,bs,baseline_km_bs,baseline_const_bs\n";
      for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        csv << fmt(curve.grid[g]) << ',' << fmt(curve.bs[g]) << ','
            << fmt(curve.baseline_km_bs[g]) << ','
            << fmt(curve.baseline_const_bs[g]) << '\n';
      }
      cf::write_file(a.curves_path, csv.str());
      report["curves"] = a.curves_path;
    }
  }
  cf::write_file(a.out, report.dump(2) + "\n");
  std::cout << report.dump() << "\n";
  return 0;
}

int cmd_experiment(const Args& a) {
  cf::Cohort cohort = load_data(a.data);
  cf::ExperimentSpec spec;
  if (!a.spec_path.empty()) {
    spec = cf::experiment_spec_from_json(cf::read_file(a.spec_path));
  } else {
    if (a.split.empty()) {
      throw cf::DomainError("--split is required without --spec");
    }
    spec.split_date = cf::parse_date(a.split);
    spec.validation_end = a.horizon_end.empty()
                              ? cohort.period_end
                              : cf::parse_date(a.horizon_end);
    spec.forest.ensemble_size = a.trees;
  }
  spec.seed = a.seed;
  spec.workers = a.workers;
  cf::ResultsTable table = cf::run_experiment(cohort, spec);
  cf::emit_reports(table, a.out);
  cf::write_file(a.out + "/spec.json", cf::experiment_spec_to_json(spec));
  std::cout << json{{"out", a.out},
                    {"rows", table.rows.size()},
                    {"columns", table.columns},
                    {"validation_hash", table.validation_hash}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"churnforge: player-lifecycle churn analytics"};
  app.require_subcommand(1);
  Args a;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", a.seed, "Master RNG seed")
        ->envname("CHURNFORGE_SEED");
  };
  auto add_workers = [&](CLI::App* cmd) {
    cmd->add_option("--workers", a.workers, "Worker threads (>= 1)")
        ->envname("CHURNFORGE_WORKERS")
        ->check(CLI::PositiveNumber);
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", a.data,
                    "Events file (CSV/JSONL, .gz ok) or cohort directory")
        ->required();
  };
  auto add_rules = [&](CLI::App* cmd) {
    cmd->add_option("--rules", a.rules_path, "Profiling rules JSON");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic cohort");
  sim->add_option("--config", a.config_path, "Simulator config JSON");
  sim->add_option("--out", a.out, "Output directory")->required();
  add_seed(sim);

  auto* ing = app.add_subcommand("ingest", "Parse events into a cohort dir");
  add_data(ing);
  ing->add_option("--out", a.out, "Cohort output directory")->required();
  ing->add_option("--error-budget", a.error_budget,
                  "Malformed rows tolerated");
  ing->add_option("--period-start", a.period_start, "Clamp period (date)");
  ing->add_option("--period-end", a.period_end, "Clamp period (date)");

  auto* cal = app.add_subcommand("calibrate", "Choose the churn window");
  add_data(cal);
  cal->add_option("--kind", a.kind, "login|purchase");
  cal->add_option("--grid", a.grid, "Window grid LO:HI (days)");
  cal->add_option("--max-false", a.max_false, "False-churner rate bound");
  cal->add_option("--max-missed", a.max_missed, "Missed-sales rate bound");
  cal->add_option("--window-months", a.window_months,
                  "Calendar months of data used");
  cal->add_option("--out", a.out, "Curve CSV path");

  auto* lab = app.add_subcommand("label", "Per-day lifecycle states");
  add_data(lab);
  add_rules(lab);
  lab->add_option("--as-of", a.as_of, "Restrict records to this date");
  lab->add_option("--out", a.out, "states.csv path")->required();

  auto* km = app.add_subcommand("km", "Kaplan-Meier survival curves");
  add_data(km);
  add_rules(km);
  km->add_option("--axis", a.axis, "lifetime|level|playtime");
  km->add_option("--kind", a.kind, "login|purchase");
  km->add_option("--stratify", a.stratify, "churner-type|none");
  km->add_option("--cutoff", a.cutoff, "Censoring date (default period end)");
  km->add_option("--out", a.out, "km.csv path")->required();

  auto* tr = app.add_subcommand("train", "Fit a conditional inference forest");
  add_data(tr);
  add_rules(tr);
  tr->add_option("--model", a.model_kind, "binary|survival");
  tr->add_option("--axis", a.axis, "lifetime|level|playtime");
  tr->add_option("--kind", a.kind, "login|purchase");
  tr->add_option("--exclude", a.exclude,
                 "Comma list: zombie,resurrected,p_resurrected");
  tr->add_option("--trees", a.trees, "Ensemble size");
  tr->add_option("--split", a.split, "Feature snapshot date")->required();
  tr->add_option("--horizon-end", a.horizon_end,
                 "Binary label horizon (default period end)");
  tr->add_option("--alpha", a.alpha, "Split significance level");
  tr->add_option("--mtry", a.mtry, "Features tested per node (0 = sqrt)");
  tr->add_option("--min-node", a.min_node, "Minimum node size");
  tr->add_option("--subsample", a.subsample, "Per-tree subsample fraction");
  tr->add_option("--out", a.out, "Model path")->required();
  add_seed(tr);
  add_workers(tr);

  auto* pr = app.add_subcommand("predict", "Score players with a model");
  pr->add_option("--model", a.model_path, "Model path")->required();
  add_data(pr);
  pr->add_option("--as-of", a.as_of, "Feature snapshot date")->required();
  pr->add_option("--grid", a.pred_grid,
                 "Comma-separated times for survival curves");
  pr->add_option("--out", a.out, "scores.csv path")->required();

  auto* ev = app.add_subcommand("evaluate", "AUC / IBS on validation players");
  ev->add_option("--model", a.model_path, "Model path")->required();
  add_data(ev);
  add_rules(ev);
  ev->add_option("--kind", a.kind, "login|purchase");
  ev->add_option("--axis", a.axis, "lifetime|level|playtime");
  ev->add_option("--split", a.split, "Validation snapshot date")->required();
  ev->add_option("--validation-end", a.horizon_end,
                 "Follow-up end (default period end)");
  ev->add_option("--out", a.out, "report.json path")->required();
  ev->add_option("--curves", a.curves_path, "Error-curve CSV path");

  auto* ex = app.add_subcommand("experiment", "Exclusion-combo grid study");
  add_data(ex);
  ex->add_option("--spec", a.spec_path, "Experiment spec JSON");
  ex->add_option("--split", a.split, "Split date (without --spec)");
  ex->add_option("--validation-end", a.horizon_end,
                 "Follow-up end (default period end)");
  ex->add_option("--trees", a.trees, "Ensemble size (without --spec)");
  ex->add_option("--out", a.out, "Output directory")->required();
  add_seed(ex);
  add_workers(ex);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(a);
    if (ing->parsed()) return cmd_ingest(a);
    if (cal->parsed()) return cmd_calibrate(a);
    if (lab->parsed()) return cmd_label(a);
    if (km->parsed()) return cmd_km(a);
    if (tr->parsed()) return cmd_train(a);
    if (pr->parsed()) return cmd_predict(a);
    if (ev->parsed()) return cmd_evaluate(a);
    if (ex->parsed()) return cmd_experiment(a);
  } catch (const json::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
