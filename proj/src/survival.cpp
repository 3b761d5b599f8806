#include "churnforge/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "churnforge/errors.hpp"

namespace churnforge {

double StepFunction::at(double t) const {
  double v = initial_;
  for (const auto& [x, y] : steps_) {
    if (x > t) break;
    v = y;
  }
  return v;
}

double StepFunction::before(double t) const {
  double v = initial_;
  for (const auto& [x, y] : steps_) {
    if (x >= t) break;
    v = y;
  }
  return v;
}

const char* axis_name(SurvivalAxis a) {
  switch (a) {
    case SurvivalAxis::lifetime_days: return "lifetime";
    case SurvivalAxis::level: return "level";
    case SurvivalAxis::playtime_hours: return "playtime";
  }
  return "?";
}

SurvivalAxis parse_axis(const std::string& s) {
  if (s == "lifetime") return SurvivalAxis::lifetime_days;
  if (s == "level") return SurvivalAxis::level;
  if (s == "playtime") return SurvivalAxis::playtime_hours;
  throw DomainError("unknown axis: " + s +
                    " (expected lifetime|level|playtime)");
}

double SurvivalCurve::at(double t) const {
  double s = 1.0;
  for (const auto& p : points) {
    if (p.t > t) break;
    s = p.s;
  }
  return s;
}

namespace {

struct TableEntry {
  double t;
  double d;  // weighted events at t
  double c;  // weighted censorings at t
};

std::vector<TableEntry> tally(const std::vector<double>& times,
                              const std::vector<bool>& events,
                              const std::vector<double>& weights) {
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return events[a] > events[b];  // events precede censorings
  });
  std::vector<TableEntry> table;
  for (std::size_t k = 0; k < idx.size();) {
    const double t = times[idx[k]];
    double d = 0, c = 0;
    while (k < idx.size() && times[idx[k]] == t) {
      const double w = weights.empty() ? 1.0 : weights[idx[k]];
      if (events[idx[k]]) d += w; else c += w;
      ++k;
    }
    table.push_back({t, d, c});
  }
  return table;
}

SurvivalCurve km_from_table(const std::vector<TableEntry>& table,
                            double total_weight, bool with_ci) {
  constexpr double z = 1.959963984540054;  // two-sided 95%
  SurvivalCurve curve;
  curve.points.push_back({0.0, 1.0, 1.0, 1.0, total_weight, 0.0});
  double s = 1.0;
  double greenwood = 0.0;  // sum d / (n (n - d))
  double at_risk = total_weight;
  for (const auto& e : table) {
    if (e.d > 0 && at_risk > 0) {
      s *= 1.0 - e.d / at_risk;
      if (at_risk - e.d > 0) {
        greenwood += e.d / (at_risk * (at_risk - e.d));
      } else {
        greenwood = std::numeric_limits<double>::infinity();
      }
      double lo = s, hi = s;
      if (with_ci) {
        if (s <= 0.0) {
          lo = hi = 0.0;
        } else if (s >= 1.0) {
          lo = hi = 1.0;
        } else {
          // log(-log S) transform keeps the band inside [0, 1].
          const double se = std::sqrt(greenwood) / std::fabs(std::log(s));
          lo = std::pow(s, std::exp(z * se));
          hi = std::pow(s, std::exp(-z * se));
        }
      }
      curve.points.push_back({e.t, s, lo, hi, at_risk, e.d});
    }
    at_risk -= e.d + e.c;
  }
  return curve;
}

}  // namespace

std::vector<RiskTableRow> risk_table(const std::vector<SurvivalSample>& s) {
  std::vector<double> times(s.size());
  std::vector<bool> events(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    times[i] = s[i].time;
    events[i] = s[i].event;
  }
  auto table = tally(times, events, {});
  std::vector<RiskTableRow> rows;
  double at_risk = static_cast<double>(s.size());
  for (const auto& e : table) {
    if (e.d > 0) rows.push_back({e.t, e.d, at_risk});
    at_risk -= e.d + e.c;
  }
  return rows;
}

SurvivalCurve kaplan_meier(const std::vector<SurvivalSample>& samples) {
  if (samples.empty()) throw DomainError("kaplan_meier: no samples");
  std::vector<double> times(samples.size());
  std::vector<bool> events(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    times[i] = samples[i].time;
    events[i] = samples[i].event;
  }
  return km_from_table(tally(times, events, {}),
                       static_cast<double>(samples.size()), true);
}

SurvivalCurve kaplan_meier_weighted(const std::vector<double>& times,
                                    const std::vector<bool>& events,
                                    const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw DomainError("weighted KM: zero total weight");
  return km_from_table(tally(times, events, weights), total, false);
}

StepFunction nelson_aalen(const std::vector<SurvivalSample>& samples) {
  if (samples.empty()) throw DomainError("nelson_aalen: no samples");
  std::vector<std::pair<double, double>> steps;
  double cum = 0.0;
  for (const auto& row : risk_table(samples)) {
    cum += row.events / row.at_risk;
    steps.emplace_back(row.t, cum);
  }
  return StepFunction(0.0, std::move(steps));
}

namespace {

double axis_value(const PlayerTimeline& t, SurvivalAxis axis, Date d) {
  switch (axis) {
    case SurvivalAxis::lifetime_days:
      return static_cast<double>(d - t.first_login);
    case SurvivalAxis::level:
      return static_cast<double>(t.level_at(d));
    case SurvivalAxis::playtime_hours:
      return t.playtime_at(d) / 3600.0;
  }
  return 0.0;
}

}  // namespace

std::optional<SurvivalSample> survival_sample_for(const PlayerTimeline& t,
                                                  const StateTimeline& st,
                                                  SurvivalAxis axis,
                                                  GapKind kind, Date cutoff,
                                                  const ProfilingRules& rules) {
  if (t.first_login > cutoff) return std::nullopt;
  if (kind == GapKind::purchase && !t.has_purchase_by(cutoff)) {
    return std::nullopt;
  }
  const int window =
      (kind == GapKind::login) ? rules.login_window : rules.purchase_window;

  SurvivalSample s;
  s.player_id = t.player_id;
  s.event = false;
  s.time = axis_value(t, axis, cutoff);
  for (const auto& ep : st.episodes) {
    const bool matches =
        (kind == GapKind::login)
            ? (ep.kind == EpisodeKind::churn ||
               ep.kind == EpisodeKind::resurrection)
            : (ep.kind == EpisodeKind::purchase_churn ||
               ep.kind == EpisodeKind::purchase_resurrection);
    if (!matches) continue;
    // The churn is only observable once the gap exceeds the window.
    if (ep.start + window + 1 > cutoff) continue;
    s.event = true;
    s.time = axis_value(t, axis, ep.start);
    break;
  }
  return s;
}

std::vector<SurvivalSample> to_survival_samples(
    const Cohort& cohort, const std::vector<StateTimeline>& states,
    SurvivalAxis axis, GapKind kind, Date cutoff, const ProfilingRules& rules) {
  if (cohort.timelines.size() != states.size()) {
    throw DomainError("states/cohort size mismatch");
  }
  std::vector<SurvivalSample> out;
  for (std::size_t i = 0; i < cohort.timelines.size(); ++i) {
    auto s = survival_sample_for(cohort.timelines[i], states[i], axis, kind,
                                 cutoff, rules);
    if (s) out.push_back(std::move(*s));
  }
  if (out.empty()) {
    throw DomainError("no survival samples (empty cohort for this kind)");
  }
  return out;
}

std::string stratum_of(const StateTimeline& st, Date as_of) {
  if (st.ever_purchase_resurrected_asof(as_of)) return "purchase_resurrected";
  if (st.ever_resurrected_asof(as_of)) return "resurrected";
  if (st.ever_zombie_asof(as_of)) return "zombie";
  return "normal";
}

std::map<std::string, StratumCurve> km_stratified(
    const Cohort& cohort, const std::vector<StateTimeline>& states,
    SurvivalAxis axis, GapKind kind, Date cutoff, const ProfilingRules& rules,
    std::size_t min_stratum_size) {
  auto samples = to_survival_samples(cohort, states, axis, kind, cutoff, rules);
  std::map<std::string, const StateTimeline*> by_id;
  for (const auto& st : states) by_id[st.player_id] = &st;

  std::map<std::string, std::vector<SurvivalSample>> grouped;
  for (auto& s : samples) {
    grouped[stratum_of(*by_id.at(s.player_id), cutoff)].push_back(s);
  }
  std::map<std::string, StratumCurve> out;
  for (auto& [name, group] : grouped) {
    StratumCurve sc;
    sc.n_samples = group.size();
    sc.low_confidence = group.size() < min_stratum_size;
    sc.curve = kaplan_meier(group);
    out.emplace(name, std::move(sc));
  }
  return out;
}

}  // namespace churnforge
