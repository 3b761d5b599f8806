#pragma once

#include <map>
#include <string>
#include <vector>

#include "churnforge/event_model.hpp"
#include "churnforge/profiling.hpp"

namespace churnforge {

// Right-continuous step function with a starting value at t = -inf.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(double initial, std::vector<std::pair<double, double>> steps)
      : initial_(initial), steps_(std::move(steps)) {}

  // Value at t (right-continuous: the step at t has already happened).
  double at(double t) const;
  // Left limit: value just before t.
  double before(double t) const;
  const std::vector<std::pair<double, double>>& steps() const {
    return steps_;
  }
  double initial() const { return initial_; }

 private:
  double initial_ = 0.0;
  std::vector<std::pair<double, double>> steps_;  // ascending t
};

enum class SurvivalAxis { lifetime_days, level, playtime_hours };

const char* axis_name(SurvivalAxis a);
SurvivalAxis parse_axis(const std::string& s);

struct SurvivalSample {
  std::string player_id;
  double time = 0.0;
  bool event = false;
};

struct CurvePoint {
  double t = 0.0;
  double s = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double n_at_risk = 0.0;
  double n_events = 0.0;
};

struct SurvivalCurve {
  std::vector<CurvePoint> points;  // first point is (0, 1)
  double at(double t) const;       // S(t), right-continuous
};

// Product-limit estimator with Greenwood variance and log-log 95% CI.
// Ties between events and censorings at the same time: events first.
SurvivalCurve kaplan_meier(const std::vector<SurvivalSample>& samples);

// Weighted variant used by forest aggregation; CI fields carry S itself.
SurvivalCurve kaplan_meier_weighted(const std::vector<double>& times,
                                    const std::vector<bool>& events,
                                    const std::vector<double>& weights);

// Cumulative hazard: sum of d_i / n_i over event times <= t.
StepFunction nelson_aalen(const std::vector<SurvivalSample>& samples);

// Shared (d_i, n_i) table so KM and Nelson-Aalen provably agree on inputs.
struct RiskTableRow {
  double t;
  double events;
  double at_risk;
};
std::vector<RiskTableRow> risk_table(const std::vector<SurvivalSample>& s);

// Time-to-first-churn for one player on the chosen axis; censored at cutoff.
// Annulled (genuine-false) episodes are skipped. Empty result when the
// player is out of scope (joined after cutoff, or purchase kind with no
// purchase by cutoff).
std::optional<SurvivalSample> survival_sample_for(const PlayerTimeline& t,
                                                  const StateTimeline& st,
                                                  SurvivalAxis axis,
                                                  GapKind kind, Date cutoff,
                                                  const ProfilingRules& rules);

// Cohort-wide collection of the above; throws when empty.
std::vector<SurvivalSample> to_survival_samples(
    const Cohort& cohort, const std::vector<StateTimeline>& states,
    SurvivalAxis axis, GapKind kind, Date cutoff, const ProfilingRules& rules);

struct StratumCurve {
  SurvivalCurve curve;
  std::size_t n_samples = 0;
  bool low_confidence = false;
};

// One curve per non-empty stratum; stratum priority:
// purchase_resurrected > resurrected > zombie > normal.
std::map<std::string, StratumCurve> km_stratified(
    const Cohort& cohort, const std::vector<StateTimeline>& states,
    SurvivalAxis axis, GapKind kind, Date cutoff, const ProfilingRules& rules,
    std::size_t min_stratum_size = 10);

std::string stratum_of(const StateTimeline& st, Date as_of);

}  // namespace churnforge
