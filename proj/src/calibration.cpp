#include "churnforge/calibration.hpp"

#include <algorithm>
#include <cassert>

namespace churnforge {

RateResult false_churner_rate(const Cohort& cohort, int window, GapKind kind,
                              const FalseChurnerOptions& opts) {
  RateResult res;
  for (const auto& t : cohort.timelines) {
    bool churner = false;
    bool false_churner = false;
    for (const auto& g : activity_gaps(t, kind)) {
      if (g.length <= window) continue;
      bool counts_false =
          g.resolved &&
          !(opts.exclude_long_returns && g.length >= opts.long_return_days);
      churner = true;
      if (counts_false) false_churner = true;
    }
    if (churner) ++res.churners;
    if (false_churner) ++res.false_churners;
  }
  if (res.churners == 0) {
    res.no_churners = true;
    res.rate = 0.0;
    return res;
  }
  res.rate = static_cast<double>(res.false_churners) /
             static_cast<double>(res.churners);
  return res;
}

double missed_sales_rate(const Cohort& cohort, int window, GapKind kind) {
  std::int64_t total = 0;
  std::int64_t missed = 0;
  for (const auto& t : cohort.timelines) {
    for (const auto& r : t.records) total += r.spend_cents;

    // First qualifying return; spend from that day on counts once.
    Date first_return = 0;
    bool found = false;
    for (const auto& g : activity_gaps(t, kind)) {
      if (g.length > window && g.resolved) {
        first_return = g.end;
        found = true;
        break;
      }
    }
    if (!found) continue;
    for (const auto& r : t.records) {
      if (r.date >= first_return) missed += r.spend_cents;
    }
  }
  if (total == 0) throw DomainError("no revenue");
  return static_cast<double>(missed) / static_cast<double>(total);
}

CalibrationOutcome calibrate_window(const Cohort& cohort,
                                    const std::vector<int>& grid,
                                    double max_false, double max_missed,
                                    GapKind kind) {
  if (grid.empty()) throw DomainError("empty calibration grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw DomainError("calibration grid must be ascending");
  }

  CalibrationCurve curve;
  curve.kind = kind;
  std::optional<int> chosen;
  long prev_churners = -1, prev_false = -1;
  for (int w : grid) {
    RateResult fc = false_churner_rate(cohort, w, kind);
    double ms = missed_sales_rate(cohort, w, kind);
    curve.points.push_back({w, fc.rate, ms});

    // Count monotonicity: a gap > W is also > W' for every W' <= W.
    if (prev_churners >= 0) {
      assert(fc.churners <= prev_churners);
      assert(fc.false_churners <= prev_false);
    }
    prev_churners = fc.churners;
    prev_false = fc.false_churners;

    if (!chosen && fc.rate < max_false && ms < max_missed) chosen = w;
  }
  if (!chosen) {
    throw CalibrationError("no window satisfies the thresholds", curve);
  }
  return {*chosen, std::move(curve)};
}

std::vector<int> default_grid() {
  std::vector<int> g;
  for (int w = 3; w <= 90; ++w) g.push_back(w);
  return g;
}

std::pair<Date, Date> first_months_window(const Cohort& cohort, int months) {
  int y, m, d;
  civil_from_date(cohort.period_start, y, m, d);
  m += months;
  y += (m - 1) / 12;
  m = (m - 1) % 12 + 1;
  Date end = make_date(y, m, d) - 1;
  return {cohort.period_start, std::min(end, cohort.period_end)};
}

double calibration_drift(const Cohort& cohort, int window, GapKind kind,
                         const std::vector<std::pair<Date, Date>>& ranges) {
  double worst = 0.0;
  for (const auto& [start, end] : ranges) {
    Cohort sub = restrict_cohort(cohort, start, end);
    if (sub.timelines.empty()) continue;
    worst = std::max(worst, false_churner_rate(sub, window, kind).rate);
  }
  return worst;
}

}  // namespace churnforge
