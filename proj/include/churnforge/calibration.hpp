#pragma once

#include <optional>
#include <vector>

#include "churnforge/errors.hpp"
#include "churnforge/event_model.hpp"

namespace churnforge {

struct ChurnDefinition {
  int login_window = 9;
  int purchase_window = 50;
  double max_false_churner = 0.05;
  double max_missed_sales = 0.01;
  Date calibration_start = 0;
  Date calibration_end = 0;
};

struct CalibrationPoint {
  int window = 0;
  double false_churner_pct = 0.0;
  double missed_sales_pct = 0.0;
};

struct CalibrationCurve {
  GapKind kind = GapKind::login;
  std::vector<CalibrationPoint> points;  // windows strictly increasing
};

struct RateResult {
  double rate = 0.0;
  bool no_churners = false;
  // Diagnostic counts behind the ratio.
  long churners = 0;
  long false_churners = 0;
};

struct FalseChurnerOptions {
  // Open Question variant: when true, resolved gaps of at least
  // `long_return_days` (resurrections) do not count as false churners.
  bool exclude_long_returns = false;
  int long_return_days = 30;
};

// Fraction of churners (any gap > window) who ever return within the
// observed period. The caller restricts the cohort to the calibration range.
RateResult false_churner_rate(const Cohort& cohort, int window, GapKind kind,
                              const FalseChurnerOptions& opts = {});

// Spend from the first qualifying return of each false churner onward, over
// total cohort spend.
double missed_sales_rate(const Cohort& cohort, int window, GapKind kind);

struct CalibrationOutcome {
  int window = 0;
  CalibrationCurve curve;
};

class CalibrationError : public DomainError {
 public:
  CalibrationError(const std::string& msg, CalibrationCurve curve)
      : DomainError(msg), curve(std::move(curve)) {}
  CalibrationCurve curve;
};

// Smallest grid window keeping both rates strictly under their thresholds.
// Throws CalibrationError (carrying the full curve) when none qualifies.
// Asserts the count-monotonicity invariants across the grid.
CalibrationOutcome calibrate_window(const Cohort& cohort,
                                    const std::vector<int>& grid,
                                    double max_false, double max_missed,
                                    GapKind kind);

std::vector<int> default_grid();  // 3..90

// First two calendar months of the cohort, the default calibration range.
std::pair<Date, Date> first_months_window(const Cohort& cohort, int months);

// Recomputes the false-churner rate on progressively longer windows and
// returns the max observed rate (drift check; warn when above 0.10).
double calibration_drift(const Cohort& cohort, int window, GapKind kind,
                         const std::vector<std::pair<Date, Date>>& ranges);

}  // namespace churnforge
