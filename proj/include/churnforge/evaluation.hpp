#pragma once

#include <string>
#include <vector>

#include "churnforge/model.hpp"
#include "churnforge/survival.hpp"

namespace churnforge {

// Kaplan-Meier of the censoring process (event indicator flipped).
StepFunction censoring_distribution(const std::vector<SurvivalSample>& samples);

// Censoring-adjusted (IPCW) Brier score at time t. `predicted` holds
// S(t | x_i) aligned with `samples`. Terms whose censoring weight
// vanishes are dropped; *dropped (optional) counts them.
double brier_score_at(double t, const std::vector<double>& predicted,
                      const std::vector<SurvivalSample>& samples,
                      const StepFunction& censoring, long* dropped = nullptr);

struct PredictionErrorCurve {
  std::vector<double> grid;
  std::vector<double> bs;
  double ibs = 0.0;
  double tau = 0.0;
  std::string kind;
  std::string axis;
  // Reference baselines on the same grid.
  std::vector<double> baseline_km_bs;
  std::vector<double> baseline_const_bs;
  double baseline_km_ibs = 0.0;
  double baseline_const_ibs = 0.0;
};

// Time-averaged Brier score over [0, tau] by trapezoidal integration.
double integrated_brier(const std::vector<double>& grid,
                        const std::vector<double>& bs, double tau);

// Rank-based AUC with half-credit for tied scores. Throws when only one
// class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Default integration horizon: 95th percentile of observed times.
double default_tau(const std::vector<SurvivalSample>& samples);

// Evaluation grid: event times up to tau, with 0 and tau included.
std::vector<double> evaluation_grid(const std::vector<SurvivalSample>& samples,
                                    double tau);

// Full error-curve evaluation of a survival forest on validation samples;
// feature rows are aligned with samples. Adds the pooled-training-KM and
// constant-0.5 baselines on the same grid.
PredictionErrorCurve error_curves(
    const Forest& forest, const std::vector<std::vector<double>>& features,
    const std::vector<SurvivalSample>& samples,
    const std::vector<double>& grid);

}  // namespace churnforge
