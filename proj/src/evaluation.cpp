#include "churnforge/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "churnforge/errors.hpp"

namespace churnforge {

StepFunction censoring_distribution(
    const std::vector<SurvivalSample>& samples) {
  if (samples.empty()) throw DomainError("censoring_distribution: no samples");
  std::vector<SurvivalSample> flipped(samples);
  for (auto& s : flipped) s.event = !s.event;
  SurvivalCurve km = kaplan_meier(flipped);
  std::vector<std::pair<double, double>> steps;
  for (std::size_t i = 1; i < km.points.size(); ++i) {
    steps.emplace_back(km.points[i].t, km.points[i].s);
  }
  return StepFunction(1.0, std::move(steps));
}

double brier_score_at(double t, const std::vector<double>& predicted,
                      const std::vector<SurvivalSample>& samples,
                      const StepFunction& censoring, long* dropped) {
  if (predicted.size() != samples.size() || samples.empty()) {
    throw DomainError("brier_score_at: size mismatch");
  }
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  long drop = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = predicted[i];
    const double ti = samples[i].time;
    if (ti <= t && samples[i].event) {
      const double g = censoring.before(ti);
      if (g <= 0.0) {
        ++drop;
        continue;
      }
      sum += s * s / g;
    } else if (ti > t) {
      const double g = censoring.at(t);
      if (g <= 0.0) {
        ++drop;
        continue;
      }
      sum += (1.0 - s) * (1.0 - s) / g;
    }
    // Censored at or before t: contributes 0.
  }
  if (dropped) *dropped += drop;
  return sum / n;
}

double integrated_brier(const std::vector<double>& grid,
                        const std::vector<double>& bs, double tau) {
  if (grid.size() != bs.size() || grid.size() < 2) {
    throw DomainError("integrated_brier: grid needs at least 2 points");
  }
  if (!(tau > 0.0)) throw DomainError("integrated_brier: tau must be > 0");
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double t0 = grid[i - 1], t1 = grid[i];
    if (t0 >= tau) break;
    double b0 = bs[i - 1], b1 = bs[i];
    if (t1 > tau) {
      // Linear interpolation onto the horizon.
      b1 = b0 + (b1 - b0) * (tau - t0) / (t1 - t0);
      t1 = tau;
    }
    area += 0.5 * (b0 + b1) * (t1 - t0);
  }
  return area / tau;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw DomainError("auc: size mismatch");
  }
  long pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg)++;
  if (pos == 0 || neg == 0) throw DomainError("auc: single-class labels");

  // Mann-Whitney via midranks.
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(pos) * (static_cast<double>(pos) + 1) /
                       2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double default_tau(const std::vector<SurvivalSample>& samples) {
  if (samples.empty()) throw DomainError("default_tau: no samples");
  std::vector<double> times;
  times.reserve(samples.size());
  for (const auto& s : samples) times.push_back(s.time);
  std::sort(times.begin(), times.end());
  const std::size_t k = static_cast<std::size_t>(
      0.95 * static_cast<double>(times.size() - 1));
  double tau = times[k];
  return tau > 0.0 ? tau : times.back();
}

std::vector<double> evaluation_grid(const std::vector<SurvivalSample>& samples,
                                    double tau) {
  std::vector<double> grid;
  grid.push_back(0.0);
  for (const auto& s : samples) {
    if (s.event && s.time > 0.0 && s.time <= tau) grid.push_back(s.time);
  }
  grid.push_back(tau);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2) throw DomainError("evaluation grid degenerate");
  return grid;
}

PredictionErrorCurve error_curves(
    const Forest& forest, const std::vector<std::vector<double>>& features,
    const std::vector<SurvivalSample>& samples,
    const std::vector<double>& grid) {
  if (features.size() != samples.size() || samples.empty()) {
    throw DomainError("error_curves: features/samples mismatch");
  }
  if (grid.size() < 2) throw DomainError("error_curves: degenerate grid");

  PredictionErrorCurve curve;
  curve.grid = grid;
  curve.tau = grid.back();

  StepFunction censoring = censoring_distribution(samples);

  // Model predictions per validation player, fixed player order.
  std::vector<std::vector<double>> pred(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    pred[i] = predict_survival(forest, features[i], grid);
  }

  // Pooled training KM baseline: the same curve for every player.
  std::vector<SurvivalSample> train(forest.train_times.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    train[i].time = forest.train_times[i];
    train[i].event = forest.train_events[i];
  }
  SurvivalCurve train_km = kaplan_meier(train);

  std::vector<double> col(samples.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    for (std::size_t i = 0; i < samples.size(); ++i) col[i] = pred[i][g];
    curve.bs.push_back(brier_score_at(t, col, samples, censoring));
    std::fill(col.begin(), col.end(), train_km.at(t));
    curve.baseline_km_bs.push_back(brier_score_at(t, col, samples, censoring));
    std::fill(col.begin(), col.end(), 0.5);
    curve.baseline_const_bs.push_back(
        brier_score_at(t, col, samples, censoring));
  }
  curve.ibs = integrated_brier(curve.grid, curve.bs, curve.tau);
  curve.baseline_km_ibs =
      integrated_brier(curve.grid, curve.baseline_km_bs, curve.tau);
  curve.baseline_const_ibs =
      integrated_brier(curve.grid, curve.baseline_const_bs, curve.tau);
  return curve;
}

}  // namespace churnforge
