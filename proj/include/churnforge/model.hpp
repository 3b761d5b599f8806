#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "churnforge/rng.hpp"
#include "churnforge/survival.hpp"

namespace churnforge {

enum class ResponseType { binary, survival };

// Column-major design matrix plus response. Rows are one-per-player
// snapshots; the response is either a 0/1 churn label or a censored
// survival time.
struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // [feature][row]
  ResponseType type = ResponseType::binary;
  std::vector<double> labels;  // binary responses
  std::vector<double> times;   // survival responses
  std::vector<bool> events;
  std::vector<std::string> row_ids;
  std::string exclusion_tag;

  std::size_t n_rows() const {
    return columns.empty() ? 0 : columns.front().size();
  }
  std::size_t n_features() const { return columns.size(); }
  void validate() const;
};

// Log-rank scores: event indicator minus Nelson-Aalen cumulative hazard at
// the observed time, computed over the given samples only.
std::vector<double> logrank_scores(const std::vector<double>& times,
                                   const std::vector<bool>& events);

struct NodeTestResult {
  double statistic = 0.0;  // |T - mu| / sigma
  double p_value = 1.0;
  bool exact = false;
};

// Permutation test of association between covariate x and scores h via the
// linear statistic T = sum x_i h_i, standardized by its conditional moments.
// Nodes of at most exact_threshold rows get the exact enumerated p-value.
NodeTestResult node_test(const std::vector<double>& x,
                         const std::vector<double>& h,
                         int exact_threshold = 8);

struct TreeParams {
  double alpha = 0.05;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  int min_node = 20;
  int exact_threshold = 8;
};

struct ForestParams {
  TreeParams tree;
  int ensemble_size = 1000;
  double subsample_fraction = 0.632;  // without replacement
};

struct TreeNode {
  int feature = -1;  // -1 = leaf
  double cut = 0.0;
  int left = -1;
  int right = -1;
  std::vector<int> members;  // training-row ids, leaves only
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> subsample;   // training-row ids this tree saw

  const TreeNode& leaf_for(const std::vector<double>& x) const;
};

struct Forest {
  ForestParams params;
  std::uint64_t seed = 0;
  ResponseType type = ResponseType::binary;
  std::vector<std::string> feature_names;
  std::string exclusion_tag;
  std::vector<Tree> trees;
  // Training responses retained for nearest-neighbor-weight aggregation.
  std::vector<double> train_labels;
  std::vector<double> train_times;
  std::vector<bool> train_events;
};

// One conditional inference tree over the given rows. `rng` drives the
// per-node candidate-feature draw.
Tree fit_ctree(const TrainingSet& data, const TreeParams& params, Rng& rng,
               std::vector<int> rows);

Forest fit_forest(const TrainingSet& data, const ForestParams& params,
                  std::uint64_t seed, int n_workers = 1);

// Nearest-neighbor forest weights for one query row: sum over trees of
// 1[train row shares the query's leaf] / leaf size.
std::vector<double> forest_weights(const Forest& forest,
                                   const std::vector<double>& x);

// Weighted Kaplan-Meier over the training samples, evaluated on `grid`.
std::vector<double> predict_survival(const Forest& forest,
                                     const std::vector<double>& x,
                                     const std::vector<double>& grid);

double predict_probability(const Forest& forest, const std::vector<double>& x);

void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace churnforge
