#include "churnforge/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "churnforge/errors.hpp"
#include "churnforge/io.hpp"
#include "json.hpp"

namespace churnforge {

void TrainingSet::validate() const {
  if (columns.empty() || columns.front().empty()) {
    throw DomainError("empty training set");
  }
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw DomainError("ragged training columns");
  }
  if (feature_names.size() != columns.size()) {
    throw DomainError("feature name count mismatch");
  }
  if (type == ResponseType::binary) {
    if (labels.size() != n) throw DomainError("label count mismatch");
  } else {
    if (times.size() != n || events.size() != n) {
      throw DomainError("survival response count mismatch");
    }
  }
}

std::vector<double> logrank_scores(const std::vector<double>& times,
                                   const std::vector<bool>& events) {
  if (times.empty()) throw DomainError("logrank_scores: no samples");
  std::vector<SurvivalSample> samples(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    samples[i].time = times[i];
    samples[i].event = events[i];
  }
  StepFunction hazard = nelson_aalen(samples);
  std::vector<double> scores(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    scores[i] = (events[i] ? 1.0 : 0.0) - hazard.at(times[i]);
  }
  return scores;
}

NodeTestResult node_test(const std::vector<double>& x,
                         const std::vector<double>& h, int exact_threshold) {
  const std::size_t n = x.size();
  if (n != h.size() || n < 2) throw DomainError("node_test: bad inputs");

  double xbar = 0, hbar = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i];
    hbar += h[i];
  }
  xbar /= static_cast<double>(n);
  hbar /= static_cast<double>(n);

  double sxx = 0, shh = 0, t_obs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    shh += (h[i] - hbar) * (h[i] - hbar);
    t_obs += x[i] * h[i];
  }

  NodeTestResult res;
  const double mu = static_cast<double>(n) * xbar * hbar;
  const double var = sxx * shh / static_cast<double>(n - 1);
  if (var <= 1e-24) {
    // Constant covariate or constant scores: no information, never split.
    res.p_value = 1.0;
    return res;
  }
  res.statistic = std::fabs(t_obs - mu) / std::sqrt(var);

  if (static_cast<int>(n) <= exact_threshold) {
    // Exact conditional p-value over all permutations of h against x.
    // next_permutation over the sorted multiset enumerates each distinct
    // arrangement once, each of which is equally likely.
    std::vector<double> perm(h);
    std::sort(perm.begin(), perm.end());
    const double target = std::fabs(t_obs - mu) - 1e-12;
    long total = 0, extreme = 0;
    do {
      double t = 0;
      for (std::size_t i = 0; i < n; ++i) t += x[i] * perm[i];
      ++total;
      if (std::fabs(t - mu) >= target) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    res.exact = true;
  } else {
    res.p_value = std::erfc(res.statistic / std::sqrt(2.0));
  }
  return res;
}

namespace {

// Standardized two-sample statistic for the indicator split x <= cut.
double cut_statistic(const std::vector<double>& xs,
                     const std::vector<double>& hs, double cut, double hbar,
                     double shh) {
  const std::size_t n = xs.size();
  double t = 0;
  double n_left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] <= cut) {
      t += hs[i];
      n_left += 1;
    }
  }
  const double n_right = static_cast<double>(n) - n_left;
  if (n_left == 0 || n_right == 0) return -1.0;
  const double mu = n_left * hbar;
  const double var =
      n_left * n_right * shh /
      (static_cast<double>(n) * static_cast<double>(n - 1));
  if (var <= 1e-24) return -1.0;
  return std::fabs(t - mu) / std::sqrt(var);
}

struct NodeScratch {
  std::vector<double> xs;
  std::vector<double> hs;
  std::vector<double> node_times;
  std::vector<bool> node_events;
};

int fit_node(const TrainingSet& data, const TreeParams& params, Rng& rng,
             std::vector<int> rows, std::vector<TreeNode>& nodes,
             NodeScratch& scratch) {
  const int node_id = static_cast<int>(nodes.size());
  nodes.emplace_back();

  auto make_leaf = [&]() {
    nodes[node_id].members = std::move(rows);
    return node_id;
  };

  const std::size_t n = rows.size();
  if (static_cast<int>(n) < params.min_node || n < 2) return make_leaf();

  // Per-node response scores: identity for binary labels, log-rank scores
  // recomputed over the node's own samples for survival.
  std::vector<double> h(n);
  if (data.type == ResponseType::binary) {
    for (std::size_t i = 0; i < n; ++i) h[i] = data.labels[rows[i]];
  } else {
    scratch.node_times.resize(n);
    scratch.node_events.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scratch.node_times[i] = data.times[rows[i]];
      scratch.node_events[i] = data.events[rows[i]];
    }
    h = logrank_scores(scratch.node_times, scratch.node_events);
  }

  // Draw mtry candidate features without replacement.
  const std::size_t p = data.n_features();
  int mtry = params.mtry > 0
                 ? params.mtry
                 : static_cast<int>(std::ceil(std::sqrt(
                       static_cast<double>(p))));
  mtry = std::min<int>(mtry, static_cast<int>(p));
  std::vector<std::size_t> candidates(p);
  std::iota(candidates.begin(), candidates.end(), 0);
  for (int i = 0; i < mtry; ++i) {
    std::size_t j = i + rng.uniform_index(p - static_cast<std::size_t>(i));
    std::swap(candidates[static_cast<std::size_t>(i)], candidates[j]);
  }
  candidates.resize(static_cast<std::size_t>(mtry));
  std::sort(candidates.begin(), candidates.end());  // deterministic tie order

  double best_p = 2.0;
  std::size_t best_feature = 0;
  for (std::size_t f : candidates) {
    scratch.xs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scratch.xs[i] = data.columns[f][rows[i]];
    }
    NodeTestResult t = node_test(scratch.xs, h, params.exact_threshold);
    if (t.p_value < best_p) {
      best_p = t.p_value;
      best_feature = f;
    }
  }
  const double adjusted = std::min(1.0, static_cast<double>(mtry) * best_p);
  if (adjusted > params.alpha) return make_leaf();

  // Best cut: maximize the standardized two-sample statistic over midpoints
  // of adjacent distinct values.
  std::vector<double>& xs = scratch.xs;
  xs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = data.columns[best_feature][rows[i]];
  }
  std::vector<double> distinct(xs);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  if (distinct.size() < 2) return make_leaf();

  double hbar = 0;
  for (double v : h) hbar += v;
  hbar /= static_cast<double>(n);
  double shh = 0;
  for (double v : h) shh += (v - hbar) * (v - hbar);

  double best_stat = -1.0;
  double best_cut = 0.0;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double cut = 0.5 * (distinct[i] + distinct[i + 1]);
    const double stat = cut_statistic(xs, h, cut, hbar, shh);
    if (stat > best_stat + 1e-12) {
      best_stat = stat;
      best_cut = cut;
    }
  }
  if (best_stat < 0) return make_leaf();

  std::vector<int> left_rows, right_rows;
  for (std::size_t i = 0; i < n; ++i) {
    (xs[i] <= best_cut ? left_rows : right_rows).push_back(rows[i]);
  }
  if (left_rows.empty() || right_rows.empty()) return make_leaf();

  nodes[node_id].feature = static_cast<int>(best_feature);
  nodes[node_id].cut = best_cut;
  const int left = fit_node(data, params, rng, std::move(left_rows), nodes,
                            scratch);
  nodes[node_id].left = left;
  const int right = fit_node(data, params, rng, std::move(right_rows), nodes,
                             scratch);
  nodes[node_id].right = right;
  return node_id;
}

}  // namespace

const TreeNode& Tree::leaf_for(const std::vector<double>& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
    i = (x[static_cast<std::size_t>(nd.feature)] <= nd.cut) ? nd.left
                                                            : nd.right;
  }
  return nodes[static_cast<std::size_t>(i)];
}

Tree fit_ctree(const TrainingSet& data, const TreeParams& params, Rng& rng,
               std::vector<int> rows) {
  data.validate();
  if (rows.empty()) throw DomainError("fit_ctree: no rows");
  Tree tree;
  tree.subsample = rows;
  NodeScratch scratch;
  fit_node(data, params, rng, std::move(rows), tree.nodes, scratch);
  return tree;
}

Forest fit_forest(const TrainingSet& data, const ForestParams& params,
                  std::uint64_t seed, int n_workers) {
  data.validate();
  if (params.ensemble_size < 1) throw DomainError("ensemble_size must be >= 1");
  const std::size_t n = data.n_rows();
  const std::size_t subsample_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(params.subsample_fraction *
                                  static_cast<double>(n)));
  if (subsample_size < static_cast<std::size_t>(params.tree.min_node)) {
    throw DomainError("subsample smaller than min_node");
  }

  Forest forest;
  forest.params = params;
  forest.seed = seed;
  forest.type = data.type;
  forest.feature_names = data.feature_names;
  forest.exclusion_tag = data.exclusion_tag;
  forest.train_labels = data.labels;
  forest.train_times = data.times;
  forest.train_events = data.events;
  forest.trees.resize(static_cast<std::size_t>(params.ensemble_size));

  auto fit_one = [&](int t) {
    // Every tree has its own derived stream, so results are identical for
    // any worker count.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < subsample_size; ++i) {
      std::size_t j = i + rng.uniform_index(n - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> rows(pool.begin(),
                          pool.begin() + static_cast<long>(subsample_size));
    std::sort(rows.begin(), rows.end());
    forest.trees[static_cast<std::size_t>(t)] =
        fit_ctree(data, params.tree, rng, std::move(rows));
  };

  if (n_workers <= 1 || params.ensemble_size == 1) {
    for (int t = 0; t < params.ensemble_size; ++t) fit_one(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(n_workers, params.ensemble_size);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int t = next.fetch_add(1); t < params.ensemble_size;
             t = next.fetch_add(1)) {
          fit_one(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return forest;
}

std::vector<double> forest_weights(const Forest& forest,
                                   const std::vector<double>& x) {
  const std::size_t n = forest.type == ResponseType::binary
                            ? forest.train_labels.size()
                            : forest.train_times.size();
  std::vector<double> w(n, 0.0);
  for (const auto& tree : forest.trees) {
    const TreeNode& leaf = tree.leaf_for(x);
    const double share = 1.0 / static_cast<double>(leaf.members.size());
    for (int i : leaf.members) w[static_cast<std::size_t>(i)] += share;
  }
  return w;
}

std::vector<double> predict_survival(const Forest& forest,
                                     const std::vector<double>& x,
                                     const std::vector<double>& grid) {
  if (forest.type != ResponseType::survival) {
    throw DomainError("predict_survival on a binary forest");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw DomainError("prediction grid must be ascending");
  }
  std::vector<double> w = forest_weights(forest, x);
  SurvivalCurve km =
      kaplan_meier_weighted(forest.train_times, forest.train_events, w);
  // Merge walk over the step function and the ascending grid.
  std::vector<double> out(grid.size());
  std::size_t k = 0;
  double s = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (k < km.points.size() && km.points[k].t <= grid[i]) {
      s = km.points[k].s;
      ++k;
    }
    out[i] = s;
  }
  return out;
}

double predict_probability(const Forest& forest,
                           const std::vector<double>& x) {
  if (forest.type != ResponseType::binary) {
    throw DomainError("predict_probability on a survival forest");
  }
  std::vector<double> w = forest_weights(forest, x);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * forest.train_labels[i];
    den += w[i];
  }
  return den > 0 ? num / den : 0.0;
}

namespace {

nlohmann::json tree_to_json(const Tree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& nd : tree.nodes) {
    nodes.push_back({{"f", nd.feature},
                     {"cut", nd.cut},
                     {"l", nd.left},
                     {"r", nd.right},
                     {"m", nd.members}});
  }
  return {{"nodes", std::move(nodes)}, {"subsample", tree.subsample}};
}

Tree tree_from_json(const nlohmann::json& j) {
  Tree tree;
  for (const auto& nj : j.at("nodes")) {
    TreeNode nd;
    nd.feature = nj.at("f");
    nd.cut = nj.at("cut");
    nd.left = nj.at("l");
    nd.right = nj.at("r");
    nd.members = nj.at("m").get<std::vector<int>>();
    tree.nodes.push_back(std::move(nd));
  }
  tree.subsample = j.at("subsample").get<std::vector<int>>();
  return tree;
}

}  // namespace

void save_forest(const Forest& forest, const std::string& path) {
  nlohmann::json j = {
      {"format", "churnforge-forest"},
      {"version", 1},
      {"seed", forest.seed},
      {"type", forest.type == ResponseType::binary ? "binary" : "survival"},
      {"exclusion_tag", forest.exclusion_tag},
      {"params",
       {{"ensemble_size", forest.params.ensemble_size},
        {"subsample_fraction", forest.params.subsample_fraction},
        {"alpha", forest.params.tree.alpha},
        {"mtry", forest.params.tree.mtry},
        {"min_node", forest.params.tree.min_node},
        {"exact_threshold", forest.params.tree.exact_threshold}}},
      {"feature_names", forest.feature_names},
      {"train_labels", forest.train_labels},
      {"train_times", forest.train_times},
      {"train_events", std::vector<int>(forest.train_events.begin(),
                                        forest.train_events.end())},
  };
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  write_file(path, j.dump());
}

Forest load_forest(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  if (j.value("format", "") != "churnforge-forest") {
    throw DomainError("not a churnforge model file: " + path);
  }
  Forest forest;
  forest.seed = j.at("seed");
  forest.type = j.at("type") == "binary" ? ResponseType::binary
                                         : ResponseType::survival;
  forest.exclusion_tag = j.value("exclusion_tag", "");
  const auto& p = j.at("params");
  forest.params.ensemble_size = p.at("ensemble_size");
  forest.params.subsample_fraction = p.at("subsample_fraction");
  forest.params.tree.alpha = p.at("alpha");
  forest.params.tree.mtry = p.at("mtry");
  forest.params.tree.min_node = p.at("min_node");
  forest.params.tree.exact_threshold = p.at("exact_threshold");
  forest.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  forest.train_labels = j.at("train_labels").get<std::vector<double>>();
  forest.train_times = j.at("train_times").get<std::vector<double>>();
  for (int e : j.at("train_events").get<std::vector<int>>()) {
    forest.train_events.push_back(e != 0);
  }
  for (const auto& tj : j.at("trees")) {
    forest.trees.push_back(tree_from_json(tj));
  }
  return forest;
}

}  // namespace churnforge
