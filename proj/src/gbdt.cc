// Copyright 2026 The admitaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "admitaudit/gbdt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include "admitaudit/error.h"
#include "json.hpp"

namespace admitaudit {

std::string_view to_string(TargetDefinition target) {
  return target == TargetDefinition::kAdmitted ? "admitted" : "admitted_or_waitlisted";
}

TargetDefinition parse_target(std::string_view text) {
  if (text == "admitted") return TargetDefinition::kAdmitted;
  if (text == "admitted_or_waitlisted") return TargetDefinition::kAdmittedOrWaitlisted;
  throw ValidationError("target", "unknown target definition '" + std::string(text) + "'");
}

std::vector<std::uint8_t> training_labels(std::span<const ApplicantRecord> records,
                                          TargetDefinition target) {
  std::vector<std::uint8_t> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    const bool positive = target == TargetDefinition::kAdmitted
                              ? r.outcome == Outcome::kAdmitted
                              : r.admitted_or_waitlisted();
    labels.push_back(positive ? 1 : 0);
  }
  return labels;
}

void GbdtConfig::validate() const {
  if (n_trees < 0) throw ValidationError("n_trees", "must be >= 0");
  if (max_depth < 1) throw ValidationError("max_depth", "must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ValidationError("learning_rate", "must lie in (0, 1]");
  }
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf", "must be >= 1");
  if (n_bins < 2 || n_bins > 256) throw ValidationError("n_bins", "must lie in [2, 256]");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ValidationError("l2", "must be finite and >= 0");
}

namespace logistic {

double sigmoid(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double loss(double margin, double label) {
  const double softplus =
      margin > 0.0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - label * margin;
}

double gradient(double margin, double label) { return sigmoid(margin) - label; }

double hessian(double margin) {
  const double p = sigmoid(margin);
  return p * (1.0 - p);
}

}  // namespace logistic

double RegressionTree::predict(std::span<const double> row) const {
  int idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    idx = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(idx)].value;
}

std::vector<double> compute_bin_edges(std::span<const double> column_values, int n_bins) {
  std::vector<double> sorted(column_values.begin(), column_values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> edges;
  if (distinct.size() <= 1) return edges;
  if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
    edges.assign(distinct.begin(), distinct.end() - 1);
    return edges;
  }
  const std::size_t n = sorted.size();
  for (int b = 1; b < n_bins; ++b) {
    const std::size_t pos = static_cast<std::size_t>(b) * n / static_cast<std::size_t>(n_bins);
    const double edge = sorted[pos == 0 ? 0 : pos - 1];
    if (edge >= distinct.back()) break;
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return edges;
}

namespace {

// Gradient statistics are accumulated as integers scaled by 2^40 so that sums
// are exact and independent of summation order.
constexpr double kFixedScale = 1099511627776.0;
constexpr double kMinGain = 1e-12;
constexpr double kProbabilityFloor = 1e-15;

std::int64_t to_fixed(double v) { return std::llround(v * kFixedScale); }
double from_fixed(std::int64_t v) { return static_cast<double>(v) / kFixedScale; }

struct HistBin {
  std::int64_t g = 0;
  std::int64_t h = 0;
  std::int64_t n = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::uint8_t>& bins, std::size_t n_cols,
              const std::vector<std::size_t>& offsets, const std::vector<std::size_t>& widths,
              const std::vector<std::vector<double>>& edges, const GbdtConfig& config,
              int workers)
      : bins_(bins),
        n_cols_(n_cols),
        offsets_(offsets),
        widths_(widths),
        edges_(edges),
        config_(config),
        workers_(std::max(workers, 1)),
        total_bins_(offsets.empty() ? 0 : offsets.back() + widths.back()) {}

  // Grows one tree over all rows; writes each row's leaf value to row_value.
  RegressionTree grow(std::span<const std::int64_t> g, std::span<const std::int64_t> h,
                      std::vector<double>& row_value) {
    g_ = g;
    h_ = h;
    row_value_ = &row_value;
    tree_ = RegressionTree{};
    const std::size_t n = g.size();
    rows_.resize(n);
    for (std::size_t i = 0; i < n; ++i) rows_[i] = static_cast<std::uint32_t>(i);
    std::int64_t total_g = 0, total_h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total_g += g[i];
      total_h += h[i];
    }
    auto hist = std::make_unique<std::vector<HistBin>>(total_bins_);
    build_histogram(0, n, *hist);
    grow_node(0, n, 0, std::move(hist), total_g, total_h);
    return std::move(tree_);
  }

 private:
  struct Split {
    double gain = kMinGain;
    int column = -1;
    std::size_t bin = 0;
    std::int64_t left_g = 0, left_h = 0, left_n = 0;
  };

  void build_histogram(std::size_t begin, std::size_t end, std::vector<HistBin>& hist) const {
    std::fill(hist.begin(), hist.end(), HistBin{});
    auto accumulate = [&](std::size_t c0, std::size_t c1) {
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t r = rows_[i];
        const std::uint8_t* row_bins = bins_.data() + static_cast<std::size_t>(r) * n_cols_;
        const std::int64_t gr = g_[r], hr = h_[r];
        for (std::size_t c = c0; c < c1; ++c) {
          HistBin& b = hist[offsets_[c] + row_bins[c]];
          b.g += gr;
          b.h += hr;
          ++b.n;
        }
      }
    };
    const std::size_t work = (end - begin) * n_cols_;
    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers_), n_cols_);
    if (threads <= 1 || work < 200000) {
      accumulate(0, n_cols_);
      return;
    }
    // Each thread owns a disjoint column block, so there are no shared writes.
    std::vector<std::thread> pool;
    const std::size_t block = (n_cols_ + threads - 1) / threads;
    for (std::size_t t = 1; t < threads; ++t) {
      const std::size_t c0 = t * block, c1 = std::min(n_cols_, c0 + block);
      if (c0 < c1) pool.emplace_back(accumulate, c0, c1);
    }
    accumulate(0, std::min(n_cols_, block));
    for (auto& th : pool) th.join();
  }

  double node_score(std::int64_t g, std::int64_t h) const {
    const double gd = from_fixed(g);
    return gd * gd / (from_fixed(h) + config_.l2);
  }

  Split find_split(const std::vector<HistBin>& hist, std::int64_t g, std::int64_t h,
                   std::int64_t n) const {
    Split best;
    const double parent = node_score(g, h);
    const auto min_leaf = static_cast<std::int64_t>(config_.min_samples_leaf);
    for (std::size_t c = 0; c < n_cols_; ++c) {
      const std::size_t width = widths_[c];
      if (width < 2) continue;
      std::int64_t lg = 0, lh = 0, ln = 0;
      for (std::size_t b = 0; b + 1 < width; ++b) {
        const HistBin& bin = hist[offsets_[c] + b];
        lg += bin.g;
        lh += bin.h;
        ln += bin.n;
        if (ln < min_leaf) continue;
        if (n - ln < min_leaf) break;
        const double gain = node_score(lg, lh) + node_score(g - lg, h - lh) - parent;
        if (gain > best.gain) {
          best = Split{gain, static_cast<int>(c), b, lg, lh, ln};
        }
      }
    }
    return best;
  }

  int make_leaf(std::size_t begin, std::size_t end, std::int64_t g, std::int64_t h) {
    TreeNode leaf;
    leaf.value = -from_fixed(g) / (from_fixed(h) + config_.l2);
    for (std::size_t i = begin; i < end; ++i) (*row_value_)[rows_[i]] = leaf.value;
    tree_.nodes.push_back(leaf);
    return static_cast<int>(tree_.nodes.size() - 1);
  }

  int grow_node(std::size_t begin, std::size_t end, int depth,
                std::unique_ptr<std::vector<HistBin>> hist, std::int64_t g, std::int64_t h) {
    const auto n = static_cast<std::int64_t>(end - begin);
    if (depth >= config_.max_depth || n < 2 * config_.min_samples_leaf) {
      return make_leaf(begin, end, g, h);
    }
    const Split split = find_split(*hist, g, h, n);
    if (split.column < 0) return make_leaf(begin, end, g, h);

    const auto c = static_cast<std::size_t>(split.column);
    const auto middle = static_cast<std::size_t>(
        std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                       rows_.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::uint32_t r) {
                         return bins_[static_cast<std::size_t>(r) * n_cols_ + c] <= split.bin;
                       }) -
        rows_.begin());

    // Build the smaller child's histogram and derive the sibling by subtraction.
    auto small = std::make_unique<std::vector<HistBin>>(total_bins_);
    const bool left_smaller = middle - begin <= end - middle;
    if (left_smaller) {
      build_histogram(begin, middle, *small);
    } else {
      build_histogram(middle, end, *small);
    }
    for (std::size_t i = 0; i < total_bins_; ++i) {
      (*hist)[i].g -= (*small)[i].g;
      (*hist)[i].h -= (*small)[i].h;
      (*hist)[i].n -= (*small)[i].n;
    }
    auto left_hist = left_smaller ? std::move(small) : std::move(hist);
    auto right_hist = left_smaller ? std::move(hist) : std::move(small);

    const int idx = static_cast<int>(tree_.nodes.size());
    TreeNode node;
    node.feature = split.column;
    node.threshold = edges_[c][split.bin];
    tree_.nodes.push_back(node);
    const int left = grow_node(begin, middle, depth + 1, std::move(left_hist), split.left_g,
                               split.left_h);
    const int right = grow_node(middle, end, depth + 1, std::move(right_hist),
                                g - split.left_g, h - split.left_h);
    tree_.nodes[static_cast<std::size_t>(idx)].left = left;
    tree_.nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }

  const std::vector<std::uint8_t>& bins_;
  std::size_t n_cols_;
  const std::vector<std::size_t>& offsets_;
  const std::vector<std::size_t>& widths_;
  const std::vector<std::vector<double>>& edges_;
  const GbdtConfig& config_;
  int workers_;
  std::size_t total_bins_;

  std::span<const std::int64_t> g_, h_;
  std::vector<double>* row_value_ = nullptr;
  std::vector<std::uint32_t> rows_;
  RegressionTree tree_;
};

double mean_loss(std::span<const double> margins, std::span<const std::uint8_t> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    total += logistic::loss(margins[i], labels[i]);
  }
  return total / static_cast<double>(margins.size());
}

}  // namespace

TrainedModel train(const DesignMatrix& matrix, std::span<const std::uint8_t> labels,
                   const GbdtConfig& config, TargetDefinition target, int workers,
                   TrainingTrace* trace) {
  config.validate();
  const std::size_t n = matrix.rows();
  const std::size_t p = matrix.cols();
  if (n < 2) throw Error("train: need at least 2 rows");
  if (labels.size() != n) throw Error("train: label count does not match matrix rows");
  if (matrix.values.size() != n * p) throw Error("train: matrix storage size mismatch");
  std::size_t positives = 0;
  for (auto y : labels) {
    if (y > 1) throw Error("train: labels must be 0 or 1");
    positives += y;
  }
  if (positives == 0 || positives == n) {
    throw Error("train: labels contain a single class");
  }
  for (std::size_t i = 0; i < matrix.values.size(); ++i) {
    if (std::isnan(matrix.values[i])) {
      throw Error("train: NaN at row " + std::to_string(i / p) + ", column '" +
                  matrix.columns[i % p].name + "'");
    }
  }

  TrainedModel model;
  model.config = config;
  model.target = target;
  model.columns = matrix.column_names();
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(rate / (1.0 - rate));

  // Bin every column once.
  model.bin_edges.resize(p);
  std::vector<std::size_t> offsets(p), widths(p);
  std::vector<std::uint8_t> bins(n * p);
  std::vector<double> column(n);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < n; ++r) column[r] = matrix.values[r * p + c];
    model.bin_edges[c] = compute_bin_edges(column, config.n_bins);
    const auto& edges = model.bin_edges[c];
    for (std::size_t r = 0; r < n; ++r) {
      bins[r * p + c] = static_cast<std::uint8_t>(
          std::lower_bound(edges.begin(), edges.end(), column[r]) - edges.begin());
    }
    offsets[c] = offset;
    widths[c] = edges.size() + 1;
    offset += widths[c];
  }

  std::vector<double> margins(n, model.base_score);
  std::vector<std::int64_t> g(n), h(n);
  std::vector<double> row_value(n, 0.0);
  if (trace) {
    trace->loss.clear();
    trace->loss.push_back(mean_loss(margins, labels));
  }
  TreeBuilder builder(bins, p, offsets, widths, model.bin_edges, config, workers);
  model.trees.reserve(static_cast<std::size_t>(config.n_trees));
  for (int t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = to_fixed(logistic::gradient(margins[i], labels[i]));
      h[i] = to_fixed(logistic::hessian(margins[i]));
    }
    model.trees.push_back(builder.grow(g, h, row_value));
    for (std::size_t i = 0; i < n; ++i) margins[i] += config.learning_rate * row_value[i];
    if (trace) trace->loss.push_back(mean_loss(margins, labels));
  }
  return model;
}

double TrainedModel::margin(std::span<const double> row) const {
  double m = base_score;
  for (const auto& tree : trees) m += config.learning_rate * tree.predict(row);
  return m;
}

std::vector<double> TrainedModel::predict_proba(const DesignMatrix& matrix) const {
  const std::size_t shared = std::min(columns.size(), matrix.columns.size());
  for (std::size_t c = 0; c < shared; ++c) {
    if (columns[c] != matrix.columns[c].name) {
      throw Error("predict_proba: column " + std::to_string(c) + " is '" +
                  matrix.columns[c].name + "', model expects '" + columns[c] + "'");
    }
  }
  if (columns.size() != matrix.columns.size()) {
    if (matrix.columns.size() > shared) {
      throw Error("predict_proba: unexpected column " + std::to_string(shared) + " '" +
                  matrix.columns[shared].name + "'");
    }
    throw Error("predict_proba: missing column " + std::to_string(shared) + " '" +
                columns[shared] + "'");
  }
  std::vector<double> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (double v : row) {
      if (std::isnan(v)) throw Error("predict_proba: NaN in row " + std::to_string(r));
    }
    out[r] = std::clamp(logistic::sigmoid(margin(row)), kProbabilityFloor,
                        1.0 - kProbabilityFloor);
  }
  return out;
}

namespace {
constexpr std::string_view kModelFormat = "admitaudit.gbdt";
constexpr int kModelVersion = 1;
}  // namespace

std::string TrainedModel::to_json() const {
  using nlohmann::json;
  json trees_json = json::array();
  for (const auto& tree : trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back(json::array({node.feature, node.threshold, node.left, node.right,
                                   node.value}));
    }
    trees_json.push_back(std::move(nodes));
  }
  json doc = {
      {"format", kModelFormat},
      {"version", kModelVersion},
      {"target", to_string(target)},
      {"base_score", base_score},
      {"config",
       {{"n_trees", config.n_trees},
        {"max_depth", config.max_depth},
        {"learning_rate", config.learning_rate},
        {"min_samples_leaf", config.min_samples_leaf},
        {"n_bins", config.n_bins},
        {"l2", config.l2},
        {"seed", config.seed}}},
      {"columns", columns},
      {"bin_edges", bin_edges},
      {"trees", std::move(trees_json)},
  };
  return doc.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
  using nlohmann::json;
  TrainedModel model;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw Error("model file has unexpected format tag");
    }
    if (doc.at("version").get<int>() != kModelVersion) {
      throw Error("unsupported model version " + doc.at("version").dump());
    }
    model.target = parse_target(doc.at("target").get<std::string>());
    model.base_score = doc.at("base_score").get<double>();
    const json& cfg = doc.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
    model.config.n_bins = cfg.at("n_bins").get<int>();
    model.config.l2 = cfg.at("l2").get<double>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.columns = doc.at("columns").get<std::vector<std::string>>();
    model.bin_edges = doc.at("bin_edges").get<std::vector<std::vector<double>>>();
    for (const auto& tree_json : doc.at("trees")) {
      RegressionTree tree;
      for (const auto& node_json : tree_json) {
        TreeNode node;
        node.feature = node_json.at(0).get<int>();
        node.threshold = node_json.at(1).get<double>();
        node.left = node_json.at(2).get<int>();
        node.right = node_json.at(3).get<int>();
        node.value = node_json.at(4).get<double>();
        tree.nodes.push_back(node);
      }
      model.trees.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
  return model;
}

}  // namespace admitaudit
