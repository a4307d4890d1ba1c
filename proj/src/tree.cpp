/*
 *
 * Copyright 2026 shedcep authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "shedcep/synthetic.hpp"
#include "shedcep/utility_model.hpp"

namespace shedcep {

void FeatureLayout::encode(const FeatureKey& key, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (key.type < type_count) out[key.type] = 1.0;
  for (std::size_t t = 0; t < type_count && t < key.freq.size(); ++t)
    out[type_count + t] = static_cast<double>(key.freq[t]);
  for (std::size_t a = 0; a < attribute_count && a < key.attrs.size(); ++a)
    out[2 * type_count + a] = static_cast<double>(key.attrs[a]);
}

std::vector<double> FeatureLayout::encode(const FeatureKey& key) const {
  std::vector<double> out(width());
  encode(key, out);
  return out;
}

TrainingSet make_training_set(std::span<const AggregatedObservation> groups, FeatureLayout layout) {
  TrainingSet set;
  set.layout = layout;
  set.x.resize(groups.size() * layout.width());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    if (g.O == 0) throw ConfigError("training set: group with O = 0");
    layout.encode(g.key, std::span<double>(set.x.data() + i * layout.width(), layout.width()));
    set.y.push_back(g.M / static_cast<double>(g.O));
    set.w.push_back(static_cast<double>(g.O));
  }
  return set;
}

namespace {

struct Sample {
  double value;
  double y;
  double w;
};

class TreeBuilder {
 public:
  // Positions 0..n-1 address `rows` and `weights` in parallel.
  TreeBuilder(const TrainingSet& data, std::span<const std::size_t> rows,
              std::span<const double> weights, TreeParams params, std::uint64_t seed)
      : data_(data), rows_(rows), weights_(weights), params_(params), rng_(seed) {}

  std::vector<TreeNode> run(std::vector<std::size_t> rows) {
    build(rows, 0);
    return std::move(nodes_);
  }

 private:
  int build(std::vector<std::size_t>& rows, int depth) {
    const int self = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sw = 0.0, swy = 0.0;
    double lo = data_.y[row_of(rows[0])], hi = lo;
    for (std::size_t r : rows) {
      const double y = data_.y[row_of(r)];
      const double w = weights_[r];
      sw += w;
      swy += w * y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    auto make_leaf = [&] {
      nodes_[self].value = lo == hi ? lo : std::clamp(swy / sw, lo, hi);
      return self;
    };
    if (lo == hi) return make_leaf();
    if (params_.max_depth > 0 && depth >= params_.max_depth) return make_leaf();
    if (static_cast<int>(rows.size()) < std::max(2, params_.min_samples_split)) return make_leaf();

    auto split = best_split(rows, candidate_features());
    if (!split) split = best_split(rows, all_features());
    if (!split) return make_leaf();

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (feature(r, split->feature) <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[self].feature = split->feature;
    nodes_[self].threshold = split->threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  struct Split {
    int feature;
    double threshold;
    double sse;
  };

  std::size_t row_of(std::size_t pos) const { return rows_[pos]; }
  double feature(std::size_t r, int f) const {
    return data_.x[row_of(r) * data_.layout.width() + static_cast<std::size_t>(f)];
  }

  std::vector<int> all_features() const {
    std::vector<int> f(data_.layout.width());
    std::iota(f.begin(), f.end(), 0);
    return f;
  }

  std::vector<int> candidate_features() {
    auto f = all_features();
    const int d = static_cast<int>(f.size());
    if (params_.max_features <= 0 || params_.max_features >= d) return f;
    for (int i = 0; i < params_.max_features; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(f[i], f[pick(rng_)]);
    }
    f.resize(params_.max_features);
    std::sort(f.begin(), f.end());
    return f;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& rows, const std::vector<int>& features) {
    std::optional<Split> best;
    std::vector<Sample> samples(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        samples[i] = {feature(rows[i], f), data_.y[row_of(rows[i])], weights_[rows[i]]};
      std::stable_sort(samples.begin(), samples.end(),
                       [](const Sample& a, const Sample& b) { return a.value < b.value; });
      if (samples.front().value == samples.back().value) continue;
      double tw = 0.0, twy = 0.0, twyy = 0.0;
      for (const auto& s : samples) {
        tw += s.w;
        twy += s.w * s.y;
        twyy += s.w * s.y * s.y;
      }
      double lw = 0.0, lwy = 0.0, lwyy = 0.0;
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        lw += samples[i].w;
        lwy += samples[i].w * samples[i].y;
        lwyy += samples[i].w * samples[i].y * samples[i].y;
        if (samples[i].value == samples[i + 1].value) continue;
        const double rw = tw - lw, rwy = twy - lwy, rwyy = twyy - lwyy;
        const double sse = (lwyy - lwy * lwy / lw) + (rwyy - rwy * rwy / rw);
        if (!best || sse < best->sse)
          best = Split{f, 0.5 * (samples[i].value + samples[i + 1].value), sse};
      }
    }
    return best;
  }

  const TrainingSet& data_;
  std::span<const std::size_t> rows_;
  std::span<const double> weights_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree RegressionTree::fit(const TrainingSet& data, TreeParams params, std::uint64_t seed) {
  if (data.rows() == 0) throw ConfigError("cannot fit a tree on an empty training set");
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit(data, rows, data.w, params, seed);
}

RegressionTree RegressionTree::fit(const TrainingSet& data, std::span<const std::size_t> rows,
                                   std::span<const double> row_weights, TreeParams params,
                                   std::uint64_t seed) {
  if (rows.empty()) throw ConfigError("cannot fit a tree on an empty training set");
  if (rows.size() != row_weights.size()) throw ConfigError("tree fit: rows and weights differ in size");
  TreeBuilder builder(data, rows, row_weights, params, seed);
  std::vector<std::size_t> positions(rows.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  RegressionTree tree;
  tree.layout_ = data.layout;
  tree.nodes_ = builder.run(std::move(positions));
  return tree;
}

double RegressionTree::predict_row(std::span<const double> features) const {
  int n = 0;
  while (!nodes_[n].leaf())
    n = features[static_cast<std::size_t>(nodes_[n].feature)] <= nodes_[n].threshold ? nodes_[n].left
                                                                                     : nodes_[n].right;
  return nodes_[n].value;
}

double RegressionTree::predict(const FeatureKey& features) const {
  std::vector<double> row = layout_.encode(features);
  return predict_row(row);
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[n].leaf()) {
      stack.emplace_back(nodes_[n].left, d + 1);
      stack.emplace_back(nodes_[n].right, d + 1);
    }
  }
  return deepest;
}

RegressionTree RegressionTree::from_nodes(FeatureLayout layout, std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw ConfigError("tree without nodes");
  for (const auto& n : nodes) {
    if (n.leaf()) continue;
    if (n.feature >= static_cast<int>(layout.width()) || n.left <= 0 || n.right <= 0 ||
        n.left >= static_cast<int>(nodes.size()) || n.right >= static_cast<int>(nodes.size()))
      throw ConfigError("tree node references out of range");
  }
  RegressionTree t;
  t.layout_ = layout;
  t.nodes_ = std::move(nodes);
  return t;
}

RandomForest RandomForest::fit(const TrainingSet& data, TreeParams params, std::uint64_t seed, int trees) {
  if (data.rows() == 0) throw ConfigError("cannot fit a forest on an empty training set");
  if (trees < 1) throw ConfigError("forest needs at least one tree");
  if (params.max_features == 0)
    params.max_features = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.layout.width()))));
  RandomForest forest;
  std::discrete_distribution<std::size_t> draw(data.w.begin(), data.w.end());
  for (int t = 0; t < trees; ++t) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<double> multiplicity(data.rows(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) multiplicity[draw(rng)] += 1.0;
    std::vector<std::size_t> rows;
    std::vector<double> weights;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (multiplicity[i] == 0.0) continue;
      rows.push_back(i);
      weights.push_back(multiplicity[i]);
    }
    forest.trees_.push_back(RegressionTree::fit(data, rows, weights, params, rng()));
  }
  return forest;
}

double RandomForest::predict_row(std::span<const double> features) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict_row(features);
  return sum / static_cast<double>(trees_.size());
}

double RandomForest::predict(const FeatureKey& features) const {
  std::vector<double> row = trees_.front().layout().encode(features);
  return predict_row(row);
}

RandomForest RandomForest::from_trees(std::vector<RegressionTree> trees) {
  if (trees.empty()) throw ConfigError("forest without trees");
  RandomForest f;
  f.trees_ = std::move(trees);
  return f;
}

}  // namespace shedcep
