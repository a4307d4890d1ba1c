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

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "shedcep/stats.hpp"
#include "shedcep/zobrist.hpp"

namespace shedcep {

/// Common prediction surface of the utility backends.
class UtilityModel {
 public:
  virtual ~UtilityModel() = default;
  virtual double predict(const FeatureKey& features) const = 0;
  virtual std::string kind() const = 0;
};

enum class DefaultUtility { Mean, Zero, One };

DefaultUtility parse_default_utility(const std::string& name);
std::string to_string(DefaultUtility d);

/// Per-type hash tables from Zobrist key to utility.
class UtilityTable final : public UtilityModel {
 public:
  UtilityTable() = default;

  /// Stores U = M/O for every group under its Zobrist key. With
  /// `track_collisions`, the full feature tuple of each key is kept so
  /// distinct tuples sharing a key are counted.
  static UtilityTable build(std::span<const AggregatedObservation> groups, ZobristKeys keys,
                            DefaultUtility default_policy = DefaultUtility::Mean,
                            bool track_collisions = false);

  /// Hot-path lookup; unobserved keys yield the type's default utility.
  double lookup(TypeId type, std::uint64_t key) const {
    const auto& table = tables_[type];
    auto it = table.find(key);
    return it == table.end() ? defaults_[type] : it->second;
  }
  bool contains(TypeId type, std::uint64_t key) const { return tables_[type].count(key) != 0; }

  double predict(const FeatureKey& features) const override;
  std::string kind() const override { return "gspice-h"; }

  const ZobristKeys& keys() const { return keys_; }
  std::size_t type_count() const { return tables_.size(); }
  std::size_t size() const;
  std::size_t size(TypeId type) const { return tables_[type].size(); }
  double default_utility(TypeId type) const { return defaults_[type]; }
  DefaultUtility default_policy() const { return policy_; }
  std::size_t collisions() const { return collisions_; }

  const std::vector<std::unordered_map<std::uint64_t, double>>& tables() const { return tables_; }

  /// Reassembles a table from serialized parts.
  static UtilityTable from_parts(ZobristKeys keys, DefaultUtility policy,
                                 std::vector<std::unordered_map<std::uint64_t, double>> tables,
                                 std::vector<double> defaults);

  bool operator==(const UtilityTable& other) const;

 private:
  ZobristKeys keys_;
  DefaultUtility policy_ = DefaultUtility::Mean;
  std::vector<std::unordered_map<std::uint64_t, double>> tables_;
  std::vector<double> defaults_;
  std::size_t collisions_ = 0;
};

/// Dense feature encoding used by the tree models: one-hot type, binned
/// frequencies, binned attributes.
struct FeatureLayout {
  std::size_t type_count = 0;
  std::size_t attribute_count = 0;

  std::size_t width() const { return 2 * type_count + attribute_count; }
  void encode(const FeatureKey& key, std::span<double> out) const;
  std::vector<double> encode(const FeatureKey& key) const;
};

struct TrainingSet {
  FeatureLayout layout;
  std::vector<double> x;  // row-major, rows() x layout.width()
  std::vector<double> y;
  std::vector<double> w;

  std::size_t rows() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * layout.width(), layout.width()};
  }
};

/// Rows are the aggregated observations, labels their utility, weights O.
TrainingSet make_training_set(std::span<const AggregatedObservation> groups, FeatureLayout layout);

struct TreeParams {
  /// 0 means unlimited.
  int max_depth = 12;
  int min_samples_split = 4;
  /// Features considered per split; 0 means all.
  int max_features = 0;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// CART regression tree with weighted variance-reduction splits; a leaf
/// predicts the weighted mean label of its samples. Nodes are stored in
/// preorder.
class RegressionTree final : public UtilityModel {
 public:
  RegressionTree() = default;

  static RegressionTree fit(const TrainingSet& data, TreeParams params, std::uint64_t seed = 0);
  /// Fits on a subset of rows with per-row weights (bootstrap support).
  static RegressionTree fit(const TrainingSet& data, std::span<const std::size_t> rows,
                            std::span<const double> row_weights, TreeParams params,
                            std::uint64_t seed);

  double predict_row(std::span<const double> features) const;
  double predict(const FeatureKey& features) const override;
  std::string kind() const override { return "gspice-t"; }

  int depth() const;
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const FeatureLayout& layout() const { return layout_; }

  static RegressionTree from_nodes(FeatureLayout layout, std::vector<TreeNode> nodes);
  bool operator==(const RegressionTree& other) const {
    return nodes_ == other.nodes_ && layout_.type_count == other.layout_.type_count &&
           layout_.attribute_count == other.layout_.attribute_count;
  }

 private:
  FeatureLayout layout_;
  std::vector<TreeNode> nodes_;
};

/// Bagged ensemble of regression trees; prediction is the mean over trees.
class RandomForest final : public UtilityModel {
 public:
  static constexpr int kDefaultTrees = 10;

  RandomForest() = default;

  /// Each tree sees a bootstrap sample drawn with probability proportional
  /// to O and a random subset of ceil(sqrt(d)) features per split unless
  /// params.max_features says otherwise.
  static RandomForest fit(const TrainingSet& data, TreeParams params, std::uint64_t seed,
                          int trees = kDefaultTrees);

  double predict_row(std::span<const double> features) const;
  double predict(const FeatureKey& features) const override;
  std::string kind() const override { return "gspice-f"; }

  const std::vector<RegressionTree>& trees() const { return trees_; }
  static RandomForest from_trees(std::vector<RegressionTree> trees);
  bool operator==(const RandomForest& other) const { return trees_ == other.trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

/// O-weighted mean squared error of a model over its training groups.
double weighted_training_mse(const UtilityModel& model, std::span<const AggregatedObservation> groups);

}  // namespace shedcep
