#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "auxetikit/dataset.hpp"
#include "auxetikit/geometry.hpp"
#include "auxetikit/rng.hpp"

namespace auxetikit {

inline constexpr int kModelVersion = 1;

/// Which normalized effective constant a model predicts.
enum class Target { C11, C12, C33 };

/// Serialized names: "c11", "c12", "c33".
std::string_view to_string(Target t);
Target target_from_string(std::string_view s);

using Features = std::array<double, 3>;  ///< (d_rel, D_rel, nu)

struct ForestParams {
   int n_trees = 100;
   int min_leaf = 1;
   int max_depth = 0;  ///< 0 means unlimited
   int features_per_split = 3;
   bool bootstrap = true;
   std::uint64_t seed = 1;

   void validate() const;
   friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Flat regression tree. A node with feature < 0 is a leaf.
struct TreeNode {
   int feature = -1;
   double threshold = 0.0;
   int left = -1;
   int right = -1;
   double value = 0.0;

   friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
public:
   RegressionTree() = default;
   explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

   double predict(const Features& x) const;
   const std::vector<TreeNode>& nodes() const { return nodes_; }
   std::size_t leaf_count() const;
   int depth() const;

   friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
   std::vector<TreeNode> nodes_;
};

/// Training inputs in column form.
struct TrainingSet {
   std::vector<Features> x;
   std::vector<double> y;

   static TrainingSet from_dataset(const Dataset& ds, Target target, std::span<const std::size_t> rows = {});
   std::size_t size() const { return y.size(); }
};

/// Greedy CART on the rows listed in `sample` (repeats allowed). Splits go at
/// midpoints between adjacent distinct values and minimize the summed child
/// squared error; ties prefer the lower feature, then the smaller threshold.
RegressionTree fit_tree(const TrainingSet& data, std::span<const std::size_t> sample, const ForestParams& hp,
                        Rng& rng);

struct ForestModel {
   VoidShape shape = VoidShape::Rectangular;
   Target target = Target::C11;
   ForestParams hyperparams;
   nlohmann::ordered_json training_meta = nlohmann::ordered_json::object();
   std::vector<RegressionTree> trees;

   double predict(const Features& x) const;
   double predict(double d_rel, double D_rel, double nu) const { return predict(Features{d_rel, D_rel, nu}); }

   /// True when x lies inside the bounding box of the training inputs.
   bool in_training_box(const Features& x) const;

   nlohmann::ordered_json to_json() const;
   static ForestModel from_json(const nlohmann::ordered_json& j);
   void save(const std::string& path) const;
   static ForestModel load(const std::string& path);
};

/// Bagged forest. Tree t draws from stream t of hp.seed, so the model does
/// not depend on `workers`. Throws ValidationError on mixed shapes.
ForestModel fit_forest(const Dataset& ds, Target target, const ForestParams& hp, int workers = 1,
                       std::span<const std::size_t> rows = {});

double mse(std::span<const double> z, std::span<const double> z_hat);
/// Throws DegenerateError when z has zero variance.
double r2(std::span<const double> z, std::span<const double> z_hat);

struct SplitReport {
   std::vector<std::size_t> train_indices;
   std::vector<std::size_t> test_indices;
   double r2_train = 0.0;
   double r2_test = 0.0;
   double mse_train = 0.0;
   double mse_test = 0.0;
};

/// Seeded shuffle into test (round(test_fraction * n) rows) and train parts.
SplitReport train_test_split(std::size_t n, std::uint64_t seed, double test_fraction = 0.1);

/// Fits on the train part of `split` and fills in the metrics.
ForestModel train_and_evaluate(const Dataset& ds, Target target, const ForestParams& hp, SplitReport& split,
                               int workers = 1);

/// Surrogate prediction of one model. For swap-symmetric shapes this is the
/// mean of the predictions at (d_rel, D_rel) and (D_rel, d_rel), which makes
/// the surrogate share the exact invariance of the cell.
double surrogate_predict(const ForestModel& m, double d_rel, double D_rel, double nu);

/// Canonical model file name "<shape>_<target>.json".
std::string model_filename(VoidShape shape, Target target);

} // namespace auxetikit
