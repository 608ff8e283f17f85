#include "auxetikit/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "auxetikit/error.hpp"

namespace auxetikit {

namespace {

using ojson = nlohmann::ordered_json;

class TreeBuilder {
public:
   TreeBuilder(const TrainingSet& data, const ForestParams& hp, Rng& rng) : data_(data), hp_(hp), rng_(rng) {}

   std::vector<TreeNode> build(std::vector<std::size_t> sample)
   {
      grow(sample, 0);
      return std::move(nodes_);
   }

private:
   struct Split {
      int feature = -1;
      double threshold = 0.0;
      double cost = std::numeric_limits<double>::infinity();
   };

   int grow(std::vector<std::size_t>& idx, int depth)
   {
      const std::size_t n = idx.size();
      double sum = 0.0;
      for (auto i : idx) sum += data_.y[i];
      const int node = static_cast<int>(nodes_.size());
      nodes_.push_back(TreeNode{-1, 0.0, -1, -1, sum / static_cast<double>(n)});

      const bool depth_stop = hp_.max_depth > 0 && depth >= hp_.max_depth;
      const bool size_stop = n < 2 * static_cast<std::size_t>(hp_.min_leaf);
      const double y0 = data_.y[idx[0]];
      const bool constant = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return data_.y[i] == y0; });
      if (depth_stop || size_stop || constant) return node;

      const Split best = find_split(idx);
      if (best.feature < 0) return node;

      std::vector<std::size_t> left, right;
      left.reserve(n);
      right.reserve(n);
      for (auto i : idx) (data_.x[i][best.feature] <= best.threshold ? left : right).push_back(i);
      idx.clear();
      idx.shrink_to_fit();

      const int l = grow(left, depth + 1);
      const int r = grow(right, depth + 1);
      TreeNode& t = nodes_[node];
      t.feature = best.feature;
      t.threshold = best.threshold;
      t.left = l;
      t.right = r;
      t.value = 0.0;
      return node;
   }

   std::vector<int> candidate_features()
   {
      std::vector<int> f{0, 1, 2};
      const int k = std::clamp(hp_.features_per_split, 1, 3);
      if (k < 3) {
         for (int i = 0; i < k; ++i) std::swap(f[i], f[i + rng_.index(static_cast<std::size_t>(3 - i))]);
         f.resize(static_cast<std::size_t>(k));
         std::sort(f.begin(), f.end());
      }
      return f;
   }

   Split find_split(const std::vector<std::size_t>& idx)
   {
      Split best;
      const std::size_t n = idx.size();
      const std::size_t min_leaf = static_cast<std::size_t>(hp_.min_leaf);
      std::vector<std::pair<double, double>> xy(n);
      for (int f : candidate_features()) {
         for (std::size_t k = 0; k < n; ++k) xy[k] = {data_.x[idx[k]][f], data_.y[idx[k]]};
         std::sort(xy.begin(), xy.end());
         double total = 0.0, total_sq = 0.0;
         for (const auto& [x, y] : xy) {
            total += y;
            total_sq += y * y;
         }
         double s = 0.0, q = 0.0;
         for (std::size_t i = 0; i + 1 < n; ++i) {
            s += xy[i].second;
            q += xy[i].second * xy[i].second;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < min_leaf) continue;
            if (nr < min_leaf) break;
            if (!(xy[i].first < xy[i + 1].first)) continue;
            const double sr = total - s, qr = total_sq - q;
            const double cost = (q - s * s / static_cast<double>(nl)) + (qr - sr * sr / static_cast<double>(nr));
            if (cost < best.cost) {
               double t = 0.5 * (xy[i].first + xy[i + 1].first);
               if (!(t < xy[i + 1].first)) t = xy[i].first;
               best = Split{f, t, cost};
            }
         }
      }
      return best;
   }

   const TrainingSet& data_;
   const ForestParams& hp_;
   Rng& rng_;
   std::vector<TreeNode> nodes_;
};

ojson node_to_json(const std::vector<TreeNode>& nodes, int i)
{
   const TreeNode& t = nodes[static_cast<std::size_t>(i)];
   ojson j;
   if (t.feature < 0) {
      j["v"] = t.value;
      return j;
   }
   j["f"] = t.feature;
   j["t"] = t.threshold;
   j["l"] = node_to_json(nodes, t.left);
   j["r"] = node_to_json(nodes, t.right);
   return j;
}

int node_from_json(const ojson& j, std::vector<TreeNode>& nodes, int depth)
{
   if (depth > 10000) throw FormatError("tree nesting too deep");
   if (!j.is_object()) throw FormatError("tree node must be an object");
   const int id = static_cast<int>(nodes.size());
   if (j.contains("v")) {
      if (!j.at("v").is_number()) throw FormatError("leaf value must be a number");
      nodes.push_back(TreeNode{-1, 0.0, -1, -1, j.at("v").get<double>()});
      return id;
   }
   if (!j.contains("f") || !j.contains("t") || !j.contains("l") || !j.contains("r"))
      throw FormatError("split node needs f, t, l and r");
   if (!j.at("f").is_number_integer() || !j.at("t").is_number()) throw FormatError("malformed split node");
   const int f = j.at("f").get<int>();
   if (f < 0 || f > 2) throw FormatError("split feature out of range");
   nodes.push_back(TreeNode{f, j.at("t").get<double>(), -1, -1, 0.0});
   const int l = node_from_json(j.at("l"), nodes, depth + 1);
   const int r = node_from_json(j.at("r"), nodes, depth + 1);
   nodes[static_cast<std::size_t>(id)].left = l;
   nodes[static_cast<std::size_t>(id)].right = r;
   return id;
}

ojson params_to_json(const ForestParams& hp)
{
   ojson j;
   j["n_trees"] = hp.n_trees;
   j["min_leaf"] = hp.min_leaf;
   j["max_depth"] = hp.max_depth;
   j["features_per_split"] = hp.features_per_split;
   j["bootstrap"] = hp.bootstrap;
   j["seed"] = hp.seed;
   return j;
}

ForestParams params_from_json(const ojson& j)
{
   ForestParams hp;
   hp.n_trees = j.at("n_trees").get<int>();
   hp.min_leaf = j.at("min_leaf").get<int>();
   hp.max_depth = j.at("max_depth").get<int>();
   hp.features_per_split = j.at("features_per_split").get<int>();
   hp.bootstrap = j.at("bootstrap").get<bool>();
   hp.seed = j.at("seed").get<std::uint64_t>();
   return hp;
}

void check_lengths(std::span<const double> z, std::span<const double> z_hat)
{
   if (z.size() != z_hat.size()) throw ValidationError("metric inputs differ in length");
   if (z.size() < 2) throw ValidationError("metrics need at least two values");
}

} // namespace

std::string_view to_string(Target t)
{
   switch (t) {
   case Target::C11: return "c11";
   case Target::C12: return "c12";
   case Target::C33: return "c33";
   }
   return "c11";
}

Target target_from_string(std::string_view s)
{
   if (s == "c11" || s == "C11") return Target::C11;
   if (s == "c12" || s == "C12") return Target::C12;
   if (s == "c33" || s == "C33") return Target::C33;
   throw ValidationError("unknown target '" + std::string(s) + "' (expected c11, c12 or c33)");
}

void ForestParams::validate() const
{
   if (n_trees < 1) throw ValidationError("n_trees must be at least 1");
   if (min_leaf < 1) throw ValidationError("min_leaf must be at least 1");
   if (max_depth < 0) throw ValidationError("max_depth must be non-negative (0 = unlimited)");
   if (features_per_split < 1 || features_per_split > 3) throw ValidationError("features_per_split must be 1, 2 or 3");
}

double RegressionTree::predict(const Features& x) const
{
   std::size_t i = 0;
   while (nodes_[i].feature >= 0)
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold
                                       ? nodes_[i].left
                                       : nodes_[i].right);
   return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const
{
   return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& t) { return t.feature < 0; }));
}

int RegressionTree::depth() const
{
   if (nodes_.empty()) return 0;
   std::vector<int> d(nodes_.size(), 0);
   int best = 0;
   for (std::size_t i = 0; i < nodes_.size(); ++i) {
      best = std::max(best, d[i]);
      if (nodes_[i].feature >= 0) {
         d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
         d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
      }
   }
   return best;
}

TrainingSet TrainingSet::from_dataset(const Dataset& ds, Target target, std::span<const std::size_t> rows)
{
   TrainingSet t;
   auto add = [&](const SampleRow& r) {
      t.x.push_back({r.d_rel, r.D_rel, r.nu});
      t.y.push_back(target == Target::C11 ? r.c11_over_E : target == Target::C12 ? r.c12_over_E : r.c33_over_E);
   };
   if (rows.empty()) {
      for (const auto& r : ds.rows) add(r);
   } else {
      for (auto i : rows) add(ds.rows.at(i));
   }
   return t;
}

RegressionTree fit_tree(const TrainingSet& data, std::span<const std::size_t> sample, const ForestParams& hp, Rng& rng)
{
   hp.validate();
   if (sample.empty()) throw ValidationError("cannot fit a tree on zero rows");
   TreeBuilder b(data, hp, rng);
   return RegressionTree(b.build(std::vector<std::size_t>(sample.begin(), sample.end())));
}

double ForestModel::predict(const Features& x) const
{
   double s = 0.0;
   for (const auto& t : trees) s += t.predict(x);
   return s / static_cast<double>(trees.size());
}

bool ForestModel::in_training_box(const Features& x) const
{
   if (!training_meta.contains("feature_min") || !training_meta.contains("feature_max")) return true;
   for (std::size_t f = 0; f < 3; ++f) {
      if (x[f] < training_meta["feature_min"][f].get<double>() || x[f] > training_meta["feature_max"][f].get<double>())
         return false;
   }
   return true;
}

ojson ForestModel::to_json() const
{
   ojson j;
   j["version"] = kModelVersion;
   j["shape"] = std::string(auxetikit::to_string(shape));
   j["target"] = std::string(auxetikit::to_string(target));
   j["hyperparams"] = params_to_json(hyperparams);
   j["training_meta"] = training_meta;
   ojson trees_json = ojson::array();
   for (const auto& t : trees) trees_json.push_back(node_to_json(t.nodes(), 0));
   j["trees"] = std::move(trees_json);
   return j;
}

ForestModel ForestModel::from_json(const nlohmann::ordered_json& j)
{
   try {
      if (!j.is_object()) throw FormatError("model must be a JSON object");
      const int version = j.at("version").get<int>();
      if (version != kModelVersion)
         throw FormatError("unsupported model version " + std::to_string(version) + " (expected " +
                           std::to_string(kModelVersion) + ")");
      ForestModel m;
      m.shape = shape_from_string(j.at("shape").get<std::string>());
      m.target = target_from_string(j.at("target").get<std::string>());
      m.hyperparams = params_from_json(j.at("hyperparams"));
      m.training_meta = j.at("training_meta");
      const auto& trees = j.at("trees");
      if (!trees.is_array() || trees.empty()) throw FormatError("model has no trees");
      for (const auto& t : trees) {
         std::vector<TreeNode> nodes;
         node_from_json(t, nodes, 0);
         m.trees.emplace_back(std::move(nodes));
      }
      return m;
   } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed model: ") + e.what());
   } catch (const ValidationError& e) {
      throw FormatError(std::string("malformed model: ") + e.what());
   }
}

void ForestModel::save(const std::string& path) const
{
   std::ofstream f(path, std::ios::binary);
   if (!f) throw Error("cannot open '" + path + "' for writing");
   f << to_json().dump() << '\n';
   if (!f) throw Error("failed writing '" + path + "'");
}

ForestModel ForestModel::load(const std::string& path)
{
   std::ifstream f(path, std::ios::binary);
   if (!f) throw Error("cannot open model '" + path + "'");
   ojson j;
   try {
      j = ojson::parse(f);
   } catch (const nlohmann::json::exception& e) {
      throw FormatError("model '" + path + "' is not valid JSON: " + e.what());
   }
   return from_json(j);
}

ForestModel fit_forest(const Dataset& ds, Target target, const ForestParams& hp, int workers,
                       std::span<const std::size_t> rows)
{
   hp.validate();
   if (ds.rows.empty()) throw ValidationError("cannot train on an empty dataset");
   for (const auto& r : ds.rows)
      if (r.shape != ds.meta.shape) throw ValidationError("dataset mixes void shapes");

   const TrainingSet data = TrainingSet::from_dataset(ds, target, rows);
   const std::size_t n = data.size();
   if (n == 0) throw ValidationError("cannot train on zero rows");

   ForestModel m;
   m.shape = ds.meta.shape;
   m.target = target;
   m.hyperparams = hp;
   m.trees.resize(static_cast<std::size_t>(hp.n_trees));

   std::atomic<int> next{0};
   auto worker = [&] {
      for (int t = next++; t < hp.n_trees; t = next++) {
         Rng rng = Rng::split(hp.seed, static_cast<std::uint64_t>(t));
         std::vector<std::size_t> sample(n);
         if (hp.bootstrap) {
            for (auto& s : sample) s = rng.index(n);
         } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
         }
         m.trees[static_cast<std::size_t>(t)] = fit_tree(data, sample, hp, rng);
      }
   };
   const int nthreads = std::clamp(workers, 1, hp.n_trees);
   if (nthreads == 1) {
      worker();
   } else {
      std::vector<std::jthread> pool;
      for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
   }

   Features lo{}, hi{};
   for (std::size_t f = 0; f < 3; ++f) {
      lo[f] = hi[f] = data.x[0][f];
      for (const auto& x : data.x) {
         lo[f] = std::min(lo[f], x[f]);
         hi[f] = std::max(hi[f], x[f]);
      }
   }
   Dataset fp_source;
   if (rows.empty()) {
      fp_source.rows = ds.rows;
   } else {
      for (auto i : rows) fp_source.rows.push_back(ds.rows[i]);
   }
   ojson meta;
   meta["rows"] = n;
   meta["dataset_fingerprint"] = fingerprint(fp_source);
   meta["grid_n"] = ds.meta.grid_n;
   meta["tolerance"] = ds.meta.tolerance;
   meta["regime"] = std::string(auxetikit::to_string(ds.meta.regime));
   meta["rng_seed"] = ds.meta.rng_seed;
   meta["feature_min"] = lo;
   meta["feature_max"] = hi;
   m.training_meta = std::move(meta);
   return m;
}

double mse(std::span<const double> z, std::span<const double> z_hat)
{
   check_lengths(z, z_hat);
   double s = 0.0;
   for (std::size_t i = 0; i < z.size(); ++i) s += (z[i] - z_hat[i]) * (z[i] - z_hat[i]);
   return s / static_cast<double>(z.size());
}

double r2(std::span<const double> z, std::span<const double> z_hat)
{
   check_lengths(z, z_hat);
   const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
   double ss_res = 0.0, ss_tot = 0.0;
   for (std::size_t i = 0; i < z.size(); ++i) {
      ss_res += (z[i] - z_hat[i]) * (z[i] - z_hat[i]);
      ss_tot += (z[i] - mean) * (z[i] - mean);
   }
   if (ss_tot == 0.0) throw DegenerateError("R^2 undefined: targets have zero variance");
   return 1.0 - ss_res / ss_tot;
}

SplitReport train_test_split(std::size_t n, std::uint64_t seed, double test_fraction)
{
   if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must be in [0, 1)");
   std::vector<std::size_t> perm(n);
   std::iota(perm.begin(), perm.end(), std::size_t{0});
   Rng rng = Rng::split(seed, ~std::uint64_t{0});
   for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
   const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
   SplitReport s;
   s.test_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
   s.train_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
   std::sort(s.test_indices.begin(), s.test_indices.end());
   std::sort(s.train_indices.begin(), s.train_indices.end());
   return s;
}

ForestModel train_and_evaluate(const Dataset& ds, Target target, const ForestParams& hp, SplitReport& split,
                               int workers)
{
   ForestModel m = fit_forest(ds, target, hp, workers, split.train_indices);
   auto score = [&](const std::vector<std::size_t>& idx, double& out_mse, double& out_r2) {
      if (idx.size() < 2) return;
      const TrainingSet t = TrainingSet::from_dataset(ds, target, idx);
      std::vector<double> pred(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) pred[i] = m.predict(t.x[i]);
      out_mse = mse(t.y, pred);
      out_r2 = r2(t.y, pred);
   };
   score(split.train_indices, split.mse_train, split.r2_train);
   score(split.test_indices, split.mse_test, split.r2_test);
   return m;
}

double surrogate_predict(const ForestModel& m, double d_rel, double D_rel, double nu)
{
   const double y = m.predict(d_rel, D_rel, nu);
   if (!swap_symmetric(m.shape) || d_rel == D_rel) return y;
   return 0.5 * (y + m.predict(D_rel, d_rel, nu));
}

std::string model_filename(VoidShape shape, Target target)
{
   return std::string(to_string(shape)) + "_" + std::string(to_string(target)) + ".json";
}

} // namespace auxetikit
