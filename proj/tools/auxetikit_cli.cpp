// auxetikit command-line front end.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "auxetikit/dataset.hpp"
#include "auxetikit/error.hpp"
#include "auxetikit/fft_solver.hpp"
#include "auxetikit/forest.hpp"
#include "auxetikit/inverse.hpp"
#include "auxetikit/service.hpp"
#include "auxetikit/sweep.hpp"

namespace fs = std::filesystem;
using namespace auxetikit;
using ojson = nlohmann::ordered_json;

namespace {

/// Arguments in CLI11's reversed order, with each set environment variable
/// placed ahead as its flag unless the flag is already given. This makes
/// flags override the environment and the environment override the file.
std::vector<std::string> reversed_args_with_env(int argc, char** argv)
{
   static const std::pair<const char*, const char*> kEnvFlags[] = {
      {"AUXETIKIT_REGIME", "--regime"},       {"AUXETIKIT_N", "--n"},       {"AUXETIKIT_TOL", "--tol"},
      {"AUXETIKIT_MODEL_DIR", "--model-dir"}, {"AUXETIKIT_DATA_DIR", "--data-dir"}, {"AUXETIKIT_SEED", "--seed"},
      {"AUXETIKIT_WORKERS", "--workers"}};
   const std::vector<std::string> given(argv + 1, argv + argc);
   std::vector<std::string> args;
   for (const auto& [env, flag] : kEnvFlags) {
      const char* value = std::getenv(env);
      if (value == nullptr) continue;
      const std::string f(flag);
      const bool present = std::any_of(given.begin(), given.end(),
                                       [&](const std::string& a) { return a == f || a.rfind(f + "=", 0) == 0; });
      if (present) continue;
      args.push_back(f);
      args.push_back(value);
   }
   args.insert(args.end(), given.begin(), given.end());
   std::reverse(args.begin(), args.end());
   return args;
}

struct Config {
   std::string regime = "plane_strain";
   int grid_n = 128;
   double tolerance = 1e-6;
   std::string model_dir = "models";
   std::string data_dir = "data";
   std::uint64_t seed = 1;
   int workers = 1;
};

void print_json(const ojson& j)
{
   std::cout << j.dump(2) << '\n';
}

ojson matrix_json(const VoigtMatrix3& m)
{
   ojson rows = ojson::array();
   for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
   return rows;
}

std::string dataset_path(const Config& cfg, const std::string& explicit_path, VoidShape shape)
{
   if (!explicit_path.empty()) return explicit_path;
   return (fs::path(cfg.data_dir) / (std::string(to_string(shape)) + ".csv")).string();
}

ShapeModels load_models(const std::string& dir, VoidShape shape)
{
   auto path = [&](Target t) { return (fs::path(dir) / model_filename(shape, t)).string(); };
   return ShapeModels{ForestModel::load(path(Target::C11)), ForestModel::load(path(Target::C12)),
                      ForestModel::load(path(Target::C33))};
}

void ensure_parent(const std::string& path)
{
   const fs::path parent = fs::path(path).parent_path();
   if (!parent.empty()) fs::create_directories(parent);
}

struct ForestFlags {
   int n_trees = 100;
   int min_leaf = 1;
   int max_depth = 0;
   int features_per_split = 3;
   bool no_bootstrap = false;

   void add_to(CLI::App* app)
   {
      app->add_option("--trees", n_trees, "Trees per forest")->capture_default_str();
      app->add_option("--min-leaf", min_leaf, "Minimum samples per leaf")->capture_default_str();
      app->add_option("--max-depth", max_depth, "Maximum tree depth, 0 = unlimited")->capture_default_str();
      app->add_option("--features-per-split", features_per_split, "Features drawn per split (1-3)")
         ->capture_default_str();
      app->add_flag("--no-bootstrap", no_bootstrap, "Fit each tree on the full training set");
   }

   ForestParams params(std::uint64_t seed) const
   {
      return ForestParams{n_trees, min_leaf, max_depth, features_per_split, !no_bootstrap, seed};
   }
};

} // namespace

int main(int argc, char** argv)
{
   CLI::App app{"Galerkin FFT homogenization, random-forest surrogates and inverse design of auxetic unit cells"};
   app.require_subcommand(1);
   app.set_config("--config", "auxetikit.toml", "Read settings from a TOML key = value file");

   Config cfg;
   app.add_option("--regime", cfg.regime, "2D regime: plane_strain or plane_stress")
      ->envname("AUXETIKIT_REGIME")
      ->capture_default_str();
   app.add_option("--n", cfg.grid_n, "FFT grid size (pixels per side)")->envname("AUXETIKIT_N")->capture_default_str();
   app.add_option("--tol", cfg.tolerance, "MINRES relative tolerance")->envname("AUXETIKIT_TOL")->capture_default_str();
   app.add_option("--model-dir", cfg.model_dir, "Directory of trained model files")
      ->envname("AUXETIKIT_MODEL_DIR")
      ->capture_default_str();
   app.add_option("--data-dir", cfg.data_dir, "Directory of dataset files")
      ->envname("AUXETIKIT_DATA_DIR")
      ->capture_default_str();
   app.add_option("--seed", cfg.seed, "Random seed")->envname("AUXETIKIT_SEED")->capture_default_str();
   app.add_option("--workers", cfg.workers, "Worker threads")->envname("AUXETIKIT_WORKERS")->capture_default_str();

   // homogenize
   auto* hom = app.add_subcommand("homogenize", "Effective stiffness of one unit cell (JSON)")->fallthrough();
   std::string h_shape, h_method = "sensitivity";
   double h_d = 0.0, h_D = 0.0, h_E = 1.0, h_nu = 0.3;
   hom->add_option("--shape", h_shape, "rect, diamond, oval or peanut")->required();
   hom->add_option("--d", h_d, "Narrow void diameter d/L")->required();
   hom->add_option("--D", h_D, "Long void diameter D/L")->required();
   hom->add_option("--E", h_E, "Young's modulus")->capture_default_str();
   hom->add_option("--nu", h_nu, "Poisson's ratio")->capture_default_str();
   hom->add_option("--method", h_method, "sensitivity or perturbation")->capture_default_str();

   // generate
   auto* gen = app.add_subcommand("generate", "Sample and homogenize a training dataset")->fallthrough();
   std::string g_shape, g_out;
   std::size_t g_count = 100;
   bool g_progress = false;
   gen->add_option("--shape", g_shape)->required();
   gen->add_option("--count", g_count, "Number of samples")->capture_default_str();
   gen->add_option("--out", g_out, "Output CSV (default <data-dir>/<shape>.csv)");
   gen->add_flag("--progress", g_progress, "Report progress on stderr");

   // train
   auto* train = app.add_subcommand("train", "Train forests and report the 90/10 split scores")->fallthrough();
   std::string t_shape, t_data, t_target = "all";
   double t_test_fraction = 0.1;
   ForestFlags t_forest;
   train->add_option("--shape", t_shape)->required();
   train->add_option("--data", t_data, "Dataset CSV (default <data-dir>/<shape>.csv)");
   train->add_option("--target", t_target, "c11, c12, c33 or all")->capture_default_str();
   train->add_option("--test-fraction", t_test_fraction)->capture_default_str();
   t_forest.add_to(train);

   // predict
   auto* pred = app.add_subcommand("predict", "Surrogate prediction of the effective constants")->fallthrough();
   std::string p_shape;
   double p_d = 0.0, p_D = 0.0, p_nu = 0.3, p_E = 1.0;
   pred->add_option("--shape", p_shape)->required();
   pred->add_option("--d", p_d)->required();
   pred->add_option("--D", p_D)->required();
   pred->add_option("--nu", p_nu)->capture_default_str();
   pred->add_option("--E", p_E)->capture_default_str();

   // inverse
   auto* inv = app.add_subcommand("inverse", "Brute-force search for target constants")->fallthrough();
   std::string i_shape = "rect";
   std::optional<double> i_c11, i_c12, i_c33;
   double i_E = 1.0, i_nu = 0.3, i_threshold = 1e-6, i_margin = 0.01;
   std::size_t i_evals = 20000;
   inv->add_option("--shape", i_shape)->capture_default_str();
   inv->add_option("--c11", i_c11, "Target C11 in stress units");
   inv->add_option("--c12", i_c12, "Target C12 in stress units");
   inv->add_option("--c33", i_c33, "Target C33 in stress units");
   inv->add_option("--E", i_E)->capture_default_str();
   inv->add_option("--nu", i_nu)->capture_default_str();
   inv->add_option("--evals", i_evals, "Approximate number of grid evaluations")->capture_default_str();
   inv->add_option("--threshold", i_threshold, "Loss at or below which the target counts as met")
      ->capture_default_str();
   inv->add_option("--margin", i_margin, "Distance of the grid from d + D = 1")->capture_default_str();

   // sweep
   auto* sw = app.add_subcommand("sweep", "Constants versus D/L at fixed d/L and nu (CSV)")->fallthrough();
   SweepSpec s_spec;
   std::string s_shape, s_evaluator = "fft", s_out;
   bool s_full = false;
   sw->add_option("--shape", s_shape)->required();
   sw->add_option("--d", s_spec.d_rel)->capture_default_str();
   sw->add_option("--nu", s_spec.nu)->capture_default_str();
   sw->add_option("--D-min", s_spec.D_min)->capture_default_str();
   sw->add_option("--D-max", s_spec.D_max)->capture_default_str();
   sw->add_option("--step", s_spec.step)->capture_default_str();
   sw->add_option("--evaluator", s_evaluator, "fft, surrogate or both")->capture_default_str();
   sw->add_option("--out", s_out, "Output CSV (default stdout)");
   sw->add_flag("--full-scale", s_full, "Use a 256 x 256 grid");

   // study
   auto* st = app.add_subcommand("study", "Dataset-size study of surrogate error along the sweep")->fallthrough();
   std::string st_shape, st_data, st_truth, st_out, st_target = "c11";
   std::vector<std::size_t> st_sizes;
   bool st_full = false;
   ForestFlags st_forest;
   st->add_option("--shape", st_shape)->required();
   st->add_option("--data", st_data, "Dataset CSV (default <data-dir>/<shape>.csv)");
   st->add_option("--truth", st_truth, "FFT sweep CSV to compare against (computed when absent)");
   st->add_option("--sizes", st_sizes, "Dataset sizes (default 188 375 750 1500 3000)");
   st->add_option("--target", st_target)->capture_default_str();
   st->add_option("--out", st_out, "Output CSV (default stdout)");
   st->add_flag("--full-scale", st_full, "Sizes 3k..48k on a 256 x 256 grid");
   st_forest.add_to(st);

   // serve
   auto* srv = app.add_subcommand("serve", "HTTP JSON API and static UI")->fallthrough();
   std::string v_host = "127.0.0.1", v_ui;
   int v_port = 8080, v_fft_workers = 1;
   srv->add_option("--host", v_host)->capture_default_str();
   srv->add_option("--port", v_port)->envname("AUXETIKIT_PORT")->capture_default_str();
   srv->add_option("--ui-dir", v_ui, "Static assets served under /");
   srv->add_option("--fft-workers", v_fft_workers, "Concurrent FFT-backed requests")->capture_default_str();

   try {
      app.name(fs::path(argv[0]).filename().string());
      auto args = reversed_args_with_env(argc, argv);
      app.parse(args);
   } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
   } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
   } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
   }

   try {
      const Regime regime = regime_from_string(cfg.regime);
      if (cfg.workers < 1) throw ValidationError("--workers must be at least 1");

      if (*hom) {
         UnitCellSpec spec{shape_from_string(h_shape), h_d, h_D, BaseMaterial{h_E, h_nu}};
         HomogenizeOptions opt;
         opt.n = cfg.grid_n;
         opt.tolerance = cfg.tolerance;
         opt.method = method_from_string(h_method);
         opt.regime = regime;
         const auto r = homogenize(spec, opt);
         ojson j;
         j["shape"] = std::string(to_string(spec.shape));
         j["d_rel"] = h_d;
         j["D_rel"] = h_D;
         j["E"] = h_E;
         j["nu"] = h_nu;
         j["regime"] = std::string(to_string(regime));
         j["method"] = std::string(to_string(opt.method));
         j["n"] = opt.n;
         j["C"] = matrix_json(r.stiffness.full);
         j["c11"] = r.stiffness.c11;
         j["c12"] = r.stiffness.c12;
         j["c33"] = r.stiffness.c33;
         j["nu_eff"] = nu_eff(r.stiffness);
         j["iterations"] = r.report.iterations;
         j["residual"] = r.report.residual;
         print_json(j);
      } else if (*gen) {
         GenerateOptions opt;
         opt.shape = shape_from_string(g_shape);
         opt.count = g_count;
         opt.grid_n = cfg.grid_n;
         opt.tolerance = cfg.tolerance;
         opt.seed = cfg.seed;
         opt.workers = cfg.workers;
         opt.regime = regime;
         if (g_progress)
            opt.progress = [](std::size_t done, std::size_t total) {
               if (done % 10 == 0 || done == total) std::fprintf(stderr, "\r%zu / %zu", done, total);
               if (done == total) std::fprintf(stderr, "\n");
            };
         const auto t0 = std::chrono::steady_clock::now();
         const Dataset ds = generate(opt);
         const std::string path = dataset_path(cfg, g_out, opt.shape);
         ensure_parent(path);
         write_dataset(ds, path);
         ojson j;
         j["path"] = path;
         j["rows"] = ds.rows.size();
         j["failures"] = ds.meta.failures;
         j["elapsed_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
         print_json(j);
      } else if (*train) {
         const VoidShape shape = shape_from_string(t_shape);
         const Dataset ds = read_dataset(dataset_path(cfg, t_data, shape), shape);
         std::vector<Target> targets;
         if (t_target == "all") targets = {Target::C11, Target::C12, Target::C33};
         else targets = {target_from_string(t_target)};
         fs::create_directories(cfg.model_dir);
         ojson out = ojson::array();
         for (Target t : targets) {
            SplitReport split = train_test_split(ds.rows.size(), cfg.seed, t_test_fraction);
            const ForestModel m = train_and_evaluate(ds, t, t_forest.params(cfg.seed), split, cfg.workers);
            const std::string path = (fs::path(cfg.model_dir) / model_filename(shape, t)).string();
            m.save(path);
            ojson j;
            j["target"] = std::string(to_string(t));
            j["n_train"] = split.train_indices.size();
            j["n_test"] = split.test_indices.size();
            j["r2_train"] = split.r2_train;
            j["r2_test"] = split.r2_test;
            j["mse_train"] = split.mse_train;
            j["mse_test"] = split.mse_test;
            j["path"] = path;
            out.push_back(j);
         }
         print_json(out);
      } else if (*pred) {
         const VoidShape shape = shape_from_string(p_shape);
         UnitCellSpec{shape, p_d, p_D, BaseMaterial{p_E, p_nu}}.validate();
         const ShapeModels models = load_models(cfg.model_dir, shape);
         const auto [y11, y12, y33] = forest_surrogate(models.c11, models.c12, models.c33)(p_d, p_D, p_nu);
         ojson j;
         j["shape"] = std::string(to_string(shape));
         j["c11_over_E"] = y11;
         j["c12_over_E"] = y12;
         j["c33_over_E"] = y33;
         j["c11"] = p_E * y11;
         j["c12"] = p_E * y12;
         j["c33"] = p_E * y33;
         j["nu_eff"] = nu_eff(EffectiveStiffness{y11, y12, y33, {}});
         j["out_of_range"] = !models.c11.in_training_box(Features{p_d, p_D, p_nu});
         print_json(j);
      } else if (*inv) {
         const VoidShape shape = shape_from_string(i_shape);
         BaseMaterial{i_E, i_nu}.validate();
         const InverseTarget target = InverseTarget::from_stress(i_c11, i_c12, i_c33, i_E);
         target.validate();
         const ShapeModels models = load_models(cfg.model_dir, shape);
         const Surrogate s = forest_surrogate(models.c11, models.c12, models.c33);
         InverseOptions opt;
         opt.eval_count = i_evals;
         opt.threshold = i_threshold;
         opt.margin = i_margin;
         opt.workers = cfg.workers;
         const InverseResult r = brute_force(s, target, i_nu, opt);
         ojson j = r.to_json();
         const auto y = s(r.d_rel, r.D_rel, i_nu);
         j["shape"] = std::string(to_string(shape));
         j["predicted"] = {{"c11", i_E * y[0]}, {"c12", i_E * y[1]}, {"c33", i_E * y[2]}};
         print_json(j);
      } else if (*sw) {
         s_spec.shape = shape_from_string(s_shape);
         s_spec.evaluator = evaluator_from_string(s_evaluator);
         SweepOptions opt;
         opt.fft.n = s_full ? 256 : cfg.grid_n;
         opt.fft.tolerance = cfg.tolerance;
         opt.fft.regime = regime;
         opt.workers = cfg.workers;
         std::optional<ShapeModels> models;
         std::optional<Surrogate> surrogate;
         if (s_spec.evaluator != Evaluator::Fft) {
            models = load_models(cfg.model_dir, s_spec.shape);
            surrogate = forest_surrogate(models->c11, models->c12, models->c33);
         }
         const auto rows = run_sweep(s_spec, opt, surrogate ? &*surrogate : nullptr);
         if (s_out.empty()) {
            write_sweep_csv(rows, std::cout);
         } else {
            ensure_parent(s_out);
            std::ofstream f(s_out);
            write_sweep_csv(rows, f);
         }
         for (const char* ev : {"fft", "surrogate"}) {
            const auto part = select(rows, ev);
            if (part.empty()) continue;
            try {
               std::fprintf(stderr, "%s onset: D/L = %.2f\n", ev, onset(part));
            } catch (const Error& e) {
               std::fprintf(stderr, "%s: %s\n", ev, e.what());
            }
         }
      } else if (*st) {
         const VoidShape shape = shape_from_string(st_shape);
         const Target target = target_from_string(st_target);
         const Dataset ds = read_dataset(dataset_path(cfg, st_data, shape), shape);
         std::vector<std::size_t> sizes = st_sizes;
         if (sizes.empty()) sizes = st_full ? full_sizes() : desk_sizes();
         SweepSpec spec;
         spec.shape = shape;
         std::vector<SweepRow> truth;
         if (!st_truth.empty()) {
            std::ifstream f(st_truth);
            if (!f) throw Error("cannot open '" + st_truth + "'");
            truth = read_sweep_csv(f);
         } else {
            SweepOptions opt;
            opt.fft.n = st_full ? 256 : cfg.grid_n;
            opt.fft.tolerance = cfg.tolerance;
            opt.fft.regime = regime;
            opt.workers = cfg.workers;
            truth = run_sweep(spec, opt);
         }
         const auto entries = size_study(ds, sizes, truth, spec, target, st_forest.params(cfg.seed), cfg.workers);
         if (st_out.empty()) {
            write_size_study_csv(entries, std::cout);
         } else {
            ensure_parent(st_out);
            std::ofstream f(st_out);
            write_size_study_csv(entries, f);
         }
      } else if (*srv) {
         ServiceConfig sc;
         sc.model_dir = cfg.model_dir;
         sc.ui_dir = v_ui;
         sc.grid_n = cfg.grid_n;
         sc.tolerance = cfg.tolerance;
         sc.regime = regime;
         sc.fft_workers = v_fft_workers;
         Service service(sc);
         for (VoidShape s : all_shapes())
            std::fprintf(stderr, "%-8s %s\n", std::string(to_string(s)).c_str(),
                         service.has_models(s) ? "models loaded" : "no models");
         std::fprintf(stderr, "listening on http://%s:%d\n", v_host.c_str(), v_port);
         serve(service, v_host, v_port);
      }
   } catch (const ValidationError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
   } catch (const ConvergenceError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 3;
   } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
   }
   return 0;
}
