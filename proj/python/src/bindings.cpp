#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "auxetikit/dataset.hpp"
#include "auxetikit/error.hpp"
#include "auxetikit/fft_solver.hpp"
#include "auxetikit/forest.hpp"
#include "auxetikit/inverse.hpp"
#include "auxetikit/sweep.hpp"

namespace py = pybind11;
using namespace auxetikit;

namespace {

py::object json_to_py(const std::string& text)
{
   return py::module_::import("json").attr("loads")(text);
}

py::array_t<double> matrix_to_array(const VoigtMatrix3& m)
{
   py::array_t<double> out({3, 3});
   auto v = out.mutable_unchecked<2>();
   for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v(i, j) = m(i, j);
   return out;
}

py::array_t<double> rows_to_array(const Dataset& ds)
{
   py::array_t<double> out({static_cast<py::ssize_t>(ds.rows.size()), py::ssize_t{6}});
   auto v = out.mutable_unchecked<2>();
   for (std::size_t k = 0; k < ds.rows.size(); ++k) {
      const auto& r = ds.rows[k];
      const double row[6] = {r.d_rel, r.D_rel, r.nu, r.c11_over_E, r.c12_over_E, r.c33_over_E};
      for (py::ssize_t c = 0; c < 6; ++c) v(static_cast<py::ssize_t>(k), c) = row[c];
   }
   return out;
}

std::string dataset_meta_json(const Dataset& ds)
{
   // The first line of the CSV form carries the metadata as JSON.
   std::ostringstream os;
   write_dataset(ds, os);
   const std::string text = os.str();
   const auto start = text.find('{');
   const auto end = text.find('\n');
   return text.substr(start, end - start);
}

ForestParams forest_params(int n_trees, int min_leaf, int max_depth, int features_per_split, bool bootstrap,
                           std::uint64_t seed)
{
   ForestParams hp{n_trees, min_leaf, max_depth, features_per_split, bootstrap, seed};
   hp.validate();
   return hp;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
   m.doc() = "Galerkin FFT homogenization, random-forest surrogates and inverse design of auxetic unit cells";

   auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
   py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
   py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
   py::register_exception<DegenerateError>(m, "DegenerateError", error.ptr());
   py::register_exception<FormatError>(m, "FormatError", error.ptr());

   m.attr("GENERATOR_VERSION") = kGeneratorVersion;

   m.def("shapes", [] {
      std::vector<std::string> out;
      for (auto s : all_shapes()) out.emplace_back(to_string(s));
      return out;
   });

   m.def(
      "base_stiffness",
      [](double E, double nu, const std::string& regime) {
         return matrix_to_array(base_stiffness({E, nu}, regime_from_string(regime)));
      },
      py::arg("E"), py::arg("nu"), py::arg("regime") = "plane_strain");

   m.def(
      "homogenize",
      [](const std::string& shape, double d_rel, double D_rel, double E, double nu, int n, double tol,
         const std::string& method, const std::string& regime) {
         HomogenizeOptions opt{n, tol, method_from_string(method), regime_from_string(regime)};
         const UnitCellSpec spec{shape_from_string(shape), d_rel, D_rel, {E, nu}};
         HomogenizeResult h;
         {
            py::gil_scoped_release release;
            h = homogenize(spec, opt);
         }
         py::dict out;
         out["c11"] = h.stiffness.c11;
         out["c12"] = h.stiffness.c12;
         out["c33"] = h.stiffness.c33;
         out["nu_eff"] = nu_eff(h.stiffness);
         out["full"] = matrix_to_array(h.stiffness.full);
         out["iterations"] = h.report.iterations;
         out["residual"] = h.report.residual;
         return out;
      },
      py::arg("shape"), py::arg("d_rel"), py::arg("D_rel"), py::arg("E") = 1.0, py::arg("nu") = 0.3,
      py::arg("n") = 128, py::arg("tol") = 1e-6, py::arg("method") = "sensitivity",
      py::arg("regime") = "plane_strain");

   m.def(
      "rasterize",
      [](const std::string& shape, double d_rel, double D_rel, int n) {
         const auto grid = rasterize({shape_from_string(shape), d_rel, D_rel, {}}, n);
         py::array_t<std::uint8_t> out({n, n});
         std::copy(grid.indicator().begin(), grid.indicator().end(), out.mutable_data());
         return out;
      },
      py::arg("shape"), py::arg("d_rel"), py::arg("D_rel"), py::arg("n") = 128,
      "Solid indicator indexed [i, j] with i along x1.");

   m.def(
      "geometry_svg",
      [](const std::string& shape, double d_rel, double D_rel) {
         const UnitCellSpec spec{shape_from_string(shape), d_rel, D_rel, {}};
         spec.validate();
         return to_svg(spec);
      },
      py::arg("shape"), py::arg("d_rel"), py::arg("D_rel"));

   m.def(
      "sample_params",
      [](std::size_t count, std::uint64_t seed) {
         std::vector<std::tuple<double, double, double>> out;
         for (const auto& p : sample_params(count, seed)) out.emplace_back(p.d_rel, p.D_rel, p.nu);
         return out;
      },
      py::arg("count"), py::arg("seed") = 1);

   py::class_<Dataset>(m, "Dataset")
      .def_static(
         "load", [](const std::string& path) { return read_dataset(path); }, py::arg("path"))
      .def("save", [](const Dataset& ds, const std::string& path) { write_dataset(ds, path); }, py::arg("path"))
      .def_property_readonly("shape", [](const Dataset& ds) { return std::string(to_string(ds.meta.shape)); })
      .def_property_readonly("meta", [](const Dataset& ds) { return json_to_py(dataset_meta_json(ds)); })
      .def_property_readonly("rows", &rows_to_array,
                             "Array of (d_rel, D_rel, nu, c11_over_E, c12_over_E, c33_over_E) rows.")
      .def("prefix", &Dataset::prefix, py::arg("count"))
      .def("fingerprint", [](const Dataset& ds) { return fingerprint(ds); })
      .def("__len__", [](const Dataset& ds) { return ds.rows.size(); });

   m.def(
      "generate",
      [](const std::string& shape, std::size_t count, int n, double tol, std::uint64_t seed, int workers,
         const std::string& regime, const std::string& method) {
         GenerateOptions opt;
         opt.shape = shape_from_string(shape);
         opt.count = count;
         opt.grid_n = n;
         opt.tolerance = tol;
         opt.seed = seed;
         opt.workers = workers;
         opt.regime = regime_from_string(regime);
         opt.method = method_from_string(method);
         py::gil_scoped_release release;
         return generate(opt);
      },
      py::arg("shape"), py::arg("count"), py::arg("n") = 128, py::arg("tol") = 1e-6, py::arg("seed") = 1,
      py::arg("workers") = 1, py::arg("regime") = "plane_strain", py::arg("method") = "sensitivity");

   py::class_<ForestModel>(m, "ForestModel")
      .def_static("load", &ForestModel::load, py::arg("path"))
      .def("save", &ForestModel::save, py::arg("path"))
      .def_property_readonly("shape", [](const ForestModel& f) { return std::string(to_string(f.shape)); })
      .def_property_readonly("target", [](const ForestModel& f) { return std::string(to_string(f.target)); })
      .def_property_readonly("n_trees", [](const ForestModel& f) { return f.trees.size(); })
      .def("predict", py::overload_cast<double, double, double>(&ForestModel::predict, py::const_), py::arg("d_rel"),
           py::arg("D_rel"), py::arg("nu"))
      .def(
         "predict_many",
         [](const ForestModel& f, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
            if (x.ndim() != 2 || x.shape(1) != 3) throw ValidationError("expected an array of shape (N, 3)");
            auto in = x.unchecked<2>();
            py::array_t<double> out(x.shape(0));
            auto o = out.mutable_unchecked<1>();
            for (py::ssize_t k = 0; k < x.shape(0); ++k) o(k) = f.predict(in(k, 0), in(k, 1), in(k, 2));
            return out;
         },
         py::arg("x"))
      .def("surrogate_predict",
           [](const ForestModel& f, double d, double D, double nu) { return surrogate_predict(f, d, D, nu); },
           py::arg("d_rel"), py::arg("D_rel"), py::arg("nu"))
      .def("to_json", [](const ForestModel& f) { return f.to_json().dump(); });

   m.def(
      "fit_forest",
      [](const Dataset& ds, const std::string& target, int n_trees, int min_leaf, int max_depth,
         int features_per_split, bool bootstrap, std::uint64_t seed, int workers) {
         const auto hp = forest_params(n_trees, min_leaf, max_depth, features_per_split, bootstrap, seed);
         py::gil_scoped_release release;
         return fit_forest(ds, target_from_string(target), hp, workers);
      },
      py::arg("dataset"), py::arg("target"), py::arg("n_trees") = 100, py::arg("min_leaf") = 1,
      py::arg("max_depth") = 0, py::arg("features_per_split") = 3, py::arg("bootstrap") = true, py::arg("seed") = 1,
      py::arg("workers") = 1);

   m.def(
      "train_and_evaluate",
      [](const Dataset& ds, const std::string& target, double test_fraction, std::uint64_t split_seed, int n_trees,
         int min_leaf, std::uint64_t seed, int workers) {
         const auto hp = forest_params(n_trees, min_leaf, 0, 3, true, seed);
         SplitReport split = train_test_split(ds.rows.size(), split_seed, test_fraction);
         ForestModel model;
         {
            py::gil_scoped_release release;
            model = train_and_evaluate(ds, target_from_string(target), hp, split, workers);
         }
         py::dict scores;
         scores["r2_train"] = split.r2_train;
         scores["r2_test"] = split.r2_test;
         scores["mse_train"] = split.mse_train;
         scores["mse_test"] = split.mse_test;
         scores["n_train"] = split.train_indices.size();
         scores["n_test"] = split.test_indices.size();
         return py::make_tuple(std::move(model), scores);
      },
      py::arg("dataset"), py::arg("target"), py::arg("test_fraction") = 0.1, py::arg("split_seed") = 1,
      py::arg("n_trees") = 100, py::arg("min_leaf") = 1, py::arg("seed") = 1, py::arg("workers") = 1);

   m.def(
      "inverse",
      [](const ForestModel& c11_model, const ForestModel& c12_model, const ForestModel& c33_model, double nu,
         std::optional<double> c11, std::optional<double> c12, std::optional<double> c33, double E,
         std::size_t eval_count, double threshold, double margin, int workers) {
         const Surrogate s = forest_surrogate(c11_model, c12_model, c33_model);
         const auto target = InverseTarget::from_stress(c11, c12, c33, E);
         InverseResult r;
         {
            py::gil_scoped_release release;
            r = brute_force(s, target, nu, {eval_count, threshold, margin, workers});
         }
         return json_to_py(r.to_json().dump());
      },
      py::arg("c11_model"), py::arg("c12_model"), py::arg("c33_model"), py::arg("nu"), py::arg("c11") = py::none(),
      py::arg("c12") = py::none(), py::arg("c33") = py::none(), py::arg("E") = 1.0, py::arg("eval_count") = 20000,
      py::arg("threshold") = 1e-6, py::arg("margin") = 0.01, py::arg("workers") = 1,
      "Brute-force search; targets are in stress units and divided by E.");

   m.def(
      "sweep",
      [](const std::string& shape, double d_rel, double nu, double D_min, double D_max, double step, int n,
         double tol, int workers) {
         SweepSpec spec;
         spec.shape = shape_from_string(shape);
         spec.d_rel = d_rel;
         spec.nu = nu;
         spec.D_min = D_min;
         spec.D_max = D_max;
         spec.step = step;
         SweepOptions opt;
         opt.fft = HomogenizeOptions{n, tol};
         opt.workers = workers;
         std::vector<SweepRow> rows;
         {
            py::gil_scoped_release release;
            rows = run_sweep(spec, opt);
         }
         const auto k = static_cast<py::ssize_t>(rows.size());
         py::array_t<double> D(k), c11(k), c12(k), c33(k), nue(k);
         for (py::ssize_t i = 0; i < k; ++i) {
            const auto& r = rows[static_cast<std::size_t>(i)];
            D.mutable_at(i) = r.D_rel;
            c11.mutable_at(i) = r.c11_over_E;
            c12.mutable_at(i) = r.c12_over_E;
            c33.mutable_at(i) = r.c33_over_E;
            nue.mutable_at(i) = r.nu_eff;
         }
         py::dict out;
         out["D_rel"] = D;
         out["c11_over_E"] = c11;
         out["c12_over_E"] = c12;
         out["c33_over_E"] = c33;
         out["nu_eff"] = nue;
         try {
            out["onset"] = onset(rows);
         } catch (const Error&) {
            out["onset"] = py::none();
         }
         return out;
      },
      py::arg("shape"), py::arg("d_rel") = 0.05, py::arg("nu") = 0.3, py::arg("D_min") = 0.05,
      py::arg("D_max") = 0.9, py::arg("step") = 0.01, py::arg("n") = 128, py::arg("tol") = 1e-6,
      py::arg("workers") = 1);
}
