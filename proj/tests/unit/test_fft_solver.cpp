#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "auxetikit/error.hpp"
#include "auxetikit/fft_solver.hpp"

using namespace auxetikit;

namespace {

TensorField2 random_field(int n, std::uint64_t seed)
{
   std::mt19937_64 gen(seed);
   std::normal_distribution<double> g;
   TensorField2 f(n);
   for (double& v : f.values()) v = g(gen);
   return f;
}

double spectral_max_abs(const SpectralField2& f)
{
   double m = 0.0;
   for (const auto& v : f.values()) m = std::max(m, std::abs(v));
   return m;
}

double field_max_abs(const TensorField2& f)
{
   double m = 0.0;
   for (double v : f.values()) m = std::max(m, std::abs(v));
   return m;
}

double max_rel_diff(const VoigtMatrix3& a, const VoigtMatrix3& b)
{
   const double scale = b.norm();
   double m = 0.0;
   for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)) / scale);
   return m;
}

PixelGrid stripes(int n)
{
   std::vector<std::uint8_t> solid(static_cast<std::size_t>(n) * n);
   for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) solid[static_cast<std::size_t>(i) * n + j] = i < n / 2 ? 1 : 0;
   return PixelGrid(n, 1.0, solid);
}

// Closed-form stiffness of a two-phase laminate with equal volume fractions
// and interface normal along x1: sigma11, sigma12 and eps22 are continuous.
VoigtMatrix3 laminate_oracle(const VoigtMatrix3& a, const VoigtMatrix3& b)
{
   auto avg = [&](auto f) { return 0.5 * (f(a) + f(b)); };
   const double inv11 = avg([](const VoigtMatrix3& d) { return 1.0 / d(0, 0); });
   const double r12 = avg([](const VoigtMatrix3& d) { return d(0, 1) / d(0, 0); });
   const double d11 = avg([](const VoigtMatrix3& d) { return d(1, 1); });
   const double q12 = avg([](const VoigtMatrix3& d) { return d(0, 1) * d(0, 1) / d(0, 0); });
   const double inv33 = avg([](const VoigtMatrix3& d) { return 1.0 / d(2, 2); });
   VoigtMatrix3 c;
   c(0, 0) = 1.0 / inv11;
   c(0, 1) = c(1, 0) = r12 / inv11;
   c(1, 1) = d11 - q12 + r12 * r12 / inv11;
   c(2, 2) = 1.0 / inv33;
   return c;
}

} // namespace

TEST_CASE("frequency grid examples")
{
   const auto fg = build_frequencies(4, 1.0);
   const auto k22 = fg.index(2, 2);
   CHECK(fg.zero_mask[k22]);
   CHECK(fg.xi_rot[k22][0] == cplx(0.0));
   CHECK(fg.xi_rot[k22][1] == cplx(0.0));

   const auto k00 = fg.index(0, 0);
   CHECK(FrequencyGrid::q(0, 4) == doctest::Approx(-std::numbers::pi));
   CHECK(fg.nyquist_mask[k00]);
   CHECK_FALSE(fg.zero_mask[k00]);
   CHECK(fg.xi_rot[k00][0] == cplx(0.0));

   // q = (pi/2, 0): i * 8 * tan(pi/4) * (1 + e^{-i pi/2}) / 2 * (1 + 1) / 2 = 4 + 4i.
   const auto k32 = fg.index(3, 2);
   CHECK(fg.xi_rot[k32][0].real() == doctest::Approx(4.0).epsilon(1e-14));
   CHECK(fg.xi_rot[k32][0].imag() == doctest::Approx(4.0).epsilon(1e-14));
   CHECK(std::abs(fg.xi_rot[k32][1]) < 1e-15);
   CHECK(fg.xi[k32][0].imag() == doctest::Approx(2.0 * std::numbers::pi));
   CHECK(fg.xi[k32][0].real() == 0.0);

   CHECK_THROWS_AS(build_frequencies(5), ValidationError);
   CHECK(FrequencyGrid::centered_index(0, 8) == 4);
   CHECK(FrequencyGrid::centered_index(4, 8) == 0);
}

TEST_CASE("projection of the zero field is zero")
{
   const auto fg = build_frequencies(8);
   CHECK(spectral_max_abs(apply_projection(SpectralField2(8), fg)) == 0.0);
   const auto block = projection_block({cplx(0.0), cplx(0.0)});
   for (const auto& v : block) CHECK(v == cplx(0.0));
}

TEST_CASE("projector is idempotent on random fields")
{
   GalerkinSolver solver(16);
   const auto spec = solver.forward(random_field(16, 3));
   SpectralField2 once = spec;
   solver.project(once);
   SpectralField2 twice = once;
   solver.project(twice);
   double diff = 0.0;
   for (std::size_t k = 0; k < once.values().size(); ++k)
      diff = std::max(diff, std::abs(once.values()[k] - twice.values()[k]));
   CHECK(spectral_max_abs(once) > 1.0);
   CHECK(diff <= 1e-10 * spectral_max_abs(once));

   // The free-function form agrees with the solver's cached blocks.
   const auto free = apply_projection(spec, solver.frequencies());
   double gap = 0.0;
   for (std::size_t k = 0; k < once.values().size(); ++k) gap = std::max(gap, std::abs(once.values()[k] - free.values()[k]));
   CHECK(gap <= 1e-12 * spectral_max_abs(once));
}

TEST_CASE("compatible strain fields are fixed points of the projector")
{
   const int n = 16;
   GalerkinSolver solver(n);
   const auto& fg = solver.frequencies();
   std::mt19937_64 gen(11);
   std::normal_distribution<double> g;
   SpectralField2 eps(n);
   for (int k1 = 0; k1 < n; ++k1) {
      for (int k2 = 0; k2 < eps.half(); ++k2) {
         const auto idx = fg.index(FrequencyGrid::centered_index(k1, n), FrequencyGrid::centered_index(k2, n));
         const cplx u1(g(gen), g(gen)), u2(g(gen), g(gen));
         const auto& xi = fg.xi_rot[idx];
         eps.at(0, k1, k2) = xi[0] * u1;
         eps.at(1, k1, k2) = xi[1] * u2;
         eps.at(2, k1, k2) = xi[0] * u2 + xi[1] * u1;
      }
   }
   SpectralField2 projected = eps;
   solver.project(projected);
   double diff = 0.0;
   for (std::size_t k = 0; k < eps.values().size(); ++k) diff = std::max(diff, std::abs(eps.values()[k] - projected.values()[k]));
   CHECK(spectral_max_abs(eps) > 1.0);
   CHECK(diff <= 1e-10 * spectral_max_abs(eps));
}

TEST_CASE("operator is self-adjoint on compatible fields")
{
   const int n = 16;
   GalerkinSolver solver(n);
   const auto grid = rasterize({VoidShape::Rectangular, 0.25, 0.5, {}}, n);
   const auto m = Microstructure::from_grid(grid, base_stiffness({1.0, 0.3}));
   auto compatible = [&](std::uint64_t seed) {
      auto s = solver.forward(random_field(n, seed));
      solver.project(s);
      return solver.inverse(s);
   };
   const auto x = compatible(21), y = compatible(22);
   const auto ax = solver.apply(x, m), ay = solver.apply(y, m);
   const std::size_t np = static_cast<std::size_t>(n) * n;
   const double lhs = field_dot(ax.values(), y.values(), np);
   const double rhs = field_dot(x.values(), ay.values(), np);
   CHECK(std::abs(lhs) > 1e-3);
   CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
}

TEST_CASE("operator on trivial inputs")
{
   const int n = 16;
   const auto solid = PixelGrid::all_solid(n);
   const auto d = base_stiffness({1.0, 0.3});
   TensorField2 constant(n);
   for (int c = 0; c < 3; ++c)
      for (double& v : constant.plane(c)) v = 0.1 * (c + 1);
   CHECK(field_max_abs(apply_operator(constant, solid, d)) <= 1e-14);
   const auto grid = rasterize({VoidShape::Oval, 0.3, 0.4, {}}, n);
   CHECK(field_max_abs(apply_operator(TensorField2(n), grid, d)) == 0.0);
}

TEST_CASE("MINRES matches a dense pseudo-inverse solve on an 8x8 grid")
{
   const int n = 8;
   const std::size_t np = n * n, dim = 3 * np;
   std::mt19937_64 gen(5);
   for (int trial = 0; trial < 3; ++trial) {
      std::vector<std::uint8_t> solid(np, 1);
      solid[gen() % np] = 0;
      const PixelGrid grid(n, 1.0, solid);
      const auto d = base_stiffness({1.0, 0.3});
      GalerkinSolver solver(n);
      const auto m = Microstructure::from_grid(grid, d);

      Eigen::MatrixXd a(dim, dim), p(dim, dim);
      for (std::size_t col = 0; col < dim; ++col) {
         TensorField2 e(n);
         e.values()[col] = 1.0;
         const auto out = solver.apply(e, m);
         auto s = solver.forward(e);
         solver.project(s);
         const auto pe = solver.inverse(s);
         for (std::size_t row = 0; row < dim; ++row) {
            a(row, col) = out.values()[row];
            p(row, col) = pe.values()[row];
         }
      }
      // Impulse column against the full-operator column.
      TensorField2 impulse(n);
      impulse.at(0, 3, 4) = 1.0;
      const auto direct = apply_operator(impulse, grid, d);
      const std::size_t col = 3 * n + 4;
      for (std::size_t row = 0; row < dim; ++row) CHECK(direct.values()[row] == doctest::Approx(a(row, col)).scale(1.0));

      // On compatible fields the operator is A P. Its symmetric form in the
      // Frobenius product is W^{1/2} A P W^{-1/2}, W = diag(1, 1, 1/2).
      Eigen::VectorXd w(dim);
      for (std::size_t k = 0; k < dim; ++k) w[k] = k < 2 * np ? 1.0 : std::sqrt(0.5);
      const Eigen::MatrixXd as = w.asDiagonal() * a * p * w.cwiseInverse().asDiagonal();
      CHECK((as - as.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * as.cwiseAbs().maxCoeff());

      const Voigt3 macro{0.3, -0.2, 0.5};
      TensorField2 uniform(n);
      for (int c = 0; c < 3; ++c)
         for (double& v : uniform.plane(c)) v = macro[c];
      const auto gd = solver.apply(uniform, m);
      Eigen::VectorXd b(dim);
      for (std::size_t k = 0; k < dim; ++k) b[k] = -gd.values()[k];

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (as + as.transpose()));
      const double cutoff = 1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff();
      Eigen::VectorXd inv = eig.eigenvalues();
      for (Eigen::Index k = 0; k < inv.size(); ++k) inv[k] = std::abs(inv[k]) > cutoff ? 1.0 / inv[k] : 0.0;
      const Eigen::VectorXd xs = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * (w.asDiagonal() * b);
      const Eigen::VectorXd dense = w.cwiseInverse().asDiagonal() * xs;

      const auto sol = solve_equilibrium(grid, d, macro, 1e-12, 2000);
      CHECK(sol.report.converged);
      double diff = 0.0;
      for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(sol.eps_tilde.values()[k] - dense[k]));
      CHECK(diff <= 1e-8 * dense.cwiseAbs().maxCoeff());
   }
}

TEST_CASE("homogeneous cell has no fluctuation")
{
   const auto solid = PixelGrid::all_solid(32);
   const auto sol = solve_equilibrium(solid, base_stiffness({1.0, 0.3}), {0.4, -0.1, 0.25});
   CHECK(sol.report.converged);
   CHECK(sol.report.iterations <= 1);
   CHECK(field_max_abs(sol.eps_tilde) <= 1e-14);
}

TEST_CASE("two-stripe laminate matches the closed form")
{
   const int n = 64;
   const auto a = base_stiffness({2.0, 0.3});
   const auto b = base_stiffness({1.0, 0.3});
   const auto m = Microstructure::from_grid(stripes(n), a, b);
   GalerkinSolver solver(n);
   const SolverOptions opt{1e-10, 0};
   SolveReport r1, r2;
   const auto cp = solver.stiffness_perturbation(m, opt, r1);
   const auto cs = solver.stiffness_sensitivity(m, opt, r2);
   CHECK(r1.converged);
   CHECK(r2.converged);
   const auto oracle = laminate_oracle(a, b);
   CHECK(max_rel_diff(cp, oracle) <= 1e-6);
   CHECK(max_rel_diff(cs, oracle) <= 1e-6);
   // Series along the loading axis differs from the arithmetic mean.
   CHECK(oracle(0, 0) < 0.5 * (a(0, 0) + b(0, 0)) - 0.1);
}

TEST_CASE("fluctuation strain has zero mean")
{
   const auto grid = rasterize({VoidShape::Rectangular, 0.3, 0.5, {}}, 64);
   const auto sol = solve_equilibrium(grid, base_stiffness({1.0, 0.3}), {1.0, 0.0, 0.0});
   CHECK(sol.report.converged);
   for (double v : sol.eps_tilde.mean()) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("solid cell reproduces the base stiffness")
{
   const auto d = base_stiffness({1.0, 0.25});
   for (auto method : {StiffnessMethod::Perturbation, StiffnessMethod::Sensitivity}) {
      const auto c = method == StiffnessMethod::Perturbation ? effective_stiffness_perturbation(PixelGrid::all_solid(32), d)
                                                             : effective_stiffness_sensitivity(PixelGrid::all_solid(32), d);
      CHECK(c.c11 == doctest::Approx(1.2).epsilon(1e-12));
      CHECK(c.c12 == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(c.c33 == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(std::abs(c.full(0, 2)) <= 1e-8);
      CHECK(std::abs(c.full(2, 1)) <= 1e-8);
      CHECK(c.c33 == doctest::Approx(0.5 * (c.c11 - c.c12)).epsilon(1e-12));
   }

   // Two phases with identical stiffness behave like one.
   std::vector<std::uint8_t> checker(32 * 32);
   for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) checker[i * 32 + j] = (i + j) % 2;
   GalerkinSolver solver(32);
   SolveReport r;
   const auto c = solver.stiffness_perturbation(Microstructure::from_grid(PixelGrid(32, 1.0, checker), d, d), {}, r);
   CHECK(max_rel_diff(c, d) <= 1e-12);
}

TEST_CASE("perturbation and sensitivity routes agree and are symmetric")
{
   GalerkinSolver solver(32);
   const double tol = 1e-6;
   for (auto s : all_shapes()) {
      CAPTURE(to_string(s));
      const auto m = Microstructure::from_grid(rasterize({s, 0.15, 0.55, {}}, 32), base_stiffness({1.0, 0.3}));
      SolveReport r1, r2;
      const auto cp = solver.stiffness_perturbation(m, {tol, 0}, r1);
      const auto cs = solver.stiffness_sensitivity(m, {tol, 0}, r2);
      CHECK(r1.converged);
      CHECK(r2.converged);
      CHECK(max_rel_diff(cp, cs) <= 10 * tol);
      CHECK(cs.max_asymmetry() <= 10 * tol * cs.norm());
   }
}

TEST_CASE("perforated cell is not isotropic")
{
   const auto h = homogenize({VoidShape::Rectangular, 0.3, 0.5, {1.0, 0.3}}, {64});
   CHECK(std::abs(h.stiffness.c33 - 0.5 * (h.stiffness.c11 - h.stiffness.c12)) > 1e-3);
}

TEST_CASE("stiffness is invariant under swapping d and D for swap-symmetric shapes")
{
   GalerkinSolver solver(64);
   for (auto s : all_shapes()) {
      CAPTURE(to_string(s));
      const auto a = homogenize(solver, {s, 0.2, 0.45, {1.0, 0.3}}, {64});
      const auto b = homogenize(solver, {s, 0.45, 0.2, {1.0, 0.3}}, {64});
      const double diff = max_rel_diff(a.stiffness.full, b.stiffness.full);
      if (swap_symmetric(s))
         CHECK(diff <= 1e-6);
      else
         CHECK(diff > 1e-3);
   }
}

TEST_CASE("homogenize scales linearly with E")
{
   GalerkinSolver solver(64);
   const HomogenizeOptions opt{64};
   const auto a = homogenize(solver, {VoidShape::Rectangular, 0.2, 0.5, {1.0, 0.3}}, opt);
   const auto b = homogenize(solver, {VoidShape::Rectangular, 0.2, 0.5, {3500.0, 0.3}}, opt);
   for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
         CHECK(std::abs(b.stiffness.full(i, j) - 3500.0 * a.stiffness.full(i, j)) <= 1e-10 * 3500.0 * a.stiffness.full.norm());
}

TEST_CASE("homogenize of the solid PLA cell")
{
   const auto h = homogenize({VoidShape::Rectangular, 0.0, 0.0, {3500.0, 0.36}}, {64});
   const auto d = base_stiffness({3500.0, 0.36});
   CHECK(h.stiffness.c11 == doctest::Approx(d(0, 0)).epsilon(1e-10));
   CHECK(h.stiffness.c12 == doctest::Approx(d(0, 1)).epsilon(1e-10));
   CHECK(h.stiffness.c33 == doctest::Approx(d(2, 2)).epsilon(1e-10));
}

TEST_CASE("rectangular cell near the auxetic onset")
{
   const auto h = homogenize({VoidShape::Rectangular, 0.05, 0.42, {1.0, 0.3}}, {128});
   CHECK(std::abs(nu_eff(h.stiffness)) <= 0.05);
   const auto p = homogenize({VoidShape::Rectangular, 0.05, 0.42, {1.0, 0.3}},
                             {128, 1e-6, StiffnessMethod::Perturbation});
   CHECK(std::abs(nu_eff(p.stiffness)) <= 0.05);
}

TEST_CASE("diamond cell turns auxetic as the voids grow")
{
   GalerkinSolver solver(64);
   const auto small = homogenize(solver, {VoidShape::Diamond, 0.05, 0.35, {1.0, 0.3}}, {64});
   const auto large = homogenize(solver, {VoidShape::Diamond, 0.05, 0.65, {1.0, 0.3}}, {64});
   CHECK(nu_eff(small.stiffness) > 0.0);
   CHECK(nu_eff(large.stiffness) < 0.0);
}

TEST_CASE("inverse-design geometry reproduces the target constants")
{
   const auto h = homogenize({VoidShape::Rectangular, 0.34, 0.50, {3500.0, 0.36}}, {256});
   CHECK(std::abs(h.stiffness.c11 - 400.0) <= 0.05 * 400.0);
   CHECK(std::abs(h.stiffness.c12 + 200.0) <= 0.05 * 200.0);
}

TEST_CASE("solver errors")
{
   const UnitCellSpec spec{VoidShape::Rectangular, 0.3, 0.5, {1.0, 0.3}};
   HomogenizeOptions opt{32};
   opt.max_iterations = 2;
   CHECK_THROWS_AS(homogenize(spec, opt), ConvergenceError);
   opt.max_iterations = 0;
   opt.tolerance = 0.0;
   CHECK_THROWS_AS(homogenize(spec, opt), ValidationError);
   GalerkinSolver solver(16);
   CHECK_THROWS_AS(homogenize(solver, spec, HomogenizeOptions{32}), ValidationError);
   const auto m = Microstructure::from_grid(PixelGrid::all_solid(16), base_stiffness({}));
   SolveReport r;
   CHECK_THROWS_AS(solver.solve(m, {std::nan(""), 0.0, 0.0}, {}, r), ValidationError);

   SolveReport report;
   const auto grid = rasterize(spec, 32);
   effective_stiffness_sensitivity(grid, base_stiffness({}), 1e-6, &report);
   CHECK(report.converged);
   CHECK(report.residual <= 1e-6);
   CHECK(method_from_string(to_string(StiffnessMethod::Perturbation)) == StiffnessMethod::Perturbation);
   CHECK_THROWS_AS(method_from_string("fem"), ValidationError);
}

TEST_CASE("a shared solver gives identical results across threads")
{
   GalerkinSolver solver(32);
   const HomogenizeOptions opt{32};
   const UnitCellSpec a{VoidShape::Oval, 0.2, 0.5, {1.0, 0.25}};
   const UnitCellSpec b{VoidShape::Peanut, 0.25, 0.6, {1.0, 0.35}};
   const auto ra = homogenize(solver, a, opt), rb = homogenize(solver, b, opt);
   HomogenizeResult ta, tb;
   {
      std::jthread t1([&] { ta = homogenize(solver, a, opt); });
      std::jthread t2([&] { tb = homogenize(solver, b, opt); });
   }
   CHECK(ta.stiffness.full == ra.stiffness.full);
   CHECK(tb.stiffness.full == rb.stiffness.full);
}
