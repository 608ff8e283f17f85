#include <doctest.h>

#include <cmath>

#include "auxetikit/error.hpp"
#include "auxetikit/inverse.hpp"

using namespace auxetikit;

namespace {

// Quadratic bowl with its minimum at (0.237, 0.418): C11 carries d, C12 carries D.
std::array<double, 3> bowl(double d, double D, double)
{
   return {d - 0.237, D - 0.418, 0.0};
}

InverseTarget zero_targets()
{
   InverseTarget t;
   t.c11 = 0.0;
   t.c12 = 0.0;
   return t;
}

} // namespace

TEST_CASE("inverse loss examples")
{
   const Surrogate s = [](double d, double D, double nu) { return std::array<double, 3>{d + D, d - D, nu}; };
   InverseTarget t;
   t.c11 = 0.7;
   t.c12 = -0.1;
   t.c33 = 0.3;
   CHECK(inverse_loss(s, 0.3, 0.4, 0.3, t) == doctest::Approx(0.0).scale(1.0));

   InverseTarget one;
   one.c11 = 0.6;
   CHECK(inverse_loss({0.7, 5.0, 9.0}, one) == doctest::Approx(0.01).epsilon(1e-12));

   InverseTarget two;
   two.c11 = 0.0;
   two.c33 = 0.0;
   CHECK(inverse_loss({0.1, 100.0, 0.3}, two) == doctest::Approx(0.05).epsilon(1e-12));

   CHECK_THROWS_AS(inverse_loss(s, 0.1, 0.1, 0.3, InverseTarget{}), ValidationError);
}

TEST_CASE("targets in stress units")
{
   const auto t = InverseTarget::from_stress(400.0, -200.0, std::nullopt, 3500.0);
   CHECK(*t.c11 == doctest::Approx(400.0 / 3500.0));
   CHECK(*t.c12 == doctest::Approx(-200.0 / 3500.0));
   CHECK_FALSE(t.c33.has_value());
   CHECK(t.count() == 2);
   CHECK_THROWS_AS(InverseTarget::from_stress(1.0, std::nullopt, std::nullopt, 0.0), ValidationError);
   InverseTarget bad;
   bad.c12 = std::nan("");
   CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("search grid sizing")
{
   const auto g20 = SearchGrid::for_count(20000);
   CHECK(g20.K == 200);
   CHECK(g20.size() == 20100);
   CHECK(g20.pitch == doctest::Approx(0.99 / 200));
   CHECK(SearchGrid::for_count(10000).K == 141);
   CHECK(SearchGrid::for_count(1).size() == 1);
   CHECK_THROWS_AS(SearchGrid::for_count(0), ValidationError);
   // All lattice points respect the margin.
   CHECK((g20.K - 1) * g20.pitch < 0.99);
}

TEST_CASE("a single evaluation returns the origin")
{
   InverseOptions opt;
   opt.eval_count = 1;
   const auto r = brute_force(bowl, zero_targets(), 0.3, opt);
   CHECK(r.evaluations == 1);
   CHECK(r.d_rel == 0.0);
   CHECK(r.D_rel == 0.0);
   CHECK(r.loss == doctest::Approx(0.5 * (0.237 * 0.237 + 0.418 * 0.418)));
}

TEST_CASE("planted minimum is found within one pitch")
{
   InverseOptions opt;
   opt.eval_count = 10000;
   const auto r = brute_force(bowl, zero_targets(), 0.3, opt);
   CHECK(std::abs(r.d_rel - 0.237) <= r.pitch);
   CHECK(std::abs(r.D_rel - 0.418) <= r.pitch);
   CHECK(r.evaluations >= 10000);
}

TEST_CASE("refinement through nested grids never increases the loss")
{
   const Surrogate s = [](double d, double D, double nu) {
      return std::array<double, 3>{std::sin(7 * d) * D, d * d - D, nu * D};
   };
   InverseTarget t;
   t.c11 = 0.31;
   t.c12 = -0.2;
   double prev = std::numeric_limits<double>::infinity();
   for (std::size_t count : {1275u, 5050u, 20100u, 80200u}) {
      InverseOptions opt;
      opt.eval_count = count;
      const auto r = brute_force(s, t, 0.3, opt);
      CHECK(r.loss <= prev);
      prev = r.loss;
   }
}

TEST_CASE("ties go to smaller d_rel, then smaller D_rel")
{
   const Surrogate flat = [](double, double, double) { return std::array<double, 3>{1.0, 1.0, 1.0}; };
   InverseTarget t;
   t.c33 = 1.0;
   const auto r = brute_force(flat, t, 0.3, {500});
   CHECK(r.d_rel == 0.0);
   CHECK(r.D_rel == 0.0);

   // Loss depends on D only: best row is d = 0.
   const Surrogate only_D = [](double, double D, double) { return std::array<double, 3>{D, 0.0, 0.0}; };
   InverseTarget td;
   td.c11 = 0.5;
   const auto r2 = brute_force(only_D, td, 0.3, {5000});
   CHECK(r2.d_rel == 0.0);
   CHECK(std::abs(r2.D_rel - 0.5) <= r2.pitch);
}

TEST_CASE("infeasible targets are reported, not raised")
{
   InverseTarget t;
   t.c11 = 10.0;
   const auto r = brute_force(bowl, t, 0.3, {2000});
   CHECK_FALSE(r.feasible);
   CHECK(r.loss > 1.0);
   const auto ok = brute_force(bowl, zero_targets(), 0.3, {20000});
   CHECK(ok.loss < 1e-4);
}

TEST_CASE("result does not depend on worker count")
{
   const Surrogate s = [](double d, double D, double nu) {
      return std::array<double, 3>{std::cos(3 * d + D), d * D - nu, 0.0};
   };
   InverseTarget t;
   t.c11 = 0.5;
   t.c12 = -0.25;
   InverseOptions a{20000, 1e-6, 0.01, 1};
   InverseOptions b{20000, 1e-6, 0.01, 8};
   const auto ra = brute_force(s, t, 0.3, a), rb = brute_force(s, t, 0.3, b);
   CHECK(ra.to_json(false).dump() == rb.to_json(false).dump());
   CHECK(ra.to_json().contains("elapsed_s"));
   CHECK_FALSE(ra.to_json(false).contains("elapsed_s"));
}

TEST_CASE("forest surrogate checks model roles")
{
   Dataset ds;
   ds.meta.shape = VoidShape::Rectangular;
   for (const auto& p : sample_params(30, 1))
      ds.rows.push_back({VoidShape::Rectangular, p.d_rel, p.D_rel, p.nu, 1 - p.D_rel, -p.D_rel, 0.3});
   ds.meta.n_samples = ds.rows.size();
   ForestParams hp;
   hp.n_trees = 3;
   const auto c11 = fit_forest(ds, Target::C11, hp);
   const auto c12 = fit_forest(ds, Target::C12, hp);
   const auto c33 = fit_forest(ds, Target::C33, hp);
   CHECK_THROWS_AS(forest_surrogate(c12, c11, c33), ValidationError);
   const auto s = forest_surrogate(c11, c12, c33);
   const auto y = s(0.1, 0.3, 0.3);
   CHECK(y[0] == 0.5 * (c11.predict(0.1, 0.3, 0.3) + c11.predict(0.3, 0.1, 0.3)));
   CHECK(y[0] == s(0.3, 0.1, 0.3)[0]);
   CHECK(y[2] == doctest::Approx(0.3));
}
