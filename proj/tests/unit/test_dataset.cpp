#include <doctest.h>

#include <sstream>

#include "auxetikit/dataset.hpp"
#include "auxetikit/error.hpp"

using namespace auxetikit;

namespace {

Dataset synthetic(std::size_t count)
{
   Dataset ds;
   ds.meta.shape = VoidShape::Oval;
   ds.meta.requested = ds.meta.sampled = ds.meta.n_samples = count;
   ds.meta.grid_n = 32;
   ds.meta.rng_seed = 9;
   for (std::size_t k = 0; k < count; ++k) {
      const auto p = sample_at(k, 9);
      ds.rows.push_back({VoidShape::Oval, p.d_rel, p.D_rel, p.nu, 0.1 + p.d_rel / 3, -0.01 * p.D_rel, 1.0 / 7.0 + k});
   }
   return ds;
}

std::string serialize(const Dataset& ds)
{
   std::ostringstream os;
   write_dataset(ds, os);
   return os.str();
}

std::string read_error(const std::string& text, std::optional<VoidShape> shape = std::nullopt)
{
   std::istringstream is(text);
   try {
      read_dataset(is, shape);
   } catch (const FormatError& e) {
      return e.what();
   }
   return "";
}

} // namespace

TEST_CASE("sample_params stays in the feasible triangle")
{
   const auto s = sample_params(1000, 42);
   REQUIRE(s.size() == 1000);
   for (const auto& p : s) {
      CHECK(p.d_rel >= 0.0);
      CHECK(p.D_rel >= 0.0);
      CHECK(p.d_rel + p.D_rel < 1.0);
      CHECK(p.nu >= kNuMin);
      CHECK(p.nu < kNuMax);
   }
}

TEST_CASE("sample_params nu mean and triangle uniformity")
{
   const auto s = sample_params(100000, 3);
   double nu = 0.0, d = 0.0, D = 0.0;
   for (const auto& p : s) {
      nu += p.nu;
      d += p.d_rel;
      D += p.D_rel;
   }
   CHECK(std::abs(nu / 1e5 - 0.3) <= 0.002);
   // Uniform on the triangle: each coordinate has mean 1/3.
   CHECK(std::abs(d / 1e5 - 1.0 / 3.0) <= 0.005);
   CHECK(std::abs(D / 1e5 - 1.0 / 3.0) <= 0.005);
}

TEST_CASE("sample_params is deterministic and prefix-stable")
{
   const auto a = sample_params(50, 7), b = sample_params(50, 7), c = sample_params(20, 7);
   for (std::size_t k = 0; k < 50; ++k) {
      CHECK(a[k].d_rel == b[k].d_rel);
      CHECK(a[k].nu == b[k].nu);
   }
   for (std::size_t k = 0; k < 20; ++k) CHECK(a[k].D_rel == c[k].D_rel);
   CHECK(sample_params(1, 8)[0].d_rel != a[0].d_rel);
}

TEST_CASE("generate smoke run")
{
   GenerateOptions opt;
   opt.count = 10;
   opt.grid_n = 32;
   opt.seed = 5;
   const auto ds = generate(opt);
   CHECK(ds.rows.size() == 10);
   CHECK(ds.meta.n_samples == 10);
   CHECK(ds.meta.requested == 10);
   CHECK(ds.meta.sampled == 10 + ds.meta.failures + ds.meta.degenerate);
   CHECK(ds.meta.grid_n == 32);
   CHECK(ds.meta.rng_seed == 5);
   const std::string text = serialize(ds);
   CHECK(text.rfind("#meta: {\"shape\":\"rect\"", 0) == 0);
   CHECK(text.find("\"generator_version\":\"auxetikit-dataset/1\"") != std::string::npos);
}

TEST_CASE("generated constants are bounded by the solid cell")
{
   GenerateOptions opt;
   opt.count = 100;
   opt.grid_n = 64;
   opt.seed = 2;
   const auto ds = generate(opt);
   REQUIRE(ds.rows.size() == 100);
   for (const auto& r : ds.rows) {
      // Nearly disconnected cells carry shear stiffness at the solver tolerance.
      CHECK(r.c33_over_E > -1e-6);
      CHECK(r.c33_over_E <= 0.5);
      CHECK(r.c11_over_E > 0.0);
      // Bounded above by the solid plane-strain constants at the row's nu.
      const auto d = base_stiffness({1.0, r.nu});
      CHECK(r.c11_over_E <= d(0, 0) * (1 + 1e-6));
   }
}

TEST_CASE("generate output does not depend on worker count")
{
   GenerateOptions opt;
   opt.count = 12;
   opt.grid_n = 32;
   opt.seed = 17;
   opt.shape = VoidShape::Peanut;
   const auto one = generate(opt);
   opt.workers = 4;
   const auto four = generate(opt);
   CHECK(serialize(one) == serialize(four));
   CHECK(fingerprint(one) == fingerprint(four));
}

TEST_CASE("generate rows are a prefix of a longer run")
{
   GenerateOptions opt;
   opt.count = 6;
   opt.grid_n = 32;
   opt.seed = 4;
   const auto small = generate(opt);
   opt.count = 9;
   const auto large = generate(opt);
   for (std::size_t k = 0; k < 6; ++k) CHECK(small.rows[k] == large.rows[k]);
}

TEST_CASE("generate validates options")
{
   GenerateOptions opt;
   opt.count = 0;
   CHECK_THROWS_AS(generate(opt), ValidationError);
   opt.count = 1;
   opt.workers = 0;
   CHECK_THROWS_AS(generate(opt), ValidationError);
}

TEST_CASE("dataset round trip is exact")
{
   const auto ds = synthetic(100);
   std::istringstream is(serialize(ds));
   const auto back = read_dataset(is, VoidShape::Oval);
   CHECK(back.meta == ds.meta);
   REQUIRE(back.rows.size() == 100);
   for (std::size_t k = 0; k < 100; ++k) CHECK(back.rows[k] == ds.rows[k]);
   CHECK(fingerprint(back) == fingerprint(ds));
   CHECK(fingerprint(ds.prefix(99)) != fingerprint(ds));
   CHECK(ds.prefix(40).meta.n_samples == 40);
   CHECK(ds.prefix(1000).rows.size() == 100);
}

TEST_CASE("dataset read errors")
{
   const std::string good = serialize(synthetic(3));
   const auto lines_end = good.find('\n', good.find('\n') + 1) + 1;
   const std::string head = good.substr(0, lines_end);

   CHECK(read_error("shape,d_rel\n").find("line 1") != std::string::npos);
   CHECK(read_error(good, VoidShape::Rectangular).find("does not match expected") != std::string::npos);

   std::string bad_sum = good;
   const auto first_row = bad_sum.find("oval,", lines_end);
   const auto after_first_row = bad_sum.find('\n', first_row) + 1;
   bad_sum.insert(after_first_row, "oval,0.5,0.5,0.3,0.1,0.0,0.1\n");
   const std::string e1 = read_error(bad_sum);
   CHECK(e1.find("line 4") != std::string::npos);
   CHECK(e1.find("d_rel + D_rel < 1") != std::string::npos);

   CHECK(read_error(head + "oval,0.1,0.2,0.3,nan,0,0.1\n").find("non-finite") != std::string::npos);
   CHECK(read_error(head + "oval,0.1,0.2,0.3\n").find("expected 7 fields") != std::string::npos);
   CHECK(read_error(head + "rect,0.1,0.2,0.3,0.1,0,0.1\n").find("shape differs") != std::string::npos);
   CHECK(read_error(head + "oval,0.1,0.2,0.9,0.1,0,0.1\n").find("nu outside") != std::string::npos);
   CHECK(read_error(head + "oval,0.1,abc,0.3,0.1,0,0.1\n").find("cannot parse D_rel") != std::string::npos);
   // Meta declares 3 rows but only the header follows.
   CHECK(read_error(head).find("meta declares 3 rows") != std::string::npos);
   CHECK_THROWS_AS(read_dataset(std::string("/nonexistent/file.csv")), Error);
}
