#include "auxetikit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "auxetikit/error.hpp"

namespace auxetikit {

namespace {

std::string format17(double v)
{
   char buf[40];
   std::snprintf(buf, sizeof buf, "%.17g", v);
   return buf;
}

double relative_error(double pred, double truth)
{
   return std::abs(pred - truth) / std::abs(truth);
}

} // namespace

std::string_view to_string(Evaluator e)
{
   switch (e) {
   case Evaluator::Fft: return "fft";
   case Evaluator::Surrogate: return "surrogate";
   case Evaluator::Both: return "both";
   }
   return "fft";
}

Evaluator evaluator_from_string(std::string_view s)
{
   if (s == "fft") return Evaluator::Fft;
   if (s == "surrogate") return Evaluator::Surrogate;
   if (s == "both") return Evaluator::Both;
   throw ValidationError("unknown evaluator '" + std::string(s) + "' (expected fft, surrogate or both)");
}

void SweepSpec::validate() const
{
   if (!(step > 0.0)) throw ValidationError("sweep step must be positive");
   if (!(D_min >= 0.0) || !(D_max >= D_min)) throw ValidationError("sweep range must satisfy 0 <= D_min <= D_max");
   if (!(d_rel >= 0.0)) throw ValidationError("fixed d_rel must be non-negative");
   if (!(d_rel + D_max < 1.0)) throw ValidationError("sweep range violates d_rel + D_rel < 1");
   BaseMaterial{1.0, nu}.validate();
}

std::vector<double> SweepSpec::D_values() const
{
   std::vector<double> out;
   const auto count = static_cast<long>(std::floor((D_max - D_min) / step + 1e-9)) + 1;
   for (long k = 0; k < count; ++k) out.push_back(std::round((D_min + static_cast<double>(k) * step) * 1e10) / 1e10);
   return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opt, const Surrogate* surrogate)
{
   spec.validate();
   const auto Ds = spec.D_values();
   std::vector<SweepRow> out;

   if (spec.evaluator == Evaluator::Fft || spec.evaluator == Evaluator::Both) {
      GalerkinSolver solver(opt.fft.n);
      std::vector<SweepRow> rows(Ds.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
         for (std::size_t k = next++; k < Ds.size(); k = next++) {
            SweepRow& r = rows[k];
            r.D_rel = Ds[k];
            r.evaluator = "fft";
            try {
               const auto h = homogenize(solver, UnitCellSpec{spec.shape, spec.d_rel, Ds[k], {1.0, spec.nu}}, opt.fft);
               r.c11_over_E = h.stiffness.c11;
               r.c12_over_E = h.stiffness.c12;
               r.c33_over_E = h.stiffness.c33;
               r.nu_eff = nu_eff(h.stiffness);
            } catch (const Error& e) {
               r.ok = false;
               r.error = e.what();
            }
         }
      };
      const int nthreads = std::clamp(opt.workers, 1, static_cast<int>(Ds.size()));
      if (nthreads == 1) {
         worker();
      } else {
         std::vector<std::jthread> pool;
         for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      }
      out.insert(out.end(), rows.begin(), rows.end());
   }

   if (spec.evaluator == Evaluator::Surrogate || spec.evaluator == Evaluator::Both) {
      if (!surrogate) throw ValidationError("surrogate sweep requires trained models");
      for (double D : Ds) {
         SweepRow r;
         r.D_rel = D;
         r.evaluator = "surrogate";
         const auto y = (*surrogate)(spec.d_rel, D, spec.nu);
         r.c11_over_E = y[0];
         r.c12_over_E = y[1];
         r.c33_over_E = y[2];
         try {
            r.nu_eff = nu_eff(EffectiveStiffness{y[0], y[1], y[2], {}});
         } catch (const DegenerateError& e) {
            r.ok = false;
            r.error = e.what();
         }
         out.push_back(r);
      }
   }
   return out;
}

std::vector<SweepRow> select(const std::vector<SweepRow>& rows, std::string_view evaluator)
{
   std::vector<SweepRow> out;
   for (const auto& r : rows)
      if (r.evaluator == evaluator) out.push_back(r);
   return out;
}

double onset(const std::vector<SweepRow>& rows)
{
   for (const auto& r : rows)
      if (r.ok && r.nu_eff <= 0.0) return r.D_rel;
   throw Error("no onset in range: nu_eff stays positive");
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out)
{
   out << "D_rel,c11_over_E,c12_over_E,c33_over_E,nu_eff,evaluator\n";
   for (const auto& r : rows) {
      if (!r.ok) {
         out << format17(r.D_rel) << ",nan,nan,nan,nan," << r.evaluator << '\n';
         continue;
      }
      out << format17(r.D_rel) << ',' << format17(r.c11_over_E) << ',' << format17(r.c12_over_E) << ','
          << format17(r.c33_over_E) << ',' << format17(r.nu_eff) << ',' << r.evaluator << '\n';
   }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in)
{
   std::string line;
   if (!std::getline(in, line) || line != "D_rel,c11_over_E,c12_over_E,c33_over_E,nu_eff,evaluator")
      throw FormatError("line 1: not a sweep CSV header");
   std::vector<SweepRow> rows;
   std::size_t lineno = 1;
   while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      if (f.size() != 6) throw FormatError("line " + std::to_string(lineno) + ": expected 6 fields");
      SweepRow r;
      try {
         r.D_rel = std::stod(f[0]);
         if (f[1] == "nan") {
            r.ok = false;
         } else {
            r.c11_over_E = std::stod(f[1]);
            r.c12_over_E = std::stod(f[2]);
            r.c33_over_E = std::stod(f[3]);
            r.nu_eff = std::stod(f[4]);
         }
      } catch (const std::logic_error&) {
         throw FormatError("line " + std::to_string(lineno) + ": malformed number");
      }
      r.evaluator = f[5];
      rows.push_back(r);
   }
   return rows;
}

double quantile_sorted(const std::vector<double>& s, double p)
{
   if (s.empty()) throw ValidationError("quantile of empty data");
   const double pos = p * static_cast<double>(s.size() - 1);
   const auto lo = static_cast<std::size_t>(std::floor(pos));
   const std::size_t hi = std::min(lo + 1, s.size() - 1);
   return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

BoxStats box_stats(std::vector<double> v)
{
   if (v.empty()) throw ValidationError("box statistics need at least one value");
   std::sort(v.begin(), v.end());
   BoxStats b;
   b.count = v.size();
   b.min = v.front();
   b.max = v.back();
   b.q1 = quantile_sorted(v, 0.25);
   b.median = quantile_sorted(v, 0.5);
   b.q3 = quantile_sorted(v, 0.75);
   const double iqr = b.q3 - b.q1;
   const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
   b.whisker_low = b.q1;
   b.whisker_high = b.q3;
   for (double x : v) {
      if (x < lo_fence || x > hi_fence) {
         ++b.outliers;
         continue;
      }
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
   }
   return b;
}

std::vector<SizeStudyEntry> size_study(const Dataset& ds, const std::vector<std::size_t>& sizes,
                                       const std::vector<SweepRow>& truth, const SweepSpec& spec, Target target,
                                       const ForestParams& hp, int workers)
{
   std::vector<SizeStudyEntry> out;
   for (std::size_t size : sizes) {
      if (size > ds.rows.size() || size == 0) {
         std::fprintf(stderr, "warning: skipping dataset size %zu (have %zu rows)\n", size, ds.rows.size());
         continue;
      }
      const ForestModel m = fit_forest(ds.prefix(size), target, hp, workers);
      SizeStudyEntry e;
      e.size = size;
      for (const auto& r : truth) {
         if (!r.ok || r.evaluator != "fft") continue;
         const double t = target == Target::C11 ? r.c11_over_E : target == Target::C12 ? r.c12_over_E : r.c33_over_E;
         if (t == 0.0) continue;
         e.errors.push_back(relative_error(surrogate_predict(m, spec.d_rel, r.D_rel, spec.nu), t));
      }
      e.stats = box_stats(e.errors);
      out.push_back(std::move(e));
   }
   return out;
}

std::vector<std::size_t> full_sizes()
{
   return {3000, 6000, 12000, 24000, 48000};
}

std::vector<std::size_t> desk_sizes()
{
   std::vector<std::size_t> out;
   for (auto s : full_sizes()) out.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(s) / 16.0)));
   return out;
}

void write_size_study_csv(const std::vector<SizeStudyEntry>& entries, std::ostream& out)
{
   out << "size,count,median,q1,q3,whisker_low,whisker_high,min,max,outliers\n";
   for (const auto& e : entries) {
      const auto& b = e.stats;
      out << e.size << ',' << b.count << ',' << format17(b.median) << ',' << format17(b.q1) << ',' << format17(b.q3)
          << ',' << format17(b.whisker_low) << ',' << format17(b.whisker_high) << ',' << format17(b.min) << ','
          << format17(b.max) << ',' << b.outliers << '\n';
   }
}

} // namespace auxetikit
