#include "auxetikit/inverse.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "auxetikit/error.hpp"

namespace auxetikit {

InverseTarget InverseTarget::from_stress(std::optional<double> c11, std::optional<double> c12,
                                         std::optional<double> c33, double E)
{
   if (!(E > 0.0) || !std::isfinite(E)) throw ValidationError("E must be positive");
   InverseTarget t;
   if (c11) t.c11 = *c11 / E;
   if (c12) t.c12 = *c12 / E;
   if (c33) t.c33 = *c33 / E;
   return t;
}

void InverseTarget::validate() const
{
   if (count() == 0) throw ValidationError("at least one target constant is required");
   for (const auto& v : {c11, c12, c33})
      if (v && !std::isfinite(*v)) throw ValidationError("target values must be finite");
}

Surrogate forest_surrogate(const ForestModel& c11, const ForestModel& c12, const ForestModel& c33)
{
   if (c11.target != Target::C11 || c12.target != Target::C12 || c33.target != Target::C33)
      throw ValidationError("surrogate models must predict c11, c12 and c33 in that order");
   if (c11.shape != c12.shape || c11.shape != c33.shape) throw ValidationError("surrogate models mix void shapes");
   return [&c11, &c12, &c33](double d, double D, double nu) {
      return std::array<double, 3>{surrogate_predict(c11, d, D, nu), surrogate_predict(c12, d, D, nu),
                                   surrogate_predict(c33, d, D, nu)};
   };
}

double inverse_loss(const std::array<double, 3>& y, const InverseTarget& t)
{
   double s = 0.0;
   if (t.c11) s += (y[0] - *t.c11) * (y[0] - *t.c11);
   if (t.c12) s += (y[1] - *t.c12) * (y[1] - *t.c12);
   if (t.c33) s += (y[2] - *t.c33) * (y[2] - *t.c33);
   return s / t.count();
}

double inverse_loss(const Surrogate& s, double d_rel, double D_rel, double nu, const InverseTarget& target)
{
   target.validate();
   return inverse_loss(s(d_rel, D_rel, nu), target);
}

SearchGrid SearchGrid::for_count(std::size_t eval_count, double margin)
{
   if (eval_count == 0) throw ValidationError("eval_count must be at least 1");
   if (!(margin >= 0.0 && margin < 1.0)) throw ValidationError("margin must be in [0, 1)");
   SearchGrid g;
   g.K = 1;
   while (g.size() < eval_count) ++g.K;
   g.pitch = (1.0 - margin) / g.K;
   return g;
}

nlohmann::ordered_json InverseResult::to_json(bool with_timing) const
{
   nlohmann::ordered_json j;
   j["d_rel"] = d_rel;
   j["D_rel"] = D_rel;
   j["loss"] = loss;
   j["evaluations"] = evaluations;
   if (with_timing) j["elapsed_s"] = elapsed_s;
   j["feasible"] = feasible;
   return j;
}

InverseResult brute_force(const Surrogate& s, const InverseTarget& target, double nu, const InverseOptions& opt)
{
   target.validate();
   const auto t0 = std::chrono::steady_clock::now();
   const SearchGrid grid = SearchGrid::for_count(opt.eval_count, opt.margin);
   const int K = grid.K;

   struct Best {
      double loss = std::numeric_limits<double>::infinity();
      int i = -1;
      int j = -1;
   };
   // Rows i (fixed d_rel) are scanned in order; the first strict minimum wins.
   auto scan_row = [&](int i, Best& best) {
      for (int j = 0; i + j < K; ++j) {
         const double l = inverse_loss(s(i * grid.pitch, j * grid.pitch, nu), target);
         if (l < best.loss) best = Best{l, i, j};
      }
   };

   std::vector<Best> row_best(static_cast<std::size_t>(K));
   std::atomic<int> next{0};
   auto worker = [&] {
      for (int i = next++; i < K; i = next++) scan_row(i, row_best[static_cast<std::size_t>(i)]);
   };
   const int nthreads = std::clamp(opt.workers, 1, K);
   if (nthreads == 1) {
      worker();
   } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
   }

   Best best;
   for (const auto& b : row_best)
      if (b.loss < best.loss) best = b;
   if (best.i < 0) throw DegenerateError("surrogate produced no finite loss on the search grid");

   InverseResult r;
   r.d_rel = best.i * grid.pitch;
   r.D_rel = best.j * grid.pitch;
   r.loss = best.loss;
   r.evaluations = grid.size();
   r.feasible = best.loss <= opt.threshold;
   r.pitch = grid.pitch;
   r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
   return r;
}

} // namespace auxetikit
