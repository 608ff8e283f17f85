#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "auxetikit/forest.hpp"

namespace auxetikit {

/// Desired normalized constants (C/E). Absent entries carry weight 0.
struct InverseTarget {
   std::optional<double> c11;
   std::optional<double> c12;
   std::optional<double> c33;

   /// Targets given in stress units, divided by E.
   static InverseTarget from_stress(std::optional<double> c11, std::optional<double> c12, std::optional<double> c33,
                                    double E);

   int count() const { return int(c11.has_value()) + int(c12.has_value()) + int(c33.has_value()); }
   /// Throws ValidationError when no target is present or a value is non-finite.
   void validate() const;
};

/// Normalized surrogate predictions (C11/E, C12/E, C33/E) at a design point.
using Surrogate = std::function<std::array<double, 3>(double d_rel, double D_rel, double nu)>;

/// The three forest models of one shape as a Surrogate. Models must outlive it.
Surrogate forest_surrogate(const ForestModel& c11, const ForestModel& c12, const ForestModel& c33);

/// Mean squared mismatch over the specified targets.
double inverse_loss(const std::array<double, 3>& predicted, const InverseTarget& target);
double inverse_loss(const Surrogate& s, double d_rel, double D_rel, double nu, const InverseTarget& target);

/// Triangular lattice {(i h, j h) : i, j >= 0, i + j < K} with
/// h = (1 - margin) / K and K the smallest integer with K (K + 1) / 2 >=
/// eval_count. Doubling K refines by pitch halving, so such grids nest.
struct SearchGrid {
   int K = 1;
   double pitch = 1.0;

   static SearchGrid for_count(std::size_t eval_count, double margin = 0.01);
   std::size_t size() const { return static_cast<std::size_t>(K) * (K + 1) / 2; }
};

struct InverseResult {
   double d_rel = 0.0;
   double D_rel = 0.0;
   double loss = 0.0;
   std::size_t evaluations = 0;
   double elapsed_s = 0.0;
   bool feasible = false;
   double pitch = 0.0;

   /// `{d_rel, D_rel, loss, evaluations, elapsed_s, feasible}`; timing is left
   /// out when `with_timing` is false so results can be compared byte-wise.
   nlohmann::ordered_json to_json(bool with_timing = true) const;
};

struct InverseOptions {
   std::size_t eval_count = 20000;
   double threshold = 1e-6;
   double margin = 0.01;
   int workers = 1;
};

/// Exhaustive search of the lattice; ties go to smaller d_rel, then smaller
/// D_rel. Infeasible targets return feasible = false.
InverseResult brute_force(const Surrogate& s, const InverseTarget& target, double nu, const InverseOptions& opt = {});

} // namespace auxetikit
