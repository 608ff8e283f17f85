#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "auxetikit/fft_solver.hpp"
#include "auxetikit/forest.hpp"
#include "auxetikit/inverse.hpp"

namespace auxetikit {

enum class Evaluator { Fft, Surrogate, Both };

std::string_view to_string(Evaluator e);
Evaluator evaluator_from_string(std::string_view s);

struct SweepSpec {
   VoidShape shape = VoidShape::Rectangular;
   double d_rel = 0.05;
   double nu = 0.3;
   double D_min = 0.05;
   double D_max = 0.9;
   double step = 0.01;
   Evaluator evaluator = Evaluator::Fft;

   void validate() const;
   /// Ascending D_rel values D_min + k * step, rounded to 1e-10.
   std::vector<double> D_values() const;
};

struct SweepRow {
   double D_rel = 0.0;
   double c11_over_E = 0.0;
   double c12_over_E = 0.0;
   double c33_over_E = 0.0;
   double nu_eff = 0.0;
   std::string evaluator;  ///< "fft" or "surrogate"
   bool ok = true;
   std::string error;
};

struct SweepOptions {
   HomogenizeOptions fft{128};
   int workers = 1;
};

/// Evaluates the sweep. For Evaluator::Both the FFT rows come first, then the
/// surrogate rows, each block ascending in D_rel. Solver failures are kept as
/// rows with ok = false.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opt, const Surrogate* surrogate = nullptr);

/// Rows of one evaluator.
std::vector<SweepRow> select(const std::vector<SweepRow>& rows, std::string_view evaluator);

/// Smallest tabulated D_rel with nu_eff <= 0, scanning rows in order. Throws
/// Error("no onset in range") when there is none.
double onset(const std::vector<SweepRow>& rows);

/// CSV `D_rel,c11_over_E,c12_over_E,c33_over_E,nu_eff,evaluator`.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
/// Inverse of write_sweep_csv; "nan" rows come back with ok = false.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Box-plot summary with 1.5 IQR whiskers; quartiles by linear interpolation.
struct BoxStats {
   std::size_t count = 0;
   double median = 0.0;
   double q1 = 0.0;
   double q3 = 0.0;
   double whisker_low = 0.0;
   double whisker_high = 0.0;
   double min = 0.0;
   double max = 0.0;
   std::size_t outliers = 0;
};

BoxStats box_stats(std::vector<double> values);
/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

struct SizeStudyEntry {
   std::size_t size = 0;
   BoxStats stats;
   std::vector<double> errors;
};

/// For each size, trains a forest on the first `size` rows of `ds` and
/// reports |pred - truth| / |truth| over the ok rows of `truth` (an FFT sweep
/// with spec.d_rel and spec.nu). Sizes larger than the dataset are skipped.
std::vector<SizeStudyEntry> size_study(const Dataset& ds, const std::vector<std::size_t>& sizes,
                                       const std::vector<SweepRow>& truth, const SweepSpec& spec, Target target,
                                       const ForestParams& hp, int workers = 1);

/// Full-scale dataset sizes 3k..48k, doubling.
std::vector<std::size_t> full_sizes();
/// Desk-scale dataset sizes: full_sizes() divided by 16.
std::vector<std::size_t> desk_sizes();

void write_size_study_csv(const std::vector<SizeStudyEntry>& entries, std::ostream& out);

} // namespace auxetikit
