#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "auxetikit/fft_solver.hpp"
#include "auxetikit/geometry.hpp"

namespace auxetikit {

inline constexpr const char* kGeneratorVersion = "auxetikit-dataset/1";

/// Lower and upper bound of the sampled base-material Poisson's ratio.
inline constexpr double kNuMin = 0.2;
inline constexpr double kNuMax = 0.4;

struct SampleParams {
   double d_rel = 0.0;
   double D_rel = 0.0;
   double nu = 0.3;
};

struct SampleRow {
   VoidShape shape = VoidShape::Rectangular;
   double d_rel = 0.0;
   double D_rel = 0.0;
   double nu = 0.3;
   double c11_over_E = 0.0;
   double c12_over_E = 0.0;
   double c33_over_E = 0.0;

   friend bool operator==(const SampleRow&, const SampleRow&) = default;
};

struct DatasetMeta {
   VoidShape shape = VoidShape::Rectangular;
   std::size_t n_samples = 0;   ///< rows present
   std::size_t requested = 0;   ///< rows asked for
   std::size_t sampled = 0;     ///< sample streams consumed
   std::size_t failures = 0;    ///< solves that did not converge
   std::size_t degenerate = 0;  ///< rasters without load-bearing solid
   int grid_n = 128;
   double tolerance = 1e-6;
   Regime regime = Regime::PlaneStrain;
   StiffnessMethod method = StiffnessMethod::Sensitivity;
   std::uint64_t rng_seed = 0;
   std::string sampling = "uniform";
   std::string generator_version = kGeneratorVersion;

   friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct Dataset {
   DatasetMeta meta;
   std::vector<SampleRow> rows;

   /// First `count` rows, with meta adjusted.
   Dataset prefix(std::size_t count) const;
};

/// Rows with C11/E below this are treated as disconnected rasters.
inline constexpr double kDegenerateC11 = 1e-6;

/// Uniform samples: nu ~ U[0.2, 0.4], (d, D) uniform on the triangle
/// d + D < 1 by rejection. Sample k draws from its own stream split from
/// `seed`, so any prefix of a longer run is reproduced exactly.
std::vector<SampleParams> sample_params(std::size_t count, std::uint64_t seed);
SampleParams sample_at(std::size_t k, std::uint64_t seed);

struct GenerateOptions {
   VoidShape shape = VoidShape::Rectangular;
   std::size_t count = 100;
   int grid_n = 128;
   double tolerance = 1e-6;
   std::uint64_t seed = 1;
   int workers = 1;
   Regime regime = Regime::PlaneStrain;
   StiffnessMethod method = StiffnessMethod::Sensitivity;
   /// Called after each completed sample with (done, total); may be empty.
   std::function<void(std::size_t, std::size_t)> progress;
};

/// Homogenizes samples at E = 1 until `count` rows exist, in sample order.
/// Samples whose solve fails or whose raster is disconnected (C11/E below
/// kDegenerateC11) are dropped, counted, and replaced by the next streams.
/// More than 1% solver failures throws ConvergenceError.
Dataset generate(const GenerateOptions& opt);

/// CSV with a leading `#meta: {json}` line and 17 significant digits.
void write_dataset(const Dataset& ds, std::ostream& out);
void write_dataset(const Dataset& ds, const std::string& path);

/// Parses and validates a dataset. Throws FormatError naming the offending
/// line on schema violations, non-finite values or d + D >= 1.
Dataset read_dataset(std::istream& in, std::optional<VoidShape> expected_shape = std::nullopt);
Dataset read_dataset(const std::string& path, std::optional<VoidShape> expected_shape = std::nullopt);

/// FNV-1a hash of the serialized rows, as a hex string.
std::string fingerprint(const Dataset& ds);

} // namespace auxetikit
