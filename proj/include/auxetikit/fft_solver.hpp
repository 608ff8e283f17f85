#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "auxetikit/elasticity.hpp"
#include "auxetikit/geometry.hpp"

namespace auxetikit {

using cplx = std::complex<double>;
using Voigt3 = std::array<double, 3>;

/// Discrete frequencies of an n x n periodic grid. Entries are stored in the
/// centered ordering q_m = 2 pi (n_m - n/2) / n, n_m = 0..n-1, row-major in
/// (n1, n2). Use `centered_index` to map an FFT-native index onto it.
struct FrequencyGrid {
   int n = 0;
   double cell_length = 1.0;
   std::vector<std::array<cplx, 2>> xi;      ///< i q_m n / L
   std::vector<std::array<cplx, 2>> xi_rot;  ///< rotated-scheme frequencies
   std::vector<std::uint8_t> nyquist_mask;   ///< some q_m == -pi
   std::vector<std::uint8_t> zero_mask;      ///< q == 0

   std::size_t index(int n1, int n2) const { return static_cast<std::size_t>(n1) * n + n2; }
   static int centered_index(int fft_index, int n) { return (fft_index + n / 2) % n; }
   static double q(int centered, int n);
};

FrequencyGrid build_frequencies(int n, double cell_length = 1.0);

/// 3x3 complex block of the Galerkin projection at one frequency, acting on
/// Voigt vectors with engineering shear. Zero when `xi` vanishes.
std::array<cplx, 9> projection_block(const std::array<cplx, 2>& xi);

/// Per-pixel 3-component Voigt field in real space. Storage is three
/// contiguous n x n planes (component-major), pixel (i, j) at i * n + j.
class TensorField2 {
public:
   TensorField2() = default;
   explicit TensorField2(int n) : n_(n), data_(3 * static_cast<std::size_t>(n) * n, 0.0) {}

   int n() const { return n_; }
   std::size_t pixels() const { return static_cast<std::size_t>(n_) * n_; }
   double& at(int c, int i, int j) { return data_[c * pixels() + static_cast<std::size_t>(i) * n_ + j]; }
   double at(int c, int i, int j) const { return data_[c * pixels() + static_cast<std::size_t>(i) * n_ + j]; }
   std::span<double> plane(int c) { return {data_.data() + c * pixels(), pixels()}; }
   std::span<const double> plane(int c) const { return {data_.data() + c * pixels(), pixels()}; }
   std::vector<double>& values() { return data_; }
   const std::vector<double>& values() const { return data_; }

   Voigt3 mean() const;

private:
   int n_ = 0;
   std::vector<double> data_;
};

/// Half-spectrum (real-to-complex layout) of a TensorField2: three planes of
/// n x (n/2 + 1) coefficients with FFT-native indices (k1, k2).
class SpectralField2 {
public:
   SpectralField2() = default;
   explicit SpectralField2(int n) : n_(n), data_(3 * static_cast<std::size_t>(n) * (n / 2 + 1)) {}

   int n() const { return n_; }
   int half() const { return n_ / 2 + 1; }
   std::size_t size_per_component() const { return static_cast<std::size_t>(n_) * half(); }
   cplx& at(int c, int k1, int k2) { return data_[c * size_per_component() + static_cast<std::size_t>(k1) * half() + k2]; }
   cplx at(int c, int k1, int k2) const { return data_[c * size_per_component() + static_cast<std::size_t>(k1) * half() + k2]; }
   std::vector<cplx>& values() { return data_; }
   const std::vector<cplx>& values() const { return data_; }

private:
   int n_ = 0;
   std::vector<cplx> data_;
};

/// Phase-wise constitutive map. Phase 0 is conventionally the void.
struct Microstructure {
   int n = 0;
   std::vector<std::uint8_t> phase;
   std::vector<VoigtMatrix3> stiffness;

   /// Solid pixels get `solid`; void pixels get `void_stiffness` (zero unless
   /// a finite contrast is requested for diagnostics).
   static Microstructure from_grid(const PixelGrid& grid, const VoigtMatrix3& solid,
                                   const VoigtMatrix3& void_stiffness = {});
   const VoigtMatrix3& at(std::size_t pixel) const { return stiffness[phase[pixel]]; }
};

struct SolveReport {
   int iterations = 0;
   double residual = 0.0;
   bool converged = true;
};

enum class StiffnessMethod { Perturbation, Sensitivity };
enum class Scheme { Rotated, Spectral };

std::string_view to_string(StiffnessMethod m);
StiffnessMethod method_from_string(std::string_view s);

struct SolverOptions {
   double tolerance = 1e-6;
   int max_iterations = 0;  ///< 0 selects 10 * n
   /// Macroscopic strain magnitude used by the perturbation method.
   static constexpr double perturbation = 1.0;
};

/// Frobenius inner product of Voigt fields with engineering shear: the third
/// component is weighted by 1/2.
double field_dot(std::span<const double> a, std::span<const double> b, std::size_t plane_size);

/// Matrix-free Galerkin FFT operator on an n x n grid. Immutable after
/// construction; each call allocates its own scratch buffers, so one instance
/// may be shared between threads.
class GalerkinSolver {
public:
   explicit GalerkinSolver(int n, double cell_length = 1.0, Scheme scheme = Scheme::Rotated);
   ~GalerkinSolver();
   GalerkinSolver(const GalerkinSolver&) = delete;
   GalerkinSolver& operator=(const GalerkinSolver&) = delete;

   int n() const { return n_; }
   const FrequencyGrid& frequencies() const { return freq_; }

   SpectralField2 forward(const TensorField2& f) const;
   /// Inverse transform including the 1/n^2 normalization.
   TensorField2 inverse(const SpectralField2& f) const;

   /// In-place projection of a half-spectrum Voigt field (engineering shear).
   void project(SpectralField2& f) const;

   /// G * s for a stress field s (tensor shear); output is a strain-like field.
   TensorField2 project_stress(const TensorField2& stress) const;

   /// Left-hand operator G * (D : eps).
   TensorField2 apply(const TensorField2& eps, const Microstructure& m) const;

   /// Solves G * (D : (macro + eps)) = 0 for the zero-mean fluctuation eps.
   TensorField2 solve(const Microstructure& m, const Voigt3& macro, const SolverOptions& opt,
                      SolveReport& report) const;

   /// Solves for the three columns of d(eps)/d(macro) as one stacked system.
   std::array<TensorField2, 3> solve_sensitivity(const Microstructure& m, const SolverOptions& opt,
                                                 SolveReport& report) const;

   VoigtMatrix3 stiffness_perturbation(const Microstructure& m, const SolverOptions& opt, SolveReport& report) const;
   VoigtMatrix3 stiffness_sensitivity(const Microstructure& m, const SolverOptions& opt, SolveReport& report) const;

private:
   struct Plans;

   void apply_into(std::span<const double> eps, const Microstructure& m, std::span<double> out) const;

   int n_;
   Scheme scheme_;
   FrequencyGrid freq_;
   std::vector<std::array<cplx, 9>> blocks_;  // half-spectrum projector
   std::unique_ptr<Plans> plans_;
};

/// Volume average of D(x) : eps(x).
Voigt3 average_stress(const Microstructure& m, const TensorField2& total_strain);

// Convenience entry points mirroring the operations above on a binary grid.

SpectralField2 apply_projection(const SpectralField2& field, const FrequencyGrid& fg);
TensorField2 apply_operator(const TensorField2& eps_tilde, const PixelGrid& grid, const VoigtMatrix3& D_solid);

struct EquilibriumSolution {
   TensorField2 eps_tilde;
   SolveReport report;
};

EquilibriumSolution solve_equilibrium(const PixelGrid& grid, const VoigtMatrix3& D_solid, const Voigt3& macro,
                                      double tol = 1e-6, int max_iter = 0);

EffectiveStiffness effective_stiffness_perturbation(const PixelGrid& grid, const VoigtMatrix3& D_solid,
                                                    double tol = 1e-6, SolveReport* report = nullptr);
EffectiveStiffness effective_stiffness_sensitivity(const PixelGrid& grid, const VoigtMatrix3& D_solid,
                                                   double tol = 1e-6, SolveReport* report = nullptr);

struct HomogenizeOptions {
   int n = 256;
   double tolerance = 1e-6;
   StiffnessMethod method = StiffnessMethod::Sensitivity;
   Regime regime = Regime::PlaneStrain;
   int max_iterations = 0;
};

struct HomogenizeResult {
   EffectiveStiffness stiffness;
   SolveReport report;
};

/// Rasterize, solve at E = 1 and rescale to spec.material.E. Throws
/// ConvergenceError when the solve does not reach the tolerance.
HomogenizeResult homogenize(const UnitCellSpec& spec, const HomogenizeOptions& opt = {});

/// Same, reusing an existing solver of matching size.
HomogenizeResult homogenize(const GalerkinSolver& solver, const UnitCellSpec& spec, const HomogenizeOptions& opt);

} // namespace auxetikit
