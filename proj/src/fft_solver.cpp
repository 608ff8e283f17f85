#include "auxetikit/fft_solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "auxetikit/error.hpp"
#include "auxetikit/minres.hpp"

namespace auxetikit {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex()
{
   static std::mutex m;
   return m;
}

constexpr std::array<double, 3> kVoigtWeight{1.0, 1.0, 0.5};

template <class T>
struct FftwDeleter {
   void operator()(T* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t count)
{
   void* p = fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1));
   if (p == nullptr) throw std::bad_alloc();
   return FftwBuffer<T>(static_cast<T*>(p));
}

bool is_zero(const VoigtMatrix3& m)
{
   for (double v : m.data())
      if (v != 0.0) return false;
   return true;
}

void accumulate_report(SolveReport& total, const krylov::MinresResult& r, bool first)
{
   if (first) total = SolveReport{0, 0.0, true};
   total.iterations += r.iterations;
   total.residual = std::max(total.residual, r.residual);
   total.converged = total.converged && r.converged;
}

} // namespace

// ---------------------------------------------------------------------------
// Frequencies and projection

double FrequencyGrid::q(int centered, int n)
{
   return 2.0 * std::numbers::pi * (centered - n / 2) / n;
}

FrequencyGrid build_frequencies(int n, double cell_length)
{
   if (n < 2 || n % 2 != 0) throw ValidationError("grid size must be even");
   FrequencyGrid fg;
   fg.n = n;
   fg.cell_length = cell_length;
   const std::size_t total = static_cast<std::size_t>(n) * n;
   fg.xi.resize(total);
   fg.xi_rot.resize(total);
   fg.nyquist_mask.assign(total, 0);
   fg.zero_mask.assign(total, 0);
   const cplx I(0.0, 1.0);
   const double scale = n / cell_length;
   for (int n1 = 0; n1 < n; ++n1) {
      for (int n2 = 0; n2 < n; ++n2) {
         const std::size_t k = fg.index(n1, n2);
         const std::array<double, 2> q{FrequencyGrid::q(n1, n), FrequencyGrid::q(n2, n)};
         fg.xi[k] = {I * q[0] * scale, I * q[1] * scale};
         const bool nyquist = n1 == 0 || n2 == 0;
         const bool zero = n1 == n / 2 && n2 == n / 2;
         fg.nyquist_mask[k] = nyquist;
         fg.zero_mask[k] = zero;
         if (nyquist || zero) {
            // tan(q/2) diverges at q = -pi while the averaging factor vanishes.
            fg.xi_rot[k] = {0.0, 0.0};
            continue;
         }
         cplx avg = 1.0;
         for (double qm : q) avg *= 0.5 * (1.0 + std::exp(-I * qm));
         for (int m = 0; m < 2; ++m) fg.xi_rot[k][m] = I * (2.0 * scale) * std::tan(0.5 * q[m]) * avg;
      }
   }
   return fg;
}

std::array<cplx, 9> projection_block(const std::array<cplx, 2>& xi_in)
{
   std::array<cplx, 9> block{};
   const double scale = std::max(std::abs(xi_in[0]), std::abs(xi_in[1]));
   if (scale == 0.0) return block;
   // The projector depends only on the direction of xi.
   const cplx x1 = xi_in[0] / scale;
   const cplx x2 = xi_in[1] / scale;
   const cplx c1 = std::conj(x1);
   const cplx c2 = std::conj(x2);
   const double s = std::norm(x1) + std::norm(x2);
   // M = B^H B for B u = sym(xi (x) u): M_jk = (s delta_jk + xi_j conj(xi_k)) / 2
   const cplx m00 = 0.5 * (s + std::norm(x1));
   const cplx m01 = 0.5 * x1 * c2;
   const cplx m10 = 0.5 * x2 * c1;
   const cplx m11 = 0.5 * (s + std::norm(x2));
   const cplx det = m00 * m11 - m01 * m10;
   if (std::abs(det) < 1e-14) throw Error("singular acoustic tensor at a non-masked frequency");
   const cplx i00 = m11 / det, i01 = -m01 / det, i10 = -m10 / det, i11 = m00 / det;

   for (int col = 0; col < 3; ++col) {
      // Engineering-shear input -> tensor components.
      const cplx t11 = col == 0 ? 1.0 : 0.0;
      const cplx t22 = col == 1 ? 1.0 : 0.0;
      const cplx t12 = col == 2 ? 0.5 : 0.0;
      const cplx v1 = c1 * t11 + c2 * t12;
      const cplx v2 = c1 * t12 + c2 * t22;
      const cplx u1 = i00 * v1 + i01 * v2;
      const cplx u2 = i10 * v1 + i11 * v2;
      block[0 * 3 + col] = x1 * u1;
      block[1 * 3 + col] = x2 * u2;
      block[2 * 3 + col] = x1 * u2 + x2 * u1;
   }
   return block;
}

SpectralField2 apply_projection(const SpectralField2& field, const FrequencyGrid& fg)
{
   const int n = field.n();
   if (n != fg.n) throw ValidationError("field and frequency grid sizes differ");
   SpectralField2 out(n);
   for (int k1 = 0; k1 < n; ++k1) {
      for (int k2 = 0; k2 < field.half(); ++k2) {
         const std::size_t idx = fg.index(FrequencyGrid::centered_index(k1, n), FrequencyGrid::centered_index(k2, n));
         const auto g = projection_block(fg.xi_rot[idx]);
         for (int r = 0; r < 3; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < 3; ++c) acc += g[3 * r + c] * field.at(c, k1, k2);
            out.at(r, k1, k2) = acc;
         }
      }
   }
   return out;
}

// ---------------------------------------------------------------------------
// Fields and microstructure

Voigt3 TensorField2::mean() const
{
   Voigt3 m{};
   for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (double v : plane(c)) s += v;
      m[c] = s / static_cast<double>(pixels());
   }
   return m;
}

Microstructure Microstructure::from_grid(const PixelGrid& grid, const VoigtMatrix3& solid,
                                         const VoigtMatrix3& void_stiffness)
{
   Microstructure m;
   m.n = grid.n();
   m.phase = grid.indicator();
   m.stiffness = {void_stiffness, solid};
   return m;
}

double field_dot(std::span<const double> a, std::span<const double> b, std::size_t plane_size)
{
   double total = 0.0;
   const std::size_t planes = a.size() / plane_size;
   for (std::size_t p = 0; p < planes; ++p) {
      double s = 0.0;
      const double* pa = a.data() + p * plane_size;
      const double* pb = b.data() + p * plane_size;
      for (std::size_t k = 0; k < plane_size; ++k) s += pa[k] * pb[k];
      total += kVoigtWeight[p % 3] * s;
   }
   return total;
}

Voigt3 average_stress(const Microstructure& m, const TensorField2& strain)
{
   Voigt3 acc{};
   const std::size_t np = strain.pixels();
   const auto e0 = strain.plane(0), e1 = strain.plane(1), e2 = strain.plane(2);
   for (std::size_t p = 0; p < np; ++p) {
      const auto s = m.at(p).apply({e0[p], e1[p], e2[p]});
      for (int c = 0; c < 3; ++c) acc[c] += s[c];
   }
   for (double& v : acc) v /= static_cast<double>(np);
   return acc;
}

// ---------------------------------------------------------------------------
// Solver

struct GalerkinSolver::Plans {
   fftw_plan r2c = nullptr;
   fftw_plan c2r = nullptr;
   ~Plans()
   {
      std::lock_guard lock(planner_mutex());
      if (r2c) fftw_destroy_plan(r2c);
      if (c2r) fftw_destroy_plan(c2r);
   }
};

namespace {

struct Workspace {
   Workspace(int n)
      : real(fftw_buffer<double>(3 * static_cast<std::size_t>(n) * n)),
        spec(fftw_buffer<fftw_complex>(3 * static_cast<std::size_t>(n) * (n / 2 + 1)))
   {
   }
   FftwBuffer<double> real;
   FftwBuffer<fftw_complex> spec;
};

} // namespace

GalerkinSolver::GalerkinSolver(int n, double cell_length, Scheme scheme)
   : n_(n), scheme_(scheme), freq_(build_frequencies(n, cell_length)), plans_(std::make_unique<Plans>())
{
   const int half = n / 2 + 1;
   blocks_.resize(static_cast<std::size_t>(n) * half);
   for (int k1 = 0; k1 < n; ++k1) {
      for (int k2 = 0; k2 < half; ++k2) {
         const std::size_t idx = freq_.index(FrequencyGrid::centered_index(k1, n), FrequencyGrid::centered_index(k2, n));
         auto& block = blocks_[static_cast<std::size_t>(k1) * half + k2];
         if (scheme == Scheme::Rotated) {
            block = projection_block(freq_.xi_rot[idx]);
         } else if (!freq_.nyquist_mask[idx] && !freq_.zero_mask[idx]) {
            block = projection_block(freq_.xi[idx]);
         } else {
            block = {};
         }
      }
   }

   Workspace ws(n);
   const int dims[2] = {n, n};
   const int real_dist = n * n;
   const int spec_dist = n * half;
   std::lock_guard lock(planner_mutex());
   plans_->r2c = fftw_plan_many_dft_r2c(2, dims, 3, ws.real.get(), nullptr, 1, real_dist, ws.spec.get(), nullptr, 1,
                                        spec_dist, FFTW_ESTIMATE);
   plans_->c2r = fftw_plan_many_dft_c2r(2, dims, 3, ws.spec.get(), nullptr, 1, spec_dist, ws.real.get(), nullptr, 1,
                                        real_dist, FFTW_ESTIMATE);
   if (!plans_->r2c || !plans_->c2r) throw Error("FFTW plan creation failed");
}

GalerkinSolver::~GalerkinSolver() = default;

SpectralField2 GalerkinSolver::forward(const TensorField2& f) const
{
   if (f.n() != n_) throw ValidationError("field size does not match solver");
   Workspace ws(n_);
   std::copy(f.values().begin(), f.values().end(), ws.real.get());
   fftw_execute_dft_r2c(plans_->r2c, ws.real.get(), ws.spec.get());
   SpectralField2 out(n_);
   for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = {ws.spec[k][0], ws.spec[k][1]};
   return out;
}

TensorField2 GalerkinSolver::inverse(const SpectralField2& f) const
{
   if (f.n() != n_) throw ValidationError("field size does not match solver");
   Workspace ws(n_);
   for (std::size_t k = 0; k < f.values().size(); ++k) {
      ws.spec[k][0] = f.values()[k].real();
      ws.spec[k][1] = f.values()[k].imag();
   }
   fftw_execute_dft_c2r(plans_->c2r, ws.spec.get(), ws.real.get());
   TensorField2 out(n_);
   const double inv = 1.0 / (static_cast<double>(n_) * n_);
   for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = ws.real[k] * inv;
   return out;
}

namespace {

void project_buffer(fftw_complex* spec, const std::vector<std::array<cplx, 9>>& blocks, std::size_t per_component)
{
   fftw_complex* s0 = spec;
   fftw_complex* s1 = spec + per_component;
   fftw_complex* s2 = spec + 2 * per_component;
   for (std::size_t k = 0; k < per_component; ++k) {
      const auto& g = blocks[k];
      const cplx a(s0[k][0], s0[k][1]);
      const cplx b(s1[k][0], s1[k][1]);
      const cplx c(s2[k][0], s2[k][1]);
      const cplx r0 = g[0] * a + g[1] * b + g[2] * c;
      const cplx r1 = g[3] * a + g[4] * b + g[5] * c;
      const cplx r2 = g[6] * a + g[7] * b + g[8] * c;
      s0[k][0] = r0.real(), s0[k][1] = r0.imag();
      s1[k][0] = r1.real(), s1[k][1] = r1.imag();
      s2[k][0] = r2.real(), s2[k][1] = r2.imag();
   }
}

} // namespace

void GalerkinSolver::project(SpectralField2& f) const
{
   if (f.n() != n_) throw ValidationError("field size does not match solver");
   const std::size_t per = f.size_per_component();
   for (std::size_t k = 0; k < per; ++k) {
      const auto& g = blocks_[k];
      const cplx a = f.values()[k], b = f.values()[per + k], c = f.values()[2 * per + k];
      f.values()[k] = g[0] * a + g[1] * b + g[2] * c;
      f.values()[per + k] = g[3] * a + g[4] * b + g[5] * c;
      f.values()[2 * per + k] = g[6] * a + g[7] * b + g[8] * c;
   }
}

TensorField2 GalerkinSolver::project_stress(const TensorField2& stress) const
{
   TensorField2 eng = stress;
   for (double& v : eng.plane(2)) v *= 2.0;
   SpectralField2 s = forward(eng);
   project(s);
   return inverse(s);
}

namespace {

// Shared kernel: out = G * (W^-1 D : eps) using the caller's scratch.
void apply_kernel(int n, const fftw_plan r2c, const fftw_plan c2r, const std::vector<std::array<cplx, 9>>& blocks,
                  std::span<const double> eps, const Microstructure& m, const std::vector<std::uint8_t>& zero_phase,
                  Workspace& ws, std::span<double> out)
{
   const std::size_t np = static_cast<std::size_t>(n) * n;
   double* s0 = ws.real.get();
   double* s1 = s0 + np;
   double* s2 = s1 + np;
   const double* e0 = eps.data();
   const double* e1 = e0 + np;
   const double* e2 = e1 + np;
   for (std::size_t p = 0; p < np; ++p) {
      const std::uint8_t ph = m.phase[p];
      if (zero_phase[ph]) {
         s0[p] = s1[p] = s2[p] = 0.0;
         continue;
      }
      const auto& d = m.stiffness[ph];
      s0[p] = d(0, 0) * e0[p] + d(0, 1) * e1[p] + d(0, 2) * e2[p];
      s1[p] = d(1, 0) * e0[p] + d(1, 1) * e1[p] + d(1, 2) * e2[p];
      s2[p] = 2.0 * (d(2, 0) * e0[p] + d(2, 1) * e1[p] + d(2, 2) * e2[p]);
   }
   fftw_execute_dft_r2c(r2c, ws.real.get(), ws.spec.get());
   project_buffer(ws.spec.get(), blocks, static_cast<std::size_t>(n) * (n / 2 + 1));
   fftw_execute_dft_c2r(c2r, ws.spec.get(), ws.real.get());
   const double inv = 1.0 / static_cast<double>(np);
   for (std::size_t k = 0; k < 3 * np; ++k) out[k] = ws.real[k] * inv;
}

std::vector<std::uint8_t> zero_phases(const Microstructure& m)
{
   std::vector<std::uint8_t> z(256, 0);
   for (std::size_t p = 0; p < m.stiffness.size(); ++p) z[p] = is_zero(m.stiffness[p]);
   return z;
}

void check_microstructure(const Microstructure& m, int n)
{
   if (m.n != n || m.phase.size() != static_cast<std::size_t>(n) * n)
      throw ValidationError("microstructure size does not match solver");
   for (auto ph : m.phase)
      if (ph >= m.stiffness.size()) throw ValidationError("microstructure phase index out of range");
}

} // namespace

void GalerkinSolver::apply_into(std::span<const double> eps, const Microstructure& m, std::span<double> out) const
{
   Workspace ws(n_);
   apply_kernel(n_, plans_->r2c, plans_->c2r, blocks_, eps, m, zero_phases(m), ws, out);
}

TensorField2 GalerkinSolver::apply(const TensorField2& eps, const Microstructure& m) const
{
   check_microstructure(m, n_);
   if (eps.n() != n_) throw ValidationError("field size does not match solver");
   TensorField2 out(n_);
   apply_into(eps.values(), m, out.values());
   return out;
}

TensorField2 GalerkinSolver::solve(const Microstructure& m, const Voigt3& macro, const SolverOptions& opt,
                                   SolveReport& report) const
{
   check_microstructure(m, n_);
   if (!(opt.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
   for (double v : macro)
      if (!std::isfinite(v)) throw ValidationError("macroscopic strain must be finite");
   const std::size_t np = static_cast<std::size_t>(n_) * n_;
   const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 10 * n_;
   Workspace ws(n_);
   const auto zero = zero_phases(m);

   // b = -G * (D : macro)
   TensorField2 uniform(n_);
   for (int c = 0; c < 3; ++c) std::fill(uniform.plane(c).begin(), uniform.plane(c).end(), macro[c]);
   std::vector<double> b(3 * np);
   apply_kernel(n_, plans_->r2c, plans_->c2r, blocks_, uniform.values(), m, zero, ws, b);
   for (double& v : b) v = -v;

   TensorField2 x(n_);
   auto op = [&](std::span<const double> in, std::span<double> out) {
      apply_kernel(n_, plans_->r2c, plans_->c2r, blocks_, in, m, zero, ws, out);
   };
   auto dot = [np](std::span<const double> a, std::span<const double> c) { return field_dot(a, c, np); };
   const auto r = krylov::minres(op, std::span<const double>(b), std::span<double>(x.values()), dot, opt.tolerance, max_iter);
   accumulate_report(report, r, true);
   return x;
}

std::array<TensorField2, 3> GalerkinSolver::solve_sensitivity(const Microstructure& m, const SolverOptions& opt,
                                                               SolveReport& report) const
{
   check_microstructure(m, n_);
   if (!(opt.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
   const std::size_t np = static_cast<std::size_t>(n_) * n_;
   const std::size_t block = 3 * np;
   const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 10 * n_;
   Workspace ws(n_);
   const auto zero = zero_phases(m);

   // Stacked right-hand side: column k is -G * (D : e_k).
   std::vector<double> b(3 * block);
   for (int k = 0; k < 3; ++k) {
      TensorField2 unit(n_);
      std::fill(unit.plane(k).begin(), unit.plane(k).end(), 1.0);
      std::span<double> bk(b.data() + k * block, block);
      apply_kernel(n_, plans_->r2c, plans_->c2r, blocks_, unit.values(), m, zero, ws, bk);
   }
   for (double& v : b) v = -v;

   std::vector<double> x(3 * block);
   auto op = [&](std::span<const double> in, std::span<double> out) {
      for (int k = 0; k < 3; ++k)
         apply_kernel(n_, plans_->r2c, plans_->c2r, blocks_, in.subspan(k * block, block), m, zero, ws,
                      out.subspan(k * block, block));
   };
   auto dot = [np](std::span<const double> a, std::span<const double> c) { return field_dot(a, c, np); };
   const auto r = krylov::minres(op, std::span<const double>(b), std::span<double>(x), dot, opt.tolerance, max_iter);
   accumulate_report(report, r, true);

   std::array<TensorField2, 3> cols{TensorField2(n_), TensorField2(n_), TensorField2(n_)};
   for (int k = 0; k < 3; ++k) std::copy_n(x.begin() + k * block, block, cols[k].values().begin());
   return cols;
}

VoigtMatrix3 GalerkinSolver::stiffness_perturbation(const Microstructure& m, const SolverOptions& opt,
                                                    SolveReport& report) const
{
   constexpr double beta = SolverOptions::perturbation;
   VoigtMatrix3 c;
   for (int kl = 0; kl < 3; ++kl) {
      Voigt3 macro{};
      macro[kl] = beta;
      SolveReport r;
      TensorField2 eps = solve(m, macro, opt, r);
      if (kl == 0) report = r;
      else {
         report.iterations += r.iterations;
         report.residual = std::max(report.residual, r.residual);
         report.converged = report.converged && r.converged;
      }
      for (int comp = 0; comp < 3; ++comp)
         for (double& v : eps.plane(comp)) v += macro[comp];
      const Voigt3 sigma = average_stress(m, eps);
      for (int ij = 0; ij < 3; ++ij) c(ij, kl) = sigma[ij] / beta;
   }
   return c;
}

VoigtMatrix3 GalerkinSolver::stiffness_sensitivity(const Microstructure& m, const SolverOptions& opt,
                                                   SolveReport& report) const
{
   const auto sens = solve_sensitivity(m, opt, report);
   // C = < D : (I + d eps / d macro) >, assembled pixel by pixel.
   const std::size_t np = static_cast<std::size_t>(n_) * n_;
   std::array<double, 9> acc{};
   for (std::size_t p = 0; p < np; ++p) {
      const VoigtMatrix3& d = m.at(p);
      std::array<double, 9> t{};  // I + S(x), row = strain component, col = macro component
      for (int j = 0; j < 3; ++j)
         for (int r = 0; r < 3; ++r) t[3 * r + j] = (r == j ? 1.0 : 0.0) + sens[j].plane(r)[p];
      for (int i = 0; i < 3; ++i)
         for (int j = 0; j < 3; ++j)
            acc[3 * i + j] += d(i, 0) * t[j] + d(i, 1) * t[3 + j] + d(i, 2) * t[6 + j];
   }
   for (double& v : acc) v /= static_cast<double>(np);
   return VoigtMatrix3(acc);
}

// ---------------------------------------------------------------------------
// Free-function entry points

TensorField2 apply_operator(const TensorField2& eps_tilde, const PixelGrid& grid, const VoigtMatrix3& D_solid)
{
   GalerkinSolver solver(grid.n(), grid.cell_length());
   return solver.apply(eps_tilde, Microstructure::from_grid(grid, D_solid));
}

EquilibriumSolution solve_equilibrium(const PixelGrid& grid, const VoigtMatrix3& D_solid, const Voigt3& macro,
                                      double tol, int max_iter)
{
   GalerkinSolver solver(grid.n(), grid.cell_length());
   EquilibriumSolution out;
   out.eps_tilde = solver.solve(Microstructure::from_grid(grid, D_solid), macro, {tol, max_iter}, out.report);
   return out;
}

namespace {

EffectiveStiffness finish(const VoigtMatrix3& c, const SolveReport& r, SolveReport* report)
{
   if (report) *report = r;
   else if (!r.converged)
      throw ConvergenceError("effective stiffness solve did not converge (residual " + std::to_string(r.residual) + ")");
   return EffectiveStiffness::from_matrix(c);
}

} // namespace

EffectiveStiffness effective_stiffness_perturbation(const PixelGrid& grid, const VoigtMatrix3& D_solid, double tol,
                                                    SolveReport* report)
{
   GalerkinSolver solver(grid.n(), grid.cell_length());
   SolveReport r;
   const auto c = solver.stiffness_perturbation(Microstructure::from_grid(grid, D_solid), {tol, 0}, r);
   return finish(c, r, report);
}

EffectiveStiffness effective_stiffness_sensitivity(const PixelGrid& grid, const VoigtMatrix3& D_solid, double tol,
                                                   SolveReport* report)
{
   GalerkinSolver solver(grid.n(), grid.cell_length());
   SolveReport r;
   const auto c = solver.stiffness_sensitivity(Microstructure::from_grid(grid, D_solid), {tol, 0}, r);
   return finish(c, r, report);
}

std::string_view to_string(StiffnessMethod m)
{
   return m == StiffnessMethod::Perturbation ? "perturbation" : "sensitivity";
}

StiffnessMethod method_from_string(std::string_view s)
{
   if (s == "perturbation") return StiffnessMethod::Perturbation;
   if (s == "sensitivity") return StiffnessMethod::Sensitivity;
   throw ValidationError("unknown method '" + std::string(s) + "' (expected perturbation or sensitivity)");
}

HomogenizeResult homogenize(const GalerkinSolver& solver, const UnitCellSpec& spec, const HomogenizeOptions& opt)
{
   spec.validate();
   if (solver.n() != opt.n) throw ValidationError("solver grid size does not match options");
   const PixelGrid grid = rasterize(spec, opt.n);
   const VoigtMatrix3 d = base_stiffness(BaseMaterial{1.0, spec.material.nu}, opt.regime);
   const Microstructure m = Microstructure::from_grid(grid, d);
   const SolverOptions so{opt.tolerance, opt.max_iterations};
   HomogenizeResult out;
   const VoigtMatrix3 c = opt.method == StiffnessMethod::Perturbation ? solver.stiffness_perturbation(m, so, out.report)
                                                                      : solver.stiffness_sensitivity(m, so, out.report);
   if (!out.report.converged)
      throw ConvergenceError("homogenization did not converge within " + std::to_string(out.report.iterations)
                             + " iterations (residual " + std::to_string(out.report.residual) + ")");
   out.stiffness = scale_by_E(EffectiveStiffness::from_matrix(c), spec.material.E);
   return out;
}

HomogenizeResult homogenize(const UnitCellSpec& spec, const HomogenizeOptions& opt)
{
   spec.validate();
   GalerkinSolver solver(opt.n);
   return homogenize(solver, spec, opt);
}

} // namespace auxetikit
