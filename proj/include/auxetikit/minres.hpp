#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "auxetikit/error.hpp"

namespace auxetikit::krylov {

struct MinresResult {
   int iterations = 0;
   double residual = 0.0;  ///< relative residual ||b - Ax|| / ||b||
   bool converged = false;
};

/// Unpreconditioned MINRES (Paige & Saunders) for a self-adjoint operator in
/// the inner product `dot`, starting from x = 0. Singular consistent systems
/// are fine; the iterate then converges to the minimum-norm solution.
///
/// `apply(in, out)` writes A*in into out. On exit the residual is recomputed
/// explicitly and, if the recurrence was optimistic, MINRES is restarted on
/// the true residual until the budget is exhausted.
template <class Apply, class Dot>
MinresResult minres(Apply&& apply, std::span<const double> b, std::span<double> x, Dot&& dot, double tol,
                    int max_iter)
{
   const std::size_t n = b.size();
   std::fill(x.begin(), x.end(), 0.0);
   MinresResult out;

   const double bnorm = std::sqrt(dot(b, b));
   if (!std::isfinite(bnorm)) throw ConvergenceError("MINRES: non-finite right-hand side");
   if (bnorm == 0.0) {
      out.converged = true;
      return out;
   }

   std::vector<double> r1(b.begin(), b.end()), r2(b.begin(), b.end());
   std::vector<double> v(n), y(n), w(n, 0.0), w1(n), w2(n, 0.0);
   double oldb = 0.0, beta = bnorm, dbar = 0.0, epsln = 0.0, phibar = bnorm;
   double cs = -1.0, sn = 0.0;

   while (out.iterations < max_iter) {
      ++out.iterations;
      const double s = 1.0 / beta;
      for (std::size_t k = 0; k < n; ++k) v[k] = s * r2[k];
      apply(std::span<const double>(v), std::span<double>(y));
      if (oldb != 0.0) {
         const double f = beta / oldb;
         for (std::size_t k = 0; k < n; ++k) y[k] -= f * r1[k];
      }
      const double alfa = dot(std::span<const double>(v), std::span<const double>(y));
      const double f = alfa / beta;
      for (std::size_t k = 0; k < n; ++k) y[k] -= f * r2[k];
      r1.swap(r2);
      r2.swap(y);
      oldb = beta;
      beta = std::sqrt(dot(std::span<const double>(r2), std::span<const double>(r2)));

      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;

      const double denom = 1.0 / gamma;
      w1.swap(w2);
      w2.swap(w);
      for (std::size_t k = 0; k < n; ++k) {
         w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) * denom;
         x[k] += phi * w[k];
      }
      if (!std::isfinite(phibar) || !std::isfinite(beta)) throw ConvergenceError("MINRES: non-finite iterate");
      if (phibar <= tol * bnorm) break;
      // Krylov space exhausted: nothing more can be gained.
      if (beta <= 1e3 * std::numeric_limits<double>::epsilon() * bnorm) break;
   }

   // The recurrence residual can drift from the true one; check explicitly.
   std::vector<double> r(n);
   apply(std::span<const double>(x.data(), n), std::span<double>(r));
   for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
   const double rnorm = std::sqrt(dot(std::span<const double>(r), std::span<const double>(r)));
   if (!std::isfinite(rnorm)) throw ConvergenceError("MINRES: non-finite residual");
   out.residual = rnorm / bnorm;
   out.converged = out.residual <= tol;
   if (out.converged || out.iterations >= max_iter || rnorm >= bnorm) return out;

   // Restart on the true residual and add the correction.
   std::vector<double> dx(n);
   const MinresResult inner =
      minres(apply, std::span<const double>(r), std::span<double>(dx), dot, tol * bnorm / rnorm, max_iter - out.iterations);
   for (std::size_t k = 0; k < n; ++k) x[k] += dx[k];
   out.iterations += inner.iterations;
   out.residual = inner.residual * rnorm / bnorm;
   out.converged = out.residual <= tol;
   return out;
}

} // namespace auxetikit::krylov
