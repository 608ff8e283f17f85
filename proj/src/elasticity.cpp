#include "auxetikit/elasticity.hpp"

#include <cmath>

#include "auxetikit/error.hpp"

namespace auxetikit {

std::string_view to_string(Regime r)
{
   return r == Regime::PlaneStrain ? "plane_strain" : "plane_stress";
}

Regime regime_from_string(std::string_view s)
{
   if (s == "plane_strain") return Regime::PlaneStrain;
   if (s == "plane_stress") return Regime::PlaneStress;
   throw ValidationError("unknown regime '" + std::string(s) + "' (expected plane_strain or plane_stress)");
}

void BaseMaterial::validate() const
{
   if (!(E > 0.0) || !std::isfinite(E)) throw ValidationError("Young's modulus must be positive and finite");
   if (!(nu > -1.0 && nu < 0.5)) throw ValidationError("Poisson's ratio must lie in (-1, 0.5)");
}

VoigtMatrix3 VoigtMatrix3::scaled(double s) const
{
   VoigtMatrix3 out = *this;
   for (auto& v : out.m_) v *= s;
   return out;
}

double VoigtMatrix3::norm() const
{
   double sum = 0.0;
   for (double v : m_) sum += v * v;
   return std::sqrt(sum);
}

double VoigtMatrix3::max_asymmetry() const
{
   double worst = 0.0;
   for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
   return worst;
}

EffectiveStiffness EffectiveStiffness::from_matrix(const VoigtMatrix3& full)
{
   EffectiveStiffness c;
   c.full = full;
   c.c11 = 0.5 * (full(0, 0) + full(1, 1));
   c.c12 = 0.5 * (full(0, 1) + full(1, 0));
   c.c33 = full(2, 2);
   return c;
}

VoigtMatrix3 base_stiffness(const BaseMaterial& m, Regime regime)
{
   if (!(m.E > 0.0)) throw ValidationError("Young's modulus must be positive");
   VoigtMatrix3 d;
   const double E = m.E;
   const double nu = m.nu;
   if (regime == Regime::PlaneStrain) {
      if (nu >= 0.5 || nu <= -1.0) throw ValidationError("plane strain stiffness is singular for nu = 0.5");
      const double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
      d(0, 0) = d(1, 1) = f * (1.0 - nu);
      d(0, 1) = d(1, 0) = f * nu;
   } else {
      if (nu >= 1.0 || nu <= -1.0) throw ValidationError("plane stress stiffness requires |nu| < 1");
      const double f = E / (1.0 - nu * nu);
      d(0, 0) = d(1, 1) = f;
      d(0, 1) = d(1, 0) = f * nu;
   }
   d(2, 2) = E / (2.0 * (1.0 + nu));
   return d;
}

double nu_eff(const EffectiveStiffness& c)
{
   if (c.c11 == 0.0) throw DegenerateError("effective Poisson's ratio undefined: C11 is zero");
   return c.c12 / c.c11;
}

EffectiveStiffness scale_by_E(const EffectiveStiffness& normalized, double E)
{
   if (!(E > 0.0)) throw ValidationError("Young's modulus must be positive");
   return EffectiveStiffness::from_matrix(normalized.full.scaled(E));
}

} // namespace auxetikit
