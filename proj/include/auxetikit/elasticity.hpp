#pragma once

#include <array>
#include <string>
#include <string_view>

namespace auxetikit {

/// 2D elasticity regime used to reduce the isotropic 3D law to the plane.
enum class Regime { PlaneStrain, PlaneStress };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

struct BaseMaterial {
   double E = 1.0;
   double nu = 0.3;

   /// Throws ValidationError unless E > 0 and -1 < nu < 0.5.
   void validate() const;
};

/// 3x3 matrix in 2D Voigt order (11, 22, 12). Strain vectors use engineering
/// shear (2*eps12); stress vectors use the tensor component sigma12.
class VoigtMatrix3 {
public:
   VoigtMatrix3() = default;
   explicit VoigtMatrix3(const std::array<double, 9>& row_major) : m_(row_major) {}

   double& operator()(int i, int j) { return m_[3 * i + j]; }
   double operator()(int i, int j) const { return m_[3 * i + j]; }

   const std::array<double, 9>& data() const { return m_; }

   std::array<double, 3> apply(const std::array<double, 3>& v) const
   {
      return {m_[0] * v[0] + m_[1] * v[1] + m_[2] * v[2],
              m_[3] * v[0] + m_[4] * v[1] + m_[5] * v[2],
              m_[6] * v[0] + m_[7] * v[1] + m_[8] * v[2]};
   }

   VoigtMatrix3 scaled(double s) const;
   /// Frobenius norm.
   double norm() const;
   double max_asymmetry() const;

   friend bool operator==(const VoigtMatrix3&, const VoigtMatrix3&) = default;

private:
   std::array<double, 9> m_{};
};

/// Homogenized stiffness of a square-symmetric orthotropic cell.
struct EffectiveStiffness {
   double c11 = 0.0;
   double c12 = 0.0;
   double c33 = 0.0;
   VoigtMatrix3 full;

   /// Builds the summary constants from a full matrix, symmetrizing
   /// C11/C22 and C12/C21.
   static EffectiveStiffness from_matrix(const VoigtMatrix3& full);
};

/// Isotropic stiffness of the base material in the chosen 2D regime.
VoigtMatrix3 base_stiffness(const BaseMaterial& m, Regime regime = Regime::PlaneStrain);

/// Effective Poisson's ratio C12 / C11. Throws DegenerateError when C11 == 0.
double nu_eff(const EffectiveStiffness& c);

/// Rescales stiffness computed at E = 1 to modulus E.
EffectiveStiffness scale_by_E(const EffectiveStiffness& normalized, double E);

} // namespace auxetikit
