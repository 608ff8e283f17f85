#include "auxetikit/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "auxetikit/error.hpp"

namespace auxetikit {

namespace {

// 1 / sqrt(1 + sqrt(1.1)): makes the peanut curve reach exactly 1 at theta = 0.
const double kPeanutNorm = 1.0 / std::sqrt(1.0 + std::sqrt(1.1));
// max over theta of kPeanutNorm * rho(theta) * sin(theta): half-width of the normalized curve across its lobe axis.
constexpr double kPeanutWaistSpan = 0.36636639101396956;

// Local void frame: `u` runs along the narrow extent d, `v` along the long extent D.
struct Local {
   double u;
   double v;
};

Local to_local(Point2 p, Orientation o)
{
   return o == Orientation::Vertical ? Local{p.x, p.y} : Local{p.y, p.x};
}

bool inside_local(VoidShape shape, Local q, double d_rel, double D_rel)
{
   const double a = 0.5 * d_rel;
   const double b = 0.5 * D_rel;
   if (a <= 0.0 || b <= 0.0) return false;
   const double au = std::abs(q.u);
   const double av = std::abs(q.v);
   switch (shape) {
   case VoidShape::Rectangular:
      return au <= a && av <= b;
   case VoidShape::Diamond:
      return au / a + av / b <= 1.0;
   case VoidShape::Oval: {
      const double x = au / a;
      const double y = av / b;
      return x * x + y * y <= 1.0;
   }
   case VoidShape::Peanut:
      return point_in_polygon(peanut_polygon(d_rel, D_rel), Point2{q.u, q.v});
   }
   return false;
}

bool inside_peanut_radial_local(Local q, double d_rel, double D_rel)
{
   const double a = 0.5 * d_rel;
   const double b = 0.5 * D_rel;
   if (a <= 0.0 || b <= 0.0) return false;
   // Lobe axis along the long extent; x, y are the curve's own polar coordinates.
   const double x = std::abs(q.v) / b;
   const double y = std::abs(q.u) / a * kPeanutWaistSpan;
   const double r2 = x * x + y * y;
   if (r2 == 0.0) return true;
   const double cos2 = (x * x - y * y) / r2;
   const double sin2 = 2.0 * x * y / r2;
   const double rho2 = cos2 + std::sqrt(1.1 - sin2 * sin2);
   return r2 <= rho2 * kPeanutNorm * kPeanutNorm;
}

bool inside_fast(VoidShape shape, Local q, double d_rel, double D_rel)
{
   if (shape == VoidShape::Peanut) return inside_peanut_radial_local(q, d_rel, D_rel);
   return inside_local(shape, q, d_rel, D_rel);
}

} // namespace

std::string_view to_string(VoidShape s)
{
   switch (s) {
   case VoidShape::Rectangular: return "rect";
   case VoidShape::Diamond: return "diamond";
   case VoidShape::Oval: return "oval";
   case VoidShape::Peanut: return "peanut";
   }
   return "rect";
}

VoidShape shape_from_string(std::string_view s)
{
   if (s == "rect" || s == "rectangular") return VoidShape::Rectangular;
   if (s == "diamond") return VoidShape::Diamond;
   if (s == "oval") return VoidShape::Oval;
   if (s == "peanut") return VoidShape::Peanut;
   throw ValidationError("unknown shape '" + std::string(s) + "' (expected rect, diamond, oval or peanut)");
}

const std::vector<VoidShape>& all_shapes()
{
   static const std::vector<VoidShape> shapes{VoidShape::Rectangular, VoidShape::Diamond, VoidShape::Oval,
                                              VoidShape::Peanut};
   return shapes;
}

bool swap_symmetric(VoidShape s)
{
   return s != VoidShape::Peanut;
}

void UnitCellSpec::validate() const
{
   if (!std::isfinite(d_rel) || !std::isfinite(D_rel)) throw ValidationError("void diameters must be finite");
   if (d_rel < 0.0 || D_rel < 0.0) throw ValidationError("void diameters must be non-negative");
   if (!(d_rel + D_rel < 1.0))
      throw ValidationError("void diameters must satisfy d/L + D/L < 1 (got " + std::to_string(d_rel + D_rel) + ")");
   material.validate();
}

PixelGrid::PixelGrid(int n, double cell_length, std::vector<std::uint8_t> solid)
   : n_(n), cell_length_(cell_length), solid_(std::move(solid))
{
   if (n < 2 || n % 2 != 0) throw ValidationError("grid size must be even and >= 2");
   if (!(cell_length > 0.0)) throw ValidationError("cell length must be positive");
   if (solid_.size() != static_cast<std::size_t>(n) * n) throw ValidationError("indicator size does not match n*n");
}

PixelGrid PixelGrid::all_solid(int n, double cell_length)
{
   return PixelGrid(n, cell_length, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 1));
}

std::size_t PixelGrid::solid_count() const
{
   std::size_t c = 0;
   for (auto v : solid_) c += v != 0;
   return c;
}

double PixelGrid::solid_fraction() const
{
   return static_cast<double>(solid_count()) / static_cast<double>(solid_.size());
}

double peanut_radius(double theta)
{
   const double s = std::sin(2.0 * theta);
   return std::sqrt(std::cos(2.0 * theta) + std::sqrt(1.1 - s * s));
}

Point2 peanut_point(double theta, double d_rel, double D_rel)
{
   const double rho = peanut_radius(theta);
   return {0.5 * d_rel * kPeanutNorm * rho * std::cos(theta), 0.5 * D_rel * kPeanutNorm * rho * std::sin(theta)};
}

Point2 peanut_void_point(double theta, double d_rel, double D_rel)
{
   const double r = kPeanutNorm * peanut_radius(theta);
   return {0.5 * d_rel * r * std::sin(theta) / kPeanutWaistSpan, 0.5 * D_rel * r * std::cos(theta)};
}

std::vector<Point2> peanut_polygon(double d_rel, double D_rel, int samples)
{
   std::vector<Point2> poly;
   poly.reserve(static_cast<std::size_t>(samples));
   for (int k = 0; k < samples; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / samples;
      poly.push_back(peanut_void_point(theta, d_rel, D_rel));
   }
   return poly;
}

bool point_in_polygon(const std::vector<Point2>& poly, Point2 p)
{
   bool inside = false;
   const std::size_t n = poly.size();
   for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = poly[i];
      const Point2& b = poly[j];
      if ((a.y > p.y) != (b.y > p.y)) {
         const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
         if (p.x < x_cross) inside = !inside;
      }
   }
   return inside;
}

bool point_in_void(VoidShape shape, Point2 p, double d_rel, double D_rel, Orientation orientation)
{
   return inside_local(shape, to_local(p, orientation), d_rel, D_rel);
}

bool point_in_peanut_radial(Point2 p, double d_rel, double D_rel, Orientation orientation)
{
   return inside_peanut_radial_local(to_local(p, orientation), d_rel, D_rel);
}

PixelGrid rasterize(const UnitCellSpec& spec, int n, double cell_length)
{
   spec.validate();
   if (n < 8 || n % 2 != 0) throw ValidationError("grid size must be even and >= 8");
   std::vector<std::uint8_t> solid(static_cast<std::size_t>(n) * n, 1);
   const double two_n = 2.0 * n;
   // Offsets are odd multiples of 1/(2n), so the raster is exactly symmetric.
   auto center_offset = [&](int i) { return (2.0 * i + 1.0 - n) / two_n; };
   auto corner_offset = [&](int i) { return 2 * i + 1 < n ? (2.0 * i + 1.0) / two_n : (2.0 * i + 1.0 - 2.0 * n) / two_n; };
   for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
         const double cx = center_offset(i), cy = center_offset(j);
         const double kx = corner_offset(i), ky = corner_offset(j);
         const bool in_void = inside_fast(spec.shape, to_local({cx, cy}, Orientation::Vertical), spec.d_rel, spec.D_rel)
                              || inside_fast(spec.shape, to_local({kx, ky}, Orientation::Vertical), spec.d_rel, spec.D_rel)
                              || inside_fast(spec.shape, to_local({cx, ky}, Orientation::Horizontal), spec.d_rel, spec.D_rel)
                              || inside_fast(spec.shape, to_local({kx, cy}, Orientation::Horizontal), spec.d_rel, spec.D_rel);
         solid[static_cast<std::size_t>(i) * n + j] = in_void ? 0 : 1;
      }
   }
   return PixelGrid(n, cell_length, std::move(solid));
}

std::string to_pgm(const PixelGrid& grid)
{
   const int n = grid.n();
   std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
   out.reserve(out.size() + static_cast<std::size_t>(n) * n);
   for (int row = 0; row < n; ++row) {
      const int j = n - 1 - row;
      for (int i = 0; i < n; ++i) out.push_back(grid.solid(i, j) ? static_cast<char>(255) : static_cast<char>(0));
   }
   return out;
}

double polygon_area(const std::vector<Point2>& poly)
{
   double a = 0.0;
   const std::size_t n = poly.size();
   for (std::size_t i = 0, j = n - 1; i < n; j = i++) a += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
   return 0.5 * a;
}

std::vector<std::vector<Point2>> void_outlines(const UnitCellSpec& spec, int samples)
{
   spec.validate();
   const double a = 0.5 * spec.d_rel;
   const double b = 0.5 * spec.D_rel;
   std::vector<std::vector<Point2>> out;
   if (a <= 0.0 || b <= 0.0) return out;

   std::vector<Point2> local;  // (u, v) in the void frame
   switch (spec.shape) {
   case VoidShape::Rectangular:
      local = {{-a, -b}, {a, -b}, {a, b}, {-a, b}};
      break;
   case VoidShape::Diamond:
      local = {{a, 0.0}, {0.0, b}, {-a, 0.0}, {0.0, -b}};
      break;
   case VoidShape::Oval:
      for (int k = 0; k < samples; ++k) {
         const double t = 2.0 * std::numbers::pi * k / samples;
         local.push_back({a * std::cos(t), b * std::sin(t)});
      }
      break;
   case VoidShape::Peanut:
      local = peanut_polygon(spec.d_rel, spec.D_rel, samples);
      break;
   }

   auto place = [&](Point2 center, Orientation o) {
      std::vector<Point2> poly;
      poly.reserve(local.size());
      for (const auto& q : local) {
         const Point2 p = o == Orientation::Vertical ? Point2{q.x, q.y} : Point2{q.y, q.x};
         poly.push_back({center.x + p.x, center.y + p.y});
      }
      out.push_back(std::move(poly));
   };
   place({0.5, 0.5}, Orientation::Vertical);
   for (double cx : {0.0, 1.0})
      for (double cy : {0.0, 1.0}) place({cx, cy}, Orientation::Vertical);
   for (double cy : {0.0, 1.0}) place({0.5, cy}, Orientation::Horizontal);
   for (double cx : {0.0, 1.0}) place({cx, 0.5}, Orientation::Horizontal);
   return out;
}

std::string to_svg(const UnitCellSpec& spec, int peanut_samples)
{
   std::ostringstream os;
   os.precision(6);
   os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"256\" height=\"256\">\n";
   os << "<g transform=\"translate(0,1) scale(1,-1)\">\n";
   os << "<rect class=\"solid\" x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"#4a6fa5\"/>\n";
   for (const auto& poly : void_outlines(spec, peanut_samples)) {
      os << "<path class=\"void\" fill=\"#ffffff\" d=\"";
      for (std::size_t i = 0; i < poly.size(); ++i) os << (i == 0 ? "M" : " L") << poly[i].x << ' ' << poly[i].y;
      os << " Z\"/>\n";
   }
   os << "</g>\n</svg>\n";
   return os.str();
}

} // namespace auxetikit
