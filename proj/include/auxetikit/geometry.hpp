#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "auxetikit/elasticity.hpp"

namespace auxetikit {

enum class VoidShape { Rectangular, Diamond, Oval, Peanut };

/// Serialized names: "rect", "diamond", "oval", "peanut".
std::string_view to_string(VoidShape s);
VoidShape shape_from_string(std::string_view s);
const std::vector<VoidShape>& all_shapes();

/// True when the cell with d_rel and D_rel swapped is the same cell shifted by
/// half a period, so its effective constants are unchanged. Holds for shapes
/// whose normalized outline is symmetric under exchanging its axes.
bool swap_symmetric(VoidShape s);

/// Which cell axis carries the long extent D of a void.
enum class Orientation { Vertical, Horizontal };

struct Point2 {
   double x = 0.0;
   double y = 0.0;
};

/// Full geometric and material description of one unit cell. Diameters are
/// full extents relative to the cell length L.
struct UnitCellSpec {
   VoidShape shape = VoidShape::Rectangular;
   double d_rel = 0.0;
   double D_rel = 0.0;
   BaseMaterial material{};

   /// Throws ValidationError on negative diameters or d_rel + D_rel >= 1.
   void validate() const;
};

/// Binary solid/void raster of an n x n periodic cell. Pixel (i, j) has its
/// center at ((i + 0.5) / n, (j + 0.5) / n) * L with i along x1, j along x2.
class PixelGrid {
public:
   PixelGrid(int n, double cell_length, std::vector<std::uint8_t> solid);

   static PixelGrid all_solid(int n, double cell_length = 1.0);

   int n() const { return n_; }
   double cell_length() const { return cell_length_; }
   bool solid(int i, int j) const { return solid_[static_cast<std::size_t>(i) * n_ + j] != 0; }
   const std::vector<std::uint8_t>& indicator() const { return solid_; }

   std::size_t solid_count() const;
   double solid_fraction() const;
   double void_fraction() const { return 1.0 - solid_fraction(); }

   friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

private:
   int n_;
   double cell_length_;
   std::vector<std::uint8_t> solid_;
};

/// Normalized peanut radius rho(theta) = sqrt(cos 2t + sqrt(1.1 - sin^2 2t)).
double peanut_radius(double theta);

/// Point on the scaled peanut curve, x1 scaled by d_rel / 2 and x2 by
/// D_rel / 2 so that x1(0) = d_rel / 2.
Point2 peanut_point(double theta, double d_rel, double D_rel);

/// Peanut void boundary in the void's local frame (narrow axis first): the
/// curve's lobe axis runs along the long extent, scaled so the full extents
/// are exactly d_rel and D_rel.
Point2 peanut_void_point(double theta, double d_rel, double D_rel);

/// Closed peanut void boundary sampled at `samples` uniform parameter values.
std::vector<Point2> peanut_polygon(double d_rel, double D_rel, int samples = 720);

/// Even-odd ray test.
bool point_in_polygon(const std::vector<Point2>& poly, Point2 p);

/// Membership of `p` (offset from the void center) in a single void with
/// narrow full extent d_rel and long full extent D_rel. Vertical voids put
/// D along x2, horizontal voids along x1.
bool point_in_void(VoidShape shape, Point2 p, double d_rel, double D_rel, Orientation orientation);

/// Same as point_in_void for the peanut but via the radial comparison at the
/// point's polar angle instead of the polygon test.
bool point_in_peanut_radial(Point2 p, double d_rel, double D_rel, Orientation orientation);

/// Rasterizes the orthogonal-void cell: vertical voids at the center and the
/// (periodically wrapped) corners, horizontal voids at the edge midpoints.
/// Neighbouring voids are mutually orthogonal at spacing L/2.
PixelGrid rasterize(const UnitCellSpec& spec, int n, double cell_length = 1.0);

/// Binary PGM (P5, maxval 255), solid = 255, void = 0. Row r is x2 = top-down.
std::string to_pgm(const PixelGrid& grid);

/// SVG outline of the cell in a unit viewBox with y pointing up.
std::string to_svg(const UnitCellSpec& spec, int peanut_samples = 720);

/// Void outlines as closed polygons in cell-relative coordinates, including
/// the wrapped copies at the corners and edges. Used by the SVG export.
std::vector<std::vector<Point2>> void_outlines(const UnitCellSpec& spec, int samples = 720);

/// Signed shoelace area.
double polygon_area(const std::vector<Point2>& poly);

} // namespace auxetikit
