#pragma once

#include "prym/prototypes.hpp"
#include "prym/qfield.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace prym {

// Representative of x modulo m in [0, m); m must be positive.
QuadNum qmod(const QuadNum& x, const QuadNum& m);

// A cell is a horizontal cylinder: the rectangle [0, width] x [0, height]
// with its left and right edges identified (x is taken modulo width).
struct Cell {
  QuadNum width;
  QuadNum height;
};

// Glues the arc [x0, x1] of cell src's top edge onto the bottom circle of
// cell dst by a translation: x lands at (x - x0 + y0) mod width(dst).
// Source arcs never wrap (0 <= x0 < x1 <= width(src)); image arcs may.
struct Seam {
  int src = 0;
  QuadNum x0;
  QuadNum x1;
  int dst = 0;
  QuadNum y0;
  QuadNum length() const { return x1 - x0; }
};

struct SurfacePoint {
  int cell = 0;
  QuadNum x;
  QuadNum y;
  bool operator==(const SurfacePoint&) const = default;
};

// Ordering by (cell, x, y); used for canonical representatives.
bool lex_less(const SurfacePoint& p, const SurfacePoint& q);
std::string to_string(const SurfacePoint& p);

// An endpoint of a seam arc on a gluing circle (top or bottom edge of a cell).
struct Instance {
  int cell = 0;
  bool top = false;
  QuadNum x;
};

struct Mat2 {
  QuadNum a, b, c, d;  // [[a, b], [c, d]]
  static Mat2 identity();
  static Mat2 scalar(const QuadNum& s);
  QuadNum det() const;
  Mat2 inverse() const;
  bool operator==(const Mat2&) const = default;
};
Mat2 operator*(const Mat2& m, const Mat2& n);

// One affine branch of a point map: a point (x, y) of cell src goes to
// linear * (x, y) + (shift_x, shift_y) in cell dst, then is renormalized
// (x mod width, top edge pushed through its seam). Branches cover whole cells.
struct AffinePiece {
  int src = 0;
  int dst = 0;
  Mat2 linear;
  QuadNum shift_x;
  QuadNum shift_y;
};

// A piecewise-affine self-map or map between surfaces. When `pieces` is
// nonempty it fully describes the map (one branch per source cell); otherwise
// `fn` evaluates it. The derivative is the common linear part.
struct PointMap {
  Mat2 derivative = Mat2::identity();
  std::vector<AffinePiece> pieces;
  std::function<SurfacePoint(const SurfacePoint&)> fn;
};

struct FixedPoints {
  std::vector<SurfacePoint> regular;   // canonical, lexicographically sorted
  std::vector<SurfacePoint> singular;  // fixed cone classes
};

class Surface {
 public:
  // Raw constructor; validates tilings and the cone-class structure.
  Surface(std::vector<Cell> cells, std::vector<Seam> seams, int genus,
          long discriminant, std::optional<Prototype> proto = std::nullopt);

  // Builds the polygonal model for a valid prototype (L/S/X shape for
  // genus 2/3/4), presented as its horizontal cylinders.
  static Surface build(const Prototype& p);

  int genus() const { return genus_; }
  long discriminant() const { return discriminant_; }
  const std::optional<Prototype>& prototype() const { return proto_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Seam>& seams() const { return seams_; }
  QuadNum area() const;

  // The single cone class: all seam-arc endpoints, each contributing an
  // angle of pi. The total angle is (4g-2)*pi; Gauss-Bonnet then gives
  // euler_characteristic() == 2 - 2g.
  const std::vector<Instance>& cone_instances() const { return instances_; }
  int cone_angle_over_pi() const { return static_cast<int>(instances_.size()); }
  long euler_characteristic() const;

  // Seam lookup. Arcs are treated as left-closed: the arc starting at x wins.
  const Seam& seam_from_top(int cell, const QuadNum& x) const;
  const Seam& seam_into_bottom(int cell, const QuadNum& x) const;
  // Seams covering a cell's bottom circle as (arc start, seam index), sorted.
  const std::vector<std::pair<QuadNum, int>>& bottom_arcs(int cell) const {
    return bottom_arcs_[cell];
  }
  // Indices of seams sourcing from a cell's top edge, sorted by x0.
  const std::vector<int>& top_seam_indices(int cell) const {
    return top_seams_[cell];
  }
  // Where the top-edge point x of seam s lands on the bottom circle of s.dst.
  QuadNum seam_image(const Seam& s, const QuadNum& x) const;
  // The top-edge point mapping to bottom-circle point x of cell s.dst under s.
  QuadNum seam_preimage(const Seam& s, const QuadNum& x) const;

  // Wraps x into [0, width) and pushes points on the top edge (y == height)
  // through their seam, so the result has y in [0, height).
  SurfacePoint normalized(SurfacePoint p) const;
  // Least representative (by cell, then x, then y) among all representatives
  // of the point's class, including top-edge ones. Decides equality.
  SurfacePoint canonical(const SurfacePoint& p) const;
  bool same_point(const SurfacePoint& p, const SurfacePoint& q) const;
  bool is_cone(const SurfacePoint& p) const;
  SurfacePoint cone_point() const { return cone_canonical_; }

  // Deterministic rational sample grid (interior points plus bottom-edge
  // points of every cell), at least `count` points when possible.
  std::vector<SurfacePoint> sample_points(int count) const;

 private:
  void validate();

  std::vector<Cell> cells_;
  std::vector<Seam> seams_;  // sorted by (src, x0)
  int genus_ = 0;
  long discriminant_ = 0;
  std::optional<Prototype> proto_;
  // Per cell: indices into seams_ sourcing from its top, sorted by x0.
  std::vector<std::vector<int>> top_seams_;
  // Per cell: seams covering its bottom circle as (arc start, seam index),
  // sorted by start.
  std::vector<std::vector<std::pair<QuadNum, int>>> bottom_arcs_;
  std::vector<Instance> instances_;
  SurfacePoint cone_canonical_;
};

// Evaluates a point map with one affine branch per source cell. The input is
// normalized in `source`, the image in `target`. The 3-argument overload is
// for self-maps.
SurfacePoint apply_map(const Surface& source, const Surface& target,
                       const PointMap& m, const SurfacePoint& p);
SurfacePoint apply_map(const Surface& s, const PointMap& m,
                       const SurfacePoint& p);

// The Prym involution of a built polygonal model: derivative -I, one affine
// branch per cell.
PointMap prym_involution(const Surface& s);

// Solves the piecewise affine fixed-point equations of a self-map exactly:
// interior solutions per cell, gluing-circle solutions per bottom arc, and
// the cone class. Rejects maps whose fixed locus is not isolated.
FixedPoints fixed_points(const Surface& s, const PointMap& m);

}  // namespace prym
