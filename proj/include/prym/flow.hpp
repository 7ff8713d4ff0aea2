#pragma once

#include "prym/surface.hpp"

#include <memory>
#include <vector>

namespace prym {

// A direction with coordinates in one real quadratic field, canonicalized up
// to positive scaling: rational slopes become coprime integer pairs with
// dy >= 0 (and dx > 0 when dy == 0); irrational slopes become (dx/dy, 1).
struct Direction {
  QuadNum dx;
  QuadNum dy;
  bool operator==(const Direction&) const = default;
};

Direction make_direction(const QuadNum& dx, const QuadNum& dy);
QuadNum norm_sq(const Direction& v);  // dx^2 + dy^2
bool is_horizontal(const Direction& v);
std::string to_string(const Direction& v);

// One crossing of a cell by a saddle connection, keyed by the x at which the
// leaf through it meets the cell's bottom edge.
struct Chord {
  int cell = 0;
  QuadNum b;        // bottom intercept, in [0, width)
  int saddle = -1;  // owning saddle connection
  int index = -1;   // position along it
};

// A maximal straight segment from the cone class to itself. Lengths are in
// direction units: the holonomy vector is length_units * (dx, dy).
struct SaddleConnection {
  std::vector<Chord> chords;  // empty for horizontal connections
  QuadNum length_units;
  int start_instance = -1;  // indices into Surface::cone_instances()
  int end_instance = -1;
};

// The strip of a cell between two consecutive chords, half-open [b_lo, b_hi);
// b_hi may exceed the width when the strip wraps past x = 0.
struct Band {
  int cell = 0;
  QuadNum b_lo;
  QuadNum b_hi;
  int upper_chord = -1;    // chord at b_lo: the transversal-coordinate h side
  int lower_chord = -1;    // chord at b_hi: the transversal-coordinate 0 side
  int cylinder = -1;
  int pos = -1;            // position along the cylinder chain
  QuadNum x_offset;        // flow time from the cylinder origin to this band
};

struct Cylinder {
  QuadNum circumference_units;  // L: core holonomy = L * (dx, dy)
  QuadNum height_units;         // transversal width in cross(v, .) units
  QuadNum modulus;              // height / circumference = h~ / (L * |v|^2)
  long multiplicity = 0;        // a_i = t * m_i
  int lower_saddle_count = 0;   // saddle connections per boundary side
  int upper_saddle_count = 0;
  bool simple = false;          // one saddle connection on each side
  std::vector<int> bands;       // chain in flow order (empty for horizontal)
};

class Decomposition {
 public:
  const Surface* surface = nullptr;
  Direction dir;
  std::vector<SaddleConnection> saddles;
  std::vector<Chord> chords;  // all chords; per cell sorted by intercept
  std::vector<Band> bands;
  std::vector<Cylinder> cylinders;
  QuadNum twist_constant;  // least t with every t * m_i a positive integer
  // Per cell: chord indices sorted by intercept, band indices sorted by b_lo.
  std::vector<std::vector<int>> cell_chords;
  std::vector<std::vector<int>> cell_bands;

  struct Location {
    bool on_saddle = false;
    int chord = -1;              // the boundary chord hit, when on_saddle
    int cylinder = -1;
    int band = -1;               // -1 for horizontal decompositions
    QuadNum transversal_ratio;   // position across the cylinder, in (0, 1)
  };
  Location locate(const SurfacePoint& p) const;
  QuadNum area() const;  // sum of L_i * h~_i, equals the surface area
};

// Number of outgoing rays at the cone class in any fixed direction (2g - 1).
int upward_ray_count(const Surface& s);

// Default cell-crossing budget for a surface and direction.
long default_budget(const Surface& s, const Direction& v);

// Traces the separatrix leaving the ray_index-th bottom cone instance until
// it returns to the cone class. Horizontal rays run along gluing circles.
SaddleConnection trace_separatrix(const Surface& s, int ray_index,
                                  const Direction& v, long budget);

// Full cylinder decomposition in a parabolic direction. A zero budget means
// the default; on budget exhaustion the budget is doubled once before the
// error propagates. Non-commensurable moduli raise HypothesisError.
Decomposition decompose(const Surface& s, const Direction& v, long budget = 0);

// Straight-line flow: the point reached from p after the given signed time
// in direction units (displacement time * (dx, dy)). Flow lines through the
// cone class are undefined and raise DomainError; horizontal flows rotate
// gluing circles, passing through saddle connections.
SurfacePoint flow_from(const Surface& s, const SurfacePoint& p,
                       const Direction& v, const QuadNum& time);

// The multi-twist of a parabolic decomposition: twists a_i * power times in
// cylinder C_i, fixing every boundary saddle connection pointwise. The
// derivative is the unipotent shear by power times the twist constant
// conjugated to the direction; negative powers give the inverse twist.
PointMap multi_twist(const Surface& s, const Decomposition& d,
                     long power = 1);

// A maximal strip of cylinder `cyl` of `along` between consecutive crossings
// by the transverse decomposition's saddle connections, labeled with the
// transverse cylinder its interior lies in. Offsets and widths are along the
// cylinder in direction units of `along`.
struct Region {
  QuadNum start;
  QuadNum width;
  int transverse_cylinder = -1;
};
std::vector<Region> region_structure(const Decomposition& along, int cyl,
                                     const Decomposition& transverse);

// Transversal widths of the slope-1/lambda decomposition of a genus-4 model:
// two short cylinders of width w_S and two long of width w_L satisfying
// w_S + w_L = lambda/2 and w_L = (n+1) * lambda/2 - w/2 for a winding count
// n >= 1. Widths are horizontal cross-section lengths (intercept spacing),
// the units in which both identities are exact.
struct G4Widths {
  QuadNum small_units;
  QuadNum large_units;
  long n = 0;
};
G4Widths verify_g4_widths(const Surface& s);

// The surface re-presented with one cell per cylinder of d, in coordinates
// (flow time, transversal offset); the frame has determinant one. The point
// maps share ownership of the cut surface but only reference the original,
// which must outlive them.
struct CutPresentation {
  std::shared_ptr<const Surface> cut;
  PointMap to_cut;    // derivative: rows (0, 1/dy) and (-dy, dx), det 1
  PointMap from_cut;  // its inverse
};
CutPresentation cut_along(const Surface& s, const Decomposition& d);

}  // namespace prym
