#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "prym/surface.hpp"

#include <algorithm>

using namespace prym;

namespace {
QuadNum q(long num, long den = 1) { return QuadNum(Rational(num, den)); }
}  // namespace

TEST_CASE("genus-2 model: area, cone angle, cylinder structure") {
  Prototype p{2, 11, 1, 0, -2};
  Surface s = Surface::build(p);
  QuadNum lam = lambda_of(p);
  CHECK(s.genus() == 2);
  CHECK(s.discriminant() == 48);
  CHECK(s.cells().size() == 2);
  CHECK(s.cells()[0].width == q(11));
  CHECK(s.cells()[0].height == q(1));
  CHECK(s.cells()[1].width == lam);
  CHECK(s.cells()[1].height == lam);
  CHECK(s.area() == q(11) + lam * lam);
  CHECK(s.cone_angle_over_pi() == 6);
  CHECK(s.euler_characteristic() == -2);
}

TEST_CASE("genus-3 model: two long cylinders over one square") {
  Prototype p{3, 3, 1, 0, -3};
  Surface s = Surface::build(p);
  QuadNum lam = lambda_of(p);
  CHECK(s.discriminant() == 33);
  REQUIRE(s.cells().size() == 3);
  // Horizontal cylinders are the cells: two of circumference w = 3, height 1.
  int long_cells = 0, square_cells = 0;
  for (const Cell& c : s.cells()) {
    if (c.width == q(3) && c.height == q(1)) ++long_cells;
    if (c.width == lam && c.height == lam) ++square_cells;
  }
  CHECK(long_cells == 2);
  CHECK(square_cells == 1);
  CHECK(s.area() == q(6) + lam * lam);
  CHECK(s.cone_angle_over_pi() == 10);
  CHECK(s.euler_characteristic() == -4);
}

TEST_CASE("genus-4 model: two short simple and two long cylinders") {
  Prototype p{4, 7, 1, 0, -4};
  Surface s = Surface::build(p);
  QuadNum lam = lambda_of(p);
  QuadNum half = q(1, 2);
  CHECK(s.discriminant() == 44);
  REQUIRE(s.cells().size() == 4);
  int long_cells = 0, square_cells = 0;
  for (int c = 0; c < 4; ++c) {
    const Cell& cell = s.cells()[c];
    if (cell.width == q(7) * half && cell.height == half) {
      ++long_cells;
      // Long cylinders: several saddle connections on each boundary circle.
      CHECK(s.top_seam_indices(c).size() >= 2);
      CHECK(s.bottom_arcs(c).size() >= 2);
    }
    if (cell.width == lam * half && cell.height == lam * half) {
      ++square_cells;
      // Short simple cylinders: one saddle connection per boundary circle.
      CHECK(s.top_seam_indices(c).size() == 1);
      CHECK(s.bottom_arcs(c).size() == 1);
    }
  }
  CHECK(long_cells == 2);
  CHECK(square_cells == 2);
  CHECK(s.area() == q(7) * half + lam * lam * half);
  CHECK(s.cone_angle_over_pi() == 14);
  CHECK(s.euler_characteristic() == -6);
}

TEST_CASE("builds reject invalid prototypes and exceptional discriminants") {
  CHECK_THROWS_AS(Surface::build({3, 2, 1, 0, 1}), DomainError);
  // The genus-3 D=8 and genus-4 D=5 forms need a different polygonal model.
  CHECK_THROWS_AS(Surface::build({3, 1, 1, 0, 0}), ExcludedDiscriminantError);
  CHECK_THROWS_AS(Surface::build({4, 1, 1, 0, -1}), ExcludedDiscriminantError);
}

TEST_CASE("seam round trips and point classes") {
  Surface s = Surface::build({2, 11, 1, 0, -2});
  QuadNum lam = lambda_of({2, 11, 1, 0, -2});
  // Walking any edge pairing there and back returns the start segment.
  for (const Seam& seam : s.seams()) {
    for (int k = 1; k < 5; ++k) {
      QuadNum x = seam.x0 + seam.length() * q(k, 5);
      CHECK(s.seam_preimage(seam, s.seam_image(seam, x)) == x);
    }
  }
  // A top-edge point equals its image on the glued bottom circle.
  QuadNum third = lam * q(1, 3);
  SurfacePoint on_top{0, third, q(1)};
  SurfacePoint on_bottom{1, third, q(0)};
  CHECK(s.same_point(on_top, on_bottom));
  CHECK(s.canonical(on_top) == s.canonical(on_bottom));
  // Horizontal wrap: x is taken modulo the circumference.
  CHECK(s.same_point({0, q(11), q(1, 2)}, {0, q(0), q(1, 2)}));
  // All cone instances name one class.
  for (const Instance& inst : s.cone_instances()) {
    SurfacePoint rep{inst.cell, inst.x,
                     inst.top ? s.cells()[inst.cell].height : q(0)};
    CHECK(s.is_cone(rep));
    CHECK(s.same_point(rep, s.cone_point()));
  }
  // Points outside a cell are rejected.
  CHECK_THROWS_AS(s.normalized({0, q(0), q(2)}), DomainError);
  CHECK_THROWS_AS(s.normalized({0, q(0), q(-1, 2)}), DomainError);
}

TEST_CASE("Prym involution squares to the identity") {
  for (Prototype p : {Prototype{2, 11, 1, 0, -2}, Prototype{3, 3, 1, 0, -3},
                      Prototype{4, 7, 1, 0, -4}, Prototype{2, 6, 2, 1, 0},
                      Prototype{3, 4, 2, 1, -1}, Prototype{4, 6, 2, 1, -2}}) {
    CAPTURE(p.genus);
    CAPTURE(p.w);
    Surface s = Surface::build(p);
    PointMap inv = prym_involution(s);
    CHECK(inv.derivative == Mat2::scalar(q(-1)));
    // The involution exchanges cylinders of equal circumference and height.
    for (const AffinePiece& piece : inv.pieces) {
      CHECK(s.cells()[piece.src].width == s.cells()[piece.dst].width);
      CHECK(s.cells()[piece.src].height == s.cells()[piece.dst].height);
    }
    std::vector<SurfacePoint> pts = s.sample_points(1000);
    CHECK(pts.size() >= 1000);
    for (const SurfacePoint& pt : pts) {
      SurfacePoint twice = apply_map(s, inv, apply_map(s, inv, pt));
      CHECK(s.same_point(pt, twice));
    }
    // The cone class maps to itself.
    SurfacePoint cone = s.normalized(s.cone_point());
    CHECK(s.same_point(cone, apply_map(s, inv, cone)));
  }
}

TEST_CASE("involution fixed points: six Weierstrass classes in genus 2") {
  Prototype p{2, 1, 1, 0, -1};
  Surface s = Surface::build(p);
  QuadNum lam = lambda_of(p);  // (-1 + sqrt(5)) / 2
  FixedPoints fp = fixed_points(s, prym_involution(s));
  CHECK(fp.singular.size() == 1);
  CHECK(fp.regular.size() == 5);
  CHECK(s.is_cone(fp.singular[0]));
  QuadNum half = q(1, 2);
  std::vector<SurfacePoint> expected = {
      {1, q(0), lam * half},                 // square, on the wrap line
      {1, lam * half, lam * half},           // square center
      {0, lam * half, half},                 // rectangle, first spine point
      {0, (lam + q(1)) * half, half},        // rectangle, second spine point
      {0, (lam + q(1)) * half, q(0)},        // midpoint of the long saddle
  };
  for (const SurfacePoint& e : expected) {
    bool found = false;
    for (const SurfacePoint& r : fp.regular)
      if (s.same_point(e, r)) found = true;
    CAPTURE(to_string(e));
    CHECK(found);
  }
}

TEST_CASE("involution fixed points: counts 6/4/2 across genera") {
  {
    Surface s = Surface::build({2, 11, 1, 0, -2});
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() + fp.singular.size() == 6);
    CHECK(fp.singular.size() == 1);
  }
  {
    Prototype p{3, 3, 1, 0, -3};
    Surface s = Surface::build(p);
    QuadNum lam = lambda_of(p);
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() + fp.singular.size() == 4);
    CHECK(fp.singular.size() == 1);
    QuadNum half = q(1, 2);
    // Square fixed points and the rectangle-edge point.
    std::vector<SurfacePoint> expected = {
        {1, q(0), lam * half},
        {1, lam * half, lam * half},
        {0, lam * half, q(0)},
    };
    for (const SurfacePoint& e : expected) {
      bool found = false;
      for (const SurfacePoint& r : fp.regular)
        if (s.same_point(e, r)) found = true;
      CAPTURE(to_string(e));
      CHECK(found);
    }
  }
  {
    Prototype p{4, 7, 1, 0, -4};
    Surface s = Surface::build(p);
    QuadNum lam = lambda_of(p);
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() == 1);
    CHECK(fp.singular.size() == 1);
    CHECK(s.same_point(fp.regular[0], {0, lam * q(1, 2), q(0)}));
  }
  // Tilted and taller variants keep the fixed-point counts.
  {
    Surface s = Surface::build({2, 6, 2, 1, 0});
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() + fp.singular.size() == 6);
  }
  {
    Surface s = Surface::build({3, 4, 2, 1, -1});
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() + fp.singular.size() == 4);
  }
  {
    Surface s = Surface::build({4, 6, 2, 1, -2});
    FixedPoints fp = fixed_points(s, prym_involution(s));
    CHECK(fp.regular.size() + fp.singular.size() == 2);
  }
}

TEST_CASE("fixed-point solver rejects maps without isolated fixed loci") {
  Surface s = Surface::build({2, 11, 1, 0, -2});
  PointMap id;
  id.derivative = Mat2::identity();
  for (int c = 0; c < 2; ++c)
    id.pieces.push_back({c, c, Mat2::identity(), q(0), q(0)});
  CHECK_THROWS_AS(fixed_points(s, id), DomainError);
  PointMap empty;
  CHECK_THROWS_AS(fixed_points(s, empty), DomainError);
}

TEST_CASE("canonical representatives are stable") {
  Surface s = Surface::build({4, 7, 1, 0, -4});
  for (const SurfacePoint& pt : s.sample_points(200)) {
    SurfacePoint c1 = s.canonical(pt);
    CHECK(s.canonical(c1) == c1);
    CHECK(s.same_point(pt, c1));
  }
}
