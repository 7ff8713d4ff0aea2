#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prym/automorphisms.hpp"

#include <vector>

using namespace prym;

namespace {

std::vector<SurfacePoint> probe_points(const Surface& s, int count) {
  std::vector<SurfacePoint> pts = s.sample_points(count);
  pts.push_back(s.cone_point());
  const FixedPoints fp = fixed_points(s, prym_involution(s));
  pts.insert(pts.end(), fp.regular.begin(), fp.regular.end());
  return pts;
}

// Points on the distinguished horizontal saddle chain (the bottom circle of
// cell 0) plus the cone class: the domain of genus-3 transports.
std::vector<SurfacePoint> chain_points(const Surface& s) {
  const Prototype p = *s.prototype();
  const QuadNum lam = lambda_of(p);
  const QuadNum w{Rational(p.w)}, t{Rational(p.t)};
  std::vector<SurfacePoint> pts;
  pts.push_back(s.cone_point());
  for (const Rational& r : {Rational(1, 2), Rational(1, 3), Rational(2, 7)}) {
    pts.push_back({0, qmod(t + lam * QuadNum(r), w), QuadNum(0)});
    pts.push_back({0, qmod(t + lam + (w - lam) * QuadNum(r), w), QuadNum(0)});
  }
  return pts;
}

std::vector<SurfacePoint> transport_domain(const TransportResult& tr,
                                           const Surface& side, int count) {
  if (tr.affine) return probe_points(side, count);
  // The genus-3 vertical move carries only the cone class.
  if (tr.move.k == kInfinity) return {side.cone_point()};
  return chain_points(side);
}

void check_round_trip(const TransportResult& tr) {
  for (const SurfacePoint& p : transport_domain(tr, *tr.source, 25)) {
    const SurfacePoint q = transport_point(tr, p);
    const SurfacePoint back = apply_map(*tr.target, *tr.source, tr.inverse, q);
    CHECK(tr.source->same_point(back, tr.source->normalized(p)));
  }
  // Target-side round trip: only affine transports are onto, so sample the
  // forward image otherwise.
  std::vector<SurfacePoint> image;
  if (tr.affine) {
    image = transport_domain(tr, *tr.target, 25);
  } else {
    for (const SurfacePoint& p : transport_domain(tr, *tr.source, 25))
      image.push_back(transport_point(tr, p));
  }
  for (const SurfacePoint& q : image) {
    const SurfacePoint p = apply_map(*tr.target, *tr.source, tr.inverse, q);
    CHECK(tr.target->same_point(transport_point(tr, p),
                                tr.target->normalized(q)));
  }
}

// Affine transports commute with the Prym involutions.  The genus-3 chain
// transport does not: its target marks the long-saddle midpoint, which the
// target involution swaps with the mirror long cylinder's midpoint.
void check_involution_equivariance(const TransportResult& tr) {
  REQUIRE(tr.affine);
  const PointMap io_s = prym_involution(*tr.source);
  const PointMap io_t = prym_involution(*tr.target);
  for (const SurfacePoint& p : transport_domain(tr, *tr.source, 15)) {
    const SurfacePoint lhs =
        transport_point(tr, apply_map(*tr.source, io_s, p));
    const SurfacePoint rhs =
        apply_map(*tr.target, io_t, transport_point(tr, p));
    CHECK(tr.target->same_point(lhs, rhs));
  }
}

// The move direction of the transport: slope 2k/w in genus 2, k/w in
// genus 3 and 4, vertical for the infinite move.
Direction move_direction(const ButterflyMove& m) {
  if (m.k == kInfinity) return make_direction(QuadNum(0), QuadNum(1));
  const long dy = m.source.genus == 2 ? 2 * m.k : m.k;
  return make_direction(QuadNum(m.source.w), QuadNum(dy));
}

void check_structure(const TransportResult& tr) {
  CHECK(tr.target->discriminant() == tr.source->discriminant());
  CHECK(tr.move.normalization.c.is_zero());
  CHECK(tr.move.normalization * tr.move.matrix == tr.map.derivative);
  REQUIRE(tr.target->prototype().has_value());
  CHECK(*tr.target->prototype() == tr.move.target);
  CHECK(is_valid(tr.move.target));
  REQUIRE(tr.move.cut_match.has_value());
  if (tr.affine) {
    CHECK(tr.target->area() == tr.map.derivative.det() * tr.source->area());
    CHECK(*tr.move.cut_match == tr.move.target);
  }
  // The move direction becomes horizontal and positively oriented.
  const Direction v = move_direction(tr.move);
  const Mat2& M = tr.map.derivative;
  CHECK((M.c * v.dx + M.d * v.dy).is_zero());
  CHECK((M.a * v.dx + M.b * v.dy).sign() > 0);
}

// The conjugate of the move-direction multi-twist is a positive power of the
// target's horizontal multi-twist.  Only affine transports conjugate the
// affine groups; the genus-3 parameter move does not (its conjugates are
// parabolic but need not be powers of the target twist).
void check_twist_conjugation(const TransportResult& tr) {
  REQUIRE(tr.affine);
  const Decomposition dv = decompose(*tr.source, move_direction(tr.move));
  const PointMap tw = multi_twist(*tr.source, dv);
  const Mat2& M = tr.map.derivative;
  const Mat2 conj = M * tw.derivative * M.inverse();
  CHECK(conj.c.is_zero());
  CHECK(conj.a == QuadNum(1));
  CHECK(conj.d == QuadNum(1));
  const Decomposition dh =
      decompose(*tr.target, make_direction(QuadNum(1), QuadNum(0)));
  const QuadNum ratio = conj.b / dh.twist_constant;
  REQUIRE(ratio.is_rational());
  REQUIRE(ratio.a().get_den() == 1);
  const long j = ratio.a().get_num().get_si();
  REQUIRE(j > 0);
  const PointMap th = multi_twist(*tr.target, dh, j);
  for (const SurfacePoint& pt : probe_points(*tr.source, 12)) {
    const SurfacePoint lhs = transport_point(tr, apply_map(*tr.source, tw, pt));
    const SurfacePoint rhs =
        apply_map(*tr.target, th, transport_point(tr, pt));
    CHECK(tr.target->same_point(lhs, rhs));
  }
}

}  // namespace

TEST_CASE("genus-2 butterfly matches the closed form") {
  const Prototype p{2, 11, 1, 0, -2};
  const Surface s = Surface::build(p);
  const TransportResult tr = butterfly(s, 2);
  CHECK(tr.move.target == Prototype{2, 3, 1, 0, -6});
  CHECK(tr.move.target == butterfly_params(p, 2));
  CHECK(tr.move.matrix.inverse() ==
        Mat2{QuadNum(11), lambda_of(p), QuadNum(2), QuadNum(1)});
  check_structure(tr);
  check_round_trip(tr);
  check_involution_equivariance(tr);

  // k = 1 returns the same parameters: e_1 = -e - 4 = e here.
  const TransportResult t1 = butterfly(s, 1);
  CHECK(t1.move.target == Prototype{2, 11, 1, 0, -2});
  CHECK(t1.move.target == butterfly_params(p, 1));
  check_structure(t1);

  // k = 3 satisfies the classical admissibility bound (e + 2k)^2 < D, but
  // (e + 4k)^2 >= D: the move direction is not a model cusp and there is no
  // target.
  CHECK(is_admissible(p, 3));
  CHECK_THROWS_AS(butterfly_params(p, 3), DomainError);
  CHECK_THROWS_AS(butterfly(s, 3), DomainError);
}

TEST_CASE("genus-2 butterflies with shared factors are tilted") {
  // w = 12 shares factors with 2k, so the measured targets pick up
  // circumference counts gcd(2k, w) and, when w_k, h_k, e_k share a factor,
  // a one-unit tilt.
  const Prototype p{2, 12, 1, 0, -2};
  const Surface s = Surface::build(p);

  const TransportResult t1 = butterfly(s, 1);
  CHECK(t1.move.target == Prototype{2, 6, 2, 1, -2});
  CHECK(t1.move.target == butterfly_params(p, 1));
  check_structure(t1);
  check_round_trip(t1);

  const TransportResult t2 = butterfly(s, 2);
  CHECK(t2.move.target == Prototype{2, 1, 4, 0, -6});
  CHECK(t2.move.target == butterfly_params(p, 2));
  check_structure(t2);

  const TransportResult ti = butterfly(s, kInfinity);
  CHECK(ti.move.target == Prototype{2, 13, 1, 0, 0});
  check_structure(ti);
}

TEST_CASE("genus-2 moves on a taller model") {
  const Prototype p{2, 3, 2, 0, -2};
  const Surface s = Surface::build(p);

  const TransportResult ti = butterfly(s, kInfinity);
  CHECK(ti.move.target == p);  // self-dual under the vertical move
  check_structure(ti);
  check_round_trip(ti);

  const TransportResult t1 = butterfly(s, 1);
  CHECK(t1.move.target == Prototype{2, 6, 1, 0, -2});
  CHECK(t1.move.target == butterfly_params(p, 1));
  check_structure(t1);
  check_involution_equivariance(t1);
}

TEST_CASE("genus-2 vertical move measures its target") {
  const Prototype p{2, 11, 1, 0, -2};
  const TransportResult tr = butterfly(Surface::build(p), kInfinity);
  CHECK(tr.move.target == Prototype{2, 12, 1, 0, 0});
  check_structure(tr);
  check_round_trip(tr);
  check_involution_equivariance(tr);

  // Applying the vertical move twice returns to the original parameters.
  CHECK(butterfly(*tr.target, kInfinity).move.target == p);

  const Prototype q{2, 2, 1, 0, -3};
  const TransportResult t2 = butterfly(Surface::build(q), kInfinity);
  CHECK(t2.move.target == Prototype{2, 4, 1, 0, 1});
  check_structure(t2);
  CHECK(butterfly(*t2.target, kInfinity).move.target == q);
}

TEST_CASE("genus-3 butterfly reproduces the worked example") {
  const Prototype p{3, 3, 1, 0, -3};
  const Surface s = Surface::build(p);
  const TransportResult tr = butterfly(s, 2);
  CHECK(tr.move.target == Prototype{3, 1, 1, 0, -5});
  CHECK(tr.move.target == butterfly_params(p, 2));
  // The move direction is a cusp of the model family: it decomposes like the
  // vertical diagram of the same-component model (4, 1, 0, 1), not like any
  // horizontal diagram, so the transport is parameter bookkeeping.
  CHECK(!tr.affine);
  REQUIRE(tr.move.cut_match.has_value());
  CHECK(*tr.move.cut_match == Prototype{3, 4, 1, 0, 1});
  check_structure(tr);
  check_round_trip(tr);

  const QuadNum lam = lambda_of(p);
  const QuadNum lamq = lambda_of(tr.move.target);
  const Mat2& M = tr.map.derivative;
  CHECK(tr.move.normalization == Mat2{lamq / QuadNum(2), QuadNum(0),
                                      QuadNum(0), lamq / QuadNum(2)});

  // The half-holonomy (w/2, q/2) of the connecting segment maps to
  // (lambda_q / 4, 0).
  const QuadNum hx = QuadNum(Rational(3, 2)), hy = QuadNum(1);
  CHECK(M.a * hx + M.b * hy == lamq / QuadNum(4));
  CHECK((M.c * hx + M.d * hy).is_zero());

  // The segment connects the inter-rectangle fixed point to the long
  // horizontal cylinder's midpoint in flow time gcd(w, q) / 2.
  const SurfacePoint s_fp{0, lam / QuadNum(2), QuadNum(0)};
  const SurfacePoint mid{0, (QuadNum(3) + lam) / QuadNum(2), QuadNum(0)};
  const SurfacePoint reached =
      flow_from(s, s_fp, make_direction(QuadNum(3), QuadNum(2)),
                QuadNum(Rational(1, 2)));
  CHECK(s.same_point(reached, mid));

  // Transport: the fixed point lands on the long-saddle midpoint of the new
  // model and the old midpoint a quarter of the new square side further.
  // Unlike genus 2, that landing point is not fixed: the involution swaps it
  // with the mirror long cylinder's midpoint.
  const SurfacePoint q1 = transport_point(tr, s_fp);
  CHECK(tr.target->same_point(
      q1, {0, (QuadNum(1) + lamq) / QuadNum(2), QuadNum(0)}));
  const FixedPoints fp_t = fixed_points(*tr.target, prym_involution(*tr.target));
  for (const SurfacePoint& f : fp_t.regular)
    CHECK(!tr.target->same_point(q1, f));
  CHECK(!tr.target->same_point(
      q1, apply_map(*tr.target, prym_involution(*tr.target), q1)));
  const SurfacePoint q2 = transport_point(tr, mid);
  CHECK(tr.target->same_point(
      tr.target->normalized({q1.cell, q1.x + lamq / QuadNum(4), q1.y}), q2));

  // Points outside the image arc have no preimage on the chain.
  CHECK_THROWS_AS(apply_map(*tr.target, *tr.source, tr.inverse,
                            {0, lamq / QuadNum(2), QuadNum(0)}),
                  DomainError);

  // The midpoint lands in a short vertical cylinder of the new model at an
  // irrational height: offset lambda_q / 4 from its center line.
  const Decomposition vd =
      decompose(*tr.target, make_direction(QuadNum(0), QuadNum(1)));
  const auto loc = vd.locate(q2);
  REQUIRE(!loc.on_saddle);
  CHECK(vd.cylinders[loc.cylinder].simple);
  const QuadNum off = lamq / QuadNum(4) /
                      (QuadNum(1) - lamq);  // w_q = 1 for this target
  const QuadNum ratio = loc.transversal_ratio;
  CHECK(!ratio.is_rational());
  const QuadNum centered = ratio - QuadNum(Rational(1, 2));
  CHECK((centered == off || centered == -off));
}

TEST_CASE("genus-3 vertical move is parameter bookkeeping only") {
  const Prototype p{3, 3, 1, 0, -3};
  const Surface s = Surface::build(p);
  const TransportResult tr = butterfly(s, kInfinity);
  CHECK(tr.move.target == Prototype{3, 4, 1, 0, -1});
  CHECK(tr.move.target == butterfly_params(p, kInfinity));
  CHECK(!tr.affine);
  check_structure(tr);
  check_round_trip(tr);

  // The new parameters do not admit the k = 2 move: (e + 8)^2 = 49 >= 33.
  CHECK(!is_admissible(butterfly_params(p, kInfinity), 2));
}

TEST_CASE("genus-4 butterflies measure their targets") {
  const Prototype p{4, 7, 1, 0, -4};
  const Surface s = Surface::build(p);

  const TransportResult t2 = butterfly(s, 2);
  CHECK(t2.move.target == Prototype{4, 7, 1, 0, -4});
  CHECK(t2.move.target == butterfly_params(p, 2));
  check_structure(t2);
  check_round_trip(t2);
  check_involution_equivariance(t2);
  check_twist_conjugation(t2);

  const TransportResult ti = butterfly(s, kInfinity);
  CHECK(ti.move.target == Prototype{4, 11, 1, 0, 0});
  check_structure(ti);
  check_round_trip(ti);
  check_involution_equivariance(ti);
  CHECK(butterfly(*ti.target, kInfinity).move.target == p);
}

TEST_CASE("twist conjugation transports to the new horizontal twist") {
  const Prototype p{2, 11, 1, 0, -2};
  check_twist_conjugation(butterfly(Surface::build(p), 2));
  check_twist_conjugation(butterfly(Surface::build(p), kInfinity));
}

TEST_CASE("directional flow basics") {
  const Prototype p{2, 11, 1, 0, -2};
  const Surface s = Surface::build(p);
  const QuadNum lam = lambda_of(p);
  const QuadNum half(Rational(1, 2));

  // Horizontal flow wraps each gluing circle.
  const SurfacePoint a{0, QuadNum(3), half};
  CHECK(s.same_point(
      flow_from(s, a, make_direction(QuadNum(1), QuadNum(0)), QuadNum(11)),
      a));

  // Vertical flow around a full column returns, forwards and backwards.
  const Direction up = make_direction(QuadNum(0), QuadNum(1));
  const SurfacePoint b{0, half, half};
  const QuadNum column = QuadNum(1) + lam;  // through both cells
  CHECK(s.same_point(flow_from(s, b, up, column), b));
  CHECK(s.same_point(flow_from(s, b, up, -column), b));
  const SurfacePoint c0 = flow_from(s, b, up, QuadNum(Rational(7, 3)));
  CHECK(s.same_point(flow_from(s, c0, up, -QuadNum(Rational(7, 3))), b));

  // Flow lines ending at the cone class stop there; crossing it throws.
  const SurfacePoint onto{0, lam, half};
  CHECK(s.is_cone(flow_from(s, onto, up, half)));
  CHECK_THROWS_AS(flow_from(s, onto, up, QuadNum(1)), DomainError);
}

TEST_CASE("word evaluation") {
  const Prototype p{3, 3, 1, 0, -3};
  const Surface s = Surface::build(p);
  const QuadNum lam = lambda_of(p);
  const SurfacePoint pt{0, QuadNum(Rational(5, 7)), QuadNum(Rational(1, 3))};

  SUBCASE("empty word is the identity") {
    const WordResult r = word_apply(s, {}, pt);
    CHECK(r.derivative == Mat2::identity());
    CHECK(r.trace.empty());
    CHECK(r.surface->same_point(r.point, pt));
    CHECK(*r.surface->prototype() == p);
  }

  SUBCASE("the involution squares to the identity") {
    for (const SurfacePoint& q : probe_points(s, 10)) {
      const WordResult r = word_apply(s, {involution_gen(), involution_gen()}, q);
      CHECK(r.derivative == Mat2::identity());
      CHECK(r.surface->same_point(r.point, s.normalized(q)));
    }
  }

  SUBCASE("twists cancel their inverses") {
    for (const SurfacePoint& q : probe_points(s, 10)) {
      const WordResult rv = word_apply(s, {twist_v(1), twist_v(-1)}, q);
      CHECK(rv.surface->same_point(rv.point, s.normalized(q)));
      const WordResult rh = word_apply(s, {twist_h(2), twist_h(-2)}, q);
      CHECK(rh.surface->same_point(rh.point, s.normalized(q)));
    }
  }

  SUBCASE("derivatives compose in word order") {
    const WordResult r =
        word_apply(s, {twist_h(1), involution_gen(), twist_v(1)}, pt);
    REQUIRE(r.trace.size() == 3);
    const Mat2 expect = r.trace[2].derivative *
                        (r.trace[1].derivative * r.trace[0].derivative);
    CHECK(r.derivative == expect);
    CHECK(r.trace[0].generator == "T_H");
    CHECK(r.trace[1].generator == "i");
    CHECK(r.trace[2].generator == "T_V");
  }

  SUBCASE("butterfly steps carry the point to the new model") {
    const Prototype p2{2, 11, 1, 0, -2};
    const Surface s2 = Surface::build(p2);
    const SurfacePoint q{0, QuadNum(Rational(9, 2)), QuadNum(Rational(1, 5))};
    const WordResult r = word_apply(s2, {butterfly_gen(2)}, q);
    CHECK(*r.surface->prototype() == Prototype{2, 3, 1, 0, -6});
    const TransportResult tr = butterfly(s2, 2);
    CHECK(r.surface->same_point(r.point, transport_point(tr, q)));
    CHECK(r.trace[0].generator == "B_2");
  }

  SUBCASE("a vertical twist moves the long-cylinder region centers") {
    // Center of the region of the bottom rectangle under the square column.
    const SurfacePoint dot{0, lam / QuadNum(2), QuadNum(Rational(1, 2))};
    const WordResult r = word_apply(s, {twist_v(1)}, dot);
    CHECK(!r.surface->same_point(r.point, dot));
  }
}
