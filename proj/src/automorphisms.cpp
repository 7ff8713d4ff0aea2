#include "prym/automorphisms.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace prym {

namespace {

// Coefficient of sqrt(D) in x for the (possibly non-squarefree) discriminant
// D, so that x == x.a() + coeff * sqrt(D).
Rational sqrtD_coeff(const QuadNum& x, long D) {
  const QuadNum root = QuadNum::sqrt_of(D);
  if (!x.is_rational() && x.d() != root.d())
    throw InternalError("value lies in a different quadratic field");
  Rational c = x.b() / root.b();
  c.canonicalize();
  return c;
}

long to_long_checked(const Integer& z, const char* what) {
  if (!z.fits_slong_p())
    throw InternalError(std::string(what) + " out of range");
  return z.get_si();
}

// Reads a measured ratio of the form lambda / n with lambda = (e + sqrt(D))/2
// and integers n >= 1, e; these are the only shapes a cell-dimension ratio of
// a family model can take.
struct HalfTraceRatio {
  long n = 0;
  long e = 0;
};

HalfTraceRatio read_half_trace_ratio(const QuadNum& x, long D,
                                     const char* what) {
  const Rational c = sqrtD_coeff(x, D);
  if (sign_of(c) <= 0)
    throw HypothesisError(std::string("measured ") + what +
                          " has no positive sqrt(D) part");
  Rational n_rat = Rational(1) / (2 * c);
  n_rat.canonicalize();
  if (n_rat.get_den() != 1)
    throw HypothesisError(std::string("measured ") + what +
                          " is not lambda over an integer");
  const long n = to_long_checked(n_rat.get_num(), what);
  Rational e_rat = x.a() * 2 * n;
  e_rat.canonicalize();
  if (e_rat.get_den() != 1)
    throw HypothesisError(std::string("measured ") + what +
                          " has a non-integral trace");
  const long e = to_long_checked(e_rat.get_num(), what);
  const QuadNum lambda = (QuadNum(e) + QuadNum::sqrt_of(D)) / QuadNum(2);
  if (x * QuadNum(n) != lambda)
    throw InternalError("ratio extraction lost exactness");
  return {n, e};
}

// Integer solution of m * a + n * b == c over the rationals.
struct LatticeSolution {
  bool ok = false;
  Integer m, n;
};

LatticeSolution solve_lattice(const Rational& a, const Rational& b,
                              const Rational& c) {
  const Integer da = a.get_den(), db = b.get_den(), dc = c.get_den();
  Integer scale;
  mpz_lcm(scale.get_mpz_t(), da.get_mpz_t(), db.get_mpz_t());
  mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), dc.get_mpz_t());
  const Integer A = a.get_num() * (scale / da);
  const Integer B = b.get_num() * (scale / db);
  const Integer C = c.get_num() * (scale / dc);
  LatticeSolution out;
  if (A == 0 && B == 0) {
    out.ok = (C == 0);
    return out;
  }
  Integer g, u, v;
  mpz_gcdext(g.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), A.get_mpz_t(),
             B.get_mpz_t());
  if (!mpz_divisible_p(C.get_mpz_t(), g.get_mpz_t())) return out;
  const Integer q = C / g;
  out.ok = true;
  out.m = u * q;
  out.n = v * q;
  return out;
}

// Sorts seams by (src, x0) and joins consecutive arcs that continue each
// other onto the same destination circle.
std::vector<Seam> sorted_merged(std::vector<Seam> seams,
                                const std::vector<Cell>& cells) {
  std::sort(seams.begin(), seams.end(), [](const Seam& a, const Seam& b) {
    return a.src != b.src ? a.src < b.src : a.x0 < b.x0;
  });
  std::vector<Seam> merged;
  for (const Seam& seam : seams) {
    if (!merged.empty()) {
      Seam& last = merged.back();
      if (last.src == seam.src && last.dst == seam.dst &&
          last.x1 == seam.x0 &&
          qmod(last.y0 + (seam.x0 - last.x0), cells[last.dst].width) ==
              seam.y0) {
        last.x1 = seam.x1;
        continue;
      }
    }
    merged.push_back(seam);
  }
  return merged;
}

bool seams_equal(const std::vector<Seam>& a, const std::vector<Seam>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].src != b[i].src || a[i].dst != b[i].dst || a[i].x0 != b[i].x0 ||
        a[i].x1 != b[i].x1 || a[i].y0 != b[i].y0)
      return false;
  }
  return true;
}

// First seam, in the cyclic arc order on a cell's top edge, whose destination
// satisfies `want` while its cyclic predecessor's does not: the start of the
// gluing run into the wanted cells. Requires the run to be unique.
template <typename Pred>
int run_start_seam(const Surface& c, int cell, Pred want) {
  const auto& tops = c.top_seam_indices(cell);
  const int n = static_cast<int>(tops.size());
  int found = -1;
  for (int i = 0; i < n; ++i) {
    const Seam& cur = c.seams()[tops[i]];
    const Seam& pred = c.seams()[tops[(i + n - 1) % n]];
    if (want(cur.dst) && !want(pred.dst)) {
      if (found != -1)
        throw HypothesisError("cylinder diagram mismatch: split gluing run");
      found = tops[i];
    }
  }
  if (found == -1)
    throw HypothesisError("cylinder diagram mismatch: missing gluing run");
  return found;
}

// The seams of the run starting at `start`, in cyclic order.
template <typename Pred>
std::vector<int> run_members(const Surface& c, int cell, int start,
                             Pred want) {
  const auto& tops = c.top_seam_indices(cell);
  const int n = static_cast<int>(tops.size());
  int i0 = -1;
  for (int i = 0; i < n; ++i)
    if (tops[i] == start) i0 = i;
  std::vector<int> out;
  for (int j = 0; j < n; ++j) {
    const int idx = tops[(i0 + j) % n];
    if (!want(c.seams()[idx].dst)) break;
    out.push_back(idx);
  }
  return out;
}

std::string power_label(const char* base, long n) {
  if (n == 1) return base;
  return std::string(base) + "^" + std::to_string(n);
}

// Scale-free exact comparison of two cylinder decompositions: some pairing
// must match multiplicity, simplicity and boundary saddle counts (up to
// swapping the two sides) and keep both dimension ratios constant.
bool same_diagram(const std::vector<Cylinder>& a,
                  const std::vector<Cylinder>& b) {
  if (a.size() != b.size()) return false;
  std::vector<int> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (size_t i = 0; ok && i < a.size(); ++i) {
      const Cylinder& x = a[i];
      const Cylinder& y = b[perm[i]];
      if (x.multiplicity != y.multiplicity || x.simple != y.simple) ok = false;
      const bool same_sides = x.lower_saddle_count == y.lower_saddle_count &&
                              x.upper_saddle_count == y.upper_saddle_count;
      const bool swapped = x.lower_saddle_count == y.upper_saddle_count &&
                           x.upper_saddle_count == y.lower_saddle_count;
      if (!same_sides && !swapped) ok = false;
      if (ok && i > 0) {
        const Cylinder& x0 = a[0];
        const Cylinder& y0 = b[perm[0]];
        if (x.circumference_units * y0.circumference_units !=
                x0.circumference_units * y.circumference_units ||
            x.height_units * y0.height_units !=
                x0.height_units * y.height_units)
          ok = false;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Genus-3 butterfly: the move direction decomposes like the vertical
// direction of a same-discriminant model (one long cylinder and two short
// simple ones), the mirror of every model's horizontal diagram, so there is
// no affine map onto build(butterfly_params(p, k)).  The returned transport
// is the classical parameter-level renormalization: the verified cut model
// is recorded, the derivative is (lambda_q/2) * matrix, and points are
// carried on the cone class and the distinguished horizontal saddle chain.
TransportResult butterfly_chain_transport(std::shared_ptr<const Surface> src,
                                          const Prototype& p, long k,
                                          const Direction& v) {
  const long D = src->discriminant();
  const Prototype tp = k == kInfinity ? binfty_params(p) : butterfly_params(p, k);

  const Decomposition dec = decompose(*src, v);
  std::optional<Prototype> cut_match;
  for (const Prototype& cand : enumerate_for_discriminant(3, D)) {
    const Surface sc = Surface::build(cand);
    const Decomposition dv =
        decompose(sc, make_direction(QuadNum(0), QuadNum(1)));
    if (same_diagram(dec.cylinders, dv.cylinders)) {
      cut_match = cand;
      break;
    }
  }
  if (!cut_match)
    throw HypothesisError(
        "move direction does not decompose like the vertical direction of "
        "any same-discriminant model");

  auto tgt = std::make_shared<const Surface>(Surface::build(tp));
  const QuadNum lam = lambda_of(p);
  const QuadNum lamq = lambda_of(tp);
  const Mat2 matrix =
      k == kInfinity
          ? Mat2{QuadNum(0), QuadNum(1), QuadNum(-1), QuadNum(0)}
          : Mat2{QuadNum(p.w), lam, QuadNum(k), QuadNum(1)}.inverse();
  // Scale so the image of the move curve has the target's short-cylinder
  // side: for finite k the curve has holonomy (w, k) and matrix * (w, k) is
  // (1, 0); for the vertical move the curve is the vertical saddle of
  // length h bounding the short vertical cylinders.
  const QuadNum mu =
      k == kInfinity ? lamq / QuadNum(p.h) : lamq / QuadNum(2);
  const Mat2 normalization{mu, QuadNum(0), QuadNum(0), mu};
  const Mat2 M = normalization * matrix;

  TransportResult out;
  out.source = src;
  out.target = tgt;
  out.move = ButterflyMove{k, p, tp, matrix, normalization, cut_match};
  out.affine = false;

  // Chain transport: the fixed point (the short-saddle midpoint) goes to the
  // long-saddle midpoint of the target, and a chain point at offset delta
  // from it (minimal non-negative lift along the move path) lands a further
  // lambda_q * delta / (2w) along the target chain; in particular the long
  // horizontal saddle's midpoint lands lambda_q / 4 to the right.  Unlike
  // genus 2, the target's long-saddle midpoint is not fixed (the involution
  // swaps the two long cylinders), which is why the image point's irrational
  // height across its short vertical cylinder rules the midpoint out.
  const QuadNum w_src{Rational(p.w)}, t_src{Rational(p.t)};
  const QuadNum w_tgt{Rational(tp.w)}, t_tgt{Rational(tp.t)};
  const bool finite = k != kInfinity;
  out.map.derivative = M;
  out.map.fn = [src, tgt, lam, lamq, w_src, t_src, w_tgt, t_tgt,
                finite](const SurfacePoint& q0) -> SurfacePoint {
    const SurfacePoint q = src->normalized(q0);
    if (src->is_cone(q)) return tgt->cone_point();
    if (!finite || q.cell != 0 || !q.y.is_zero())
      throw DomainError(
          "genus-3 transport carries only the cone class and the "
          "distinguished horizontal saddle chain");
    const QuadNum delta = qmod(q.x - t_src - lam / QuadNum(2), w_src);
    const QuadNum xi = t_tgt + (w_tgt + lamq) / QuadNum(2) +
                       lamq * delta / (QuadNum(2) * w_src);
    return tgt->normalized({0, qmod(xi, w_tgt), QuadNum(0)});
  };
  out.inverse.derivative = M.inverse();
  out.inverse.fn = [src, tgt, lam, lamq, w_src, t_src, w_tgt, t_tgt,
                    finite](const SurfacePoint& q0) -> SurfacePoint {
    const SurfacePoint q = tgt->normalized(q0);
    if (tgt->is_cone(q)) return src->cone_point();
    if (!finite || q.cell != 0 || !q.y.is_zero())
      throw DomainError(
          "genus-3 transport carries only the cone class and the "
          "distinguished horizontal saddle chain");
    const QuadNum off = qmod(q.x - t_tgt - (w_tgt + lamq) / QuadNum(2), w_tgt);
    if (!(QuadNum(2) * off < lamq))
      throw DomainError(
          "point is outside the image arc of the genus-3 chain transport");
    const QuadNum delta = QuadNum(2) * w_src * off / lamq;
    return src->normalized(
        {0, qmod(t_src + lam / QuadNum(2) + delta, w_src), QuadNum(0)});
  };
  return out;
}

}  // namespace

TransportResult butterfly(const Surface& s, long k) {
  if (!s.prototype())
    throw DomainError("butterfly moves need a built prototype model");
  const Prototype p = *s.prototype();
  if (!is_admissible(p, k)) throw DomainError("inadmissible butterfly index");
  const int genus = p.genus;

  auto src = std::make_shared<const Surface>(s);
  const long D = src->discriminant();
  // The move curve gamma_k runs along slope 2k/w in genus 2 and k/w in
  // genus 3 and 4 (measured; the vertical direction for k = kInfinity).
  const Direction v =
      k == kInfinity ? make_direction(QuadNum(0), QuadNum(1))
      : genus == 2   ? make_direction(QuadNum(p.w), QuadNum(2 * k))
                     : make_direction(QuadNum(p.w), QuadNum(k));
  if (genus == 3) return butterfly_chain_transport(src, p, k, v);
  const Prototype predicted =
      k == kInfinity ? binfty_params(p) : butterfly_params(p, k);
  const Decomposition dec = decompose(*src, v);
  const CutPresentation cut = cut_along(*src, dec);
  const Surface& c = *cut.cut;
  const int ncells = static_cast<int>(c.cells().size());

  // Family pattern: the simple cylinders become the square cells of the new
  // model, the others its long cells.
  std::vector<int> square_set, longs;
  for (int i = 0; i < static_cast<int>(dec.cylinders.size()); ++i)
    (dec.cylinders[i].simple ? square_set : longs).push_back(i);
  const size_t want_squares = genus == 4 ? 2 : 1;
  const size_t want_longs = genus == 2 ? 1 : 2;
  if (square_set.size() != want_squares || longs.size() != want_longs)
    throw HypothesisError(
        "direction does not decompose in the family pattern");
  auto cells_equal = [&](int i, int j) {
    return c.cells()[i].width == c.cells()[j].width &&
           c.cells()[i].height == c.cells()[j].height;
  };
  for (int i : square_set)
    if (!cells_equal(i, square_set[0]))
      throw HypothesisError("short cylinders have unequal dimensions");
  for (int i : longs)
    if (!cells_equal(i, longs[0]))
      throw HypothesisError("long cylinders have unequal dimensions");
  auto is_square_cell = [&](int d) {
    return std::find(square_set.begin(), square_set.end(), d) !=
           square_set.end();
  };

  // Long-cell roles: lb feeds the squares, lt receives their top sides.
  int lb = -1, lt = -1;
  for (int l : longs) {
    bool feeds = false;
    for (int si : c.top_seam_indices(l))
      if (is_square_cell(c.seams()[si].dst)) feeds = true;
    if (feeds) {
      if (lb != -1)
        throw HypothesisError("both long cylinders feed the short ones");
      lb = l;
    }
  }
  if (lb == -1)
    throw HypothesisError("no long cylinder feeds the short ones");
  lt = genus == 2 ? lb : (longs[0] == lb ? longs[1] : longs[0]);
  for (int q : square_set)
    for (int si : c.top_seam_indices(q))
      if (c.seams()[si].dst != lt)
        throw HypothesisError(
            "a short cylinder's top does not land on the receiving long one");

  // The gluing run of lb's top into the squares fixes the square order and
  // the bottom anchors; the run of lt's top into lb fixes its anchor.
  const int run0 = run_start_seam(c, lb, is_square_cell);
  std::vector<int> squares;          // cut cells in target order u1, u2, ...
  std::vector<QuadNum> square_bstart;  // image start on each square's bottom
  for (int si : run_members(c, lb, run0, is_square_cell)) {
    const Seam& sm = c.seams()[si];
    if (squares.empty() || squares.back() != sm.dst) {
      if (std::find(squares.begin(), squares.end(), sm.dst) != squares.end())
        throw HypothesisError("interleaved gluing run into the short cells");
      squares.push_back(sm.dst);
      square_bstart.push_back(sm.y0);
    }
  }
  if (squares.size() != want_squares)
    throw HypothesisError("gluing run misses a short cylinder");
  const QuadNum a_lb = c.seams()[run0].x0;
  QuadNum a_lt = a_lb;
  if (genus != 2) {
    const int runt =
        run_start_seam(c, lt, [&](int d) { return d == lb; });
    a_lt = c.seams()[runt].x0;
  }

  // Measured target parameters from the cut-cell dimension ratios.
  const Cell& sqc = c.cells()[squares[0]];
  const Cell& lgc = c.cells()[lb];
  const auto wr = read_half_trace_ratio(sqc.width / lgc.width, D,
                                        "circumference ratio");
  const auto hr =
      read_half_trace_ratio(sqc.height / lgc.height, D, "width ratio");
  if (wr.e != hr.e)
    throw HypothesisError("dimension ratios disagree on the trace");
  const long wq = wr.n, hq = hr.n, eq = wr.e;
  if (Integer(eq) * eq + Integer(4) * lambda_coupling(genus) * wq * hq != D)
    throw HypothesisError("measured parameters miss the discriminant");
  const QuadNum lamq = (QuadNum(eq) + QuadNum::sqrt_of(D)) / QuadNum(2);

  const bool half = genus == 4;
  const QuadNum lam_cell = half ? lamq / QuadNum(2) : lamq;
  const QuadNum w_cell =
      half ? QuadNum(Rational(wq, 2)) : QuadNum(wq);
  const QuadNum h_cell =
      half ? QuadNum(Rational(hq, 2)) : QuadNum(hq);

  const QuadNum alpha = lam_cell / sqc.width;
  const QuadNum beta = lam_cell / sqc.height;
  if (alpha * lgc.width != w_cell || beta * lgc.height != h_cell)
    throw InternalError("scale factors disagree with the measured target");

  // Shear: the first square's top-side cone visit must sit over its bottom
  // one, up to full turns around the square.
  const int u1 = squares[0];
  QuadNum s_u;
  {
    int hits = 0;
    for (const Instance& inst : c.cone_instances())
      if (inst.cell == u1 && inst.top) {
        s_u = inst.x;
        ++hits;
      }
    if (hits != 1)
      throw HypothesisError("short cylinder has more than one top saddle");
  }
  const QuadNum rho_u1 = -(alpha * square_bstart[0]);
  const QuadNum sigma0 = -(alpha * s_u + rho_u1) / sqc.height;

  auto rho_long_at = [&](const QuadNum& sigma, const QuadNum& anchor) {
    return -(alpha * anchor + sigma * lgc.height);
  };

  // The tilt is read off the seam carrying the first square's top side.
  const Seam& tilt_seam = c.seam_from_top(u1, s_u);
  if (tilt_seam.dst != lt)
    throw HypothesisError(
        "first square's top does not land on the receiving long cell");
  const QuadNum tau0_q =
      alpha * tilt_seam.y0 + rho_long_at(sigma0, genus == 2 ? a_lb : a_lt);
  if (!tau0_q.is_rational())
    throw HypothesisError("measured tilt is irrational");
  const Rational tau0 = tau0_q.a();

  // Relabeling onto the target's cell order.
  std::vector<int> pi(ncells, -1);
  pi[lb] = 0;
  if (genus == 2) {
    pi[squares[0]] = 1;
  } else if (genus == 3) {
    pi[squares[0]] = 1;
    pi[lt] = 2;
  } else {
    pi[squares[0]] = 1;
    pi[squares[1]] = 2;
    pi[lt] = 3;
  }

  const Rational Wc = half ? Rational(wq, 2) : Rational(wq);
  const Rational Hc = half ? Rational(hq, 2) : Rational(hq);
  const long gwh = std::gcd(wq, hq);

  struct Winner {
    Prototype cand;
    QuadNum sigma;
    std::vector<QuadNum> rho;
    std::shared_ptr<const Surface> target;
  };
  std::optional<Winner> winner;

  for (long tq = 0; tq < gwh; ++tq) {
    const Prototype cand{genus, wq, hq, tq, eq};
    if (!is_valid(cand)) continue;
    const auto sol = solve_lattice(Hc, Wc, tau0 - Rational(tq));
    if (!sol.ok) continue;
    const QuadNum sigma = sigma0 + QuadNum(Rational(sol.m)) * beta;

    std::vector<QuadNum> rho(ncells);
    rho[lb] = rho_long_at(sigma, a_lb);
    if (genus != 2) rho[lt] = rho_long_at(sigma, a_lt);
    for (size_t j = 0; j < squares.size(); ++j)
      rho[squares[j]] = -(alpha * square_bstart[j]);

    auto target = std::make_shared<const Surface>(Surface::build(cand));
    bool cells_ok = true;
    for (int i = 0; i < ncells; ++i) {
      const Cell& tc = target->cells()[pi[i]];
      if (alpha * c.cells()[i].width != tc.width ||
          beta * c.cells()[i].height != tc.height)
        cells_ok = false;
    }
    if (!cells_ok) continue;

    std::vector<Seam> emitted;
    for (const Seam& sm : c.seams()) {
      const int tcell = pi[sm.src], tdst = pi[sm.dst];
      const QuadNum Wt = target->cells()[tcell].width;
      const QuadNum Wd = target->cells()[tdst].width;
      const QuadNum start =
          qmod(alpha * sm.x0 + sigma * c.cells()[sm.src].height + rho[sm.src],
               Wt);
      const QuadNum len = alpha * sm.length();
      const QuadNum y = qmod(alpha * sm.y0 + rho[sm.dst], Wd);
      if (start + len <= Wt) {
        emitted.push_back({tcell, start, start + len, tdst, y});
      } else {
        emitted.push_back({tcell, start, Wt, tdst, y});
        emitted.push_back({tcell, QuadNum(0), start + len - Wt, tdst,
                           qmod(y + (Wt - start), Wd)});
      }
    }
    const std::vector<Seam> merged = sorted_merged(emitted, target->cells());
    if (!seams_equal(merged, target->seams())) continue;

    if (winner) throw InternalError("butterfly normalization is ambiguous");
    winner = Winner{cand, sigma, std::move(rho), target};
  }
  if (!winner)
    throw HypothesisError(
        "renormalized surface does not match any model in the family");
  if (winner->cand != predicted)
    throw HypothesisError(
        "measured target parameters differ from the closed-form move");

  const QuadNum sigma = winner->sigma;
  const std::vector<QuadNum> rho = winner->rho;
  auto tgt = winner->target;

  const Mat2 N{alpha, sigma, QuadNum(0), beta};
  const Mat2 M = N * cut.to_cut.derivative;
  const long dy = genus == 2 ? 2 * k : k;  // the move slope numerator
  const Mat2 matrix =
      k == kInfinity
          ? Mat2{QuadNum(0), QuadNum(1), QuadNum(-1), QuadNum(0)}
          : Mat2{QuadNum(p.w), lambda_of(p), QuadNum(dy), QuadNum(1)}.inverse();
  const Mat2 normalization = M * matrix.inverse();
  if (!normalization.c.is_zero())
    throw InternalError("normalization is not upper triangular");

  TransportResult out;
  out.source = src;
  out.target = tgt;
  out.move = ButterflyMove{k, p, winner->cand, matrix, normalization,
                           winner->cand};

  out.map.derivative = M;
  out.map.fn = [src, cut, pi, rho, alpha, beta, sigma,
                tgt](const SurfacePoint& q0) -> SurfacePoint {
    const SurfacePoint q = apply_map(*src, *cut.cut, cut.to_cut, q0);
    const int tcell = pi[q.cell];
    const QuadNum X = qmod(alpha * q.x + sigma * q.y + rho[q.cell],
                           tgt->cells()[tcell].width);
    return tgt->normalized({tcell, X, beta * q.y});
  };

  std::vector<int> pi_inv(ncells, -1);
  for (int i = 0; i < ncells; ++i) pi_inv[pi[i]] = i;
  out.inverse.derivative = M.inverse();
  out.inverse.fn = [src, cut, pi_inv, rho, alpha, beta, sigma,
                    tgt](const SurfacePoint& q0) -> SurfacePoint {
    const SurfacePoint q = tgt->normalized(q0);
    const int ccell = pi_inv[q.cell];
    const QuadNum ycut = q.y / beta;
    const QuadNum xcut =
        qmod((q.x - sigma * ycut - rho[ccell]) / alpha,
             cut.cut->cells()[ccell].width);
    return apply_map(*cut.cut, *src, cut.from_cut, {ccell, xcut, ycut});
  };
  return out;
}

SurfacePoint transport_point(const TransportResult& t, const SurfacePoint& p) {
  return apply_map(*t.source, *t.target, t.map, p);
}

Generator twist_h(long power) {
  return {Generator::Kind::HorizontalTwist, power, 0};
}
Generator twist_v(long power) {
  return {Generator::Kind::VerticalTwist, power, 0};
}
Generator involution_gen() { return {Generator::Kind::Involution, 1, 0}; }
Generator butterfly_gen(long k) { return {Generator::Kind::Butterfly, 1, k}; }

WordResult word_apply(const Surface& s, const std::vector<Generator>& word,
                      const SurfacePoint& p0) {
  if (!s.prototype())
    throw DomainError("word evaluation needs a built prototype model");
  auto cur = std::make_shared<const Surface>(s);
  SurfacePoint pt = cur->normalized(p0);
  Mat2 total = Mat2::identity();
  WordResult out;
  for (const Generator& g : word) {
    WordStep step;
    switch (g.kind) {
      case Generator::Kind::HorizontalTwist:
      case Generator::Kind::VerticalTwist: {
        const bool horiz = g.kind == Generator::Kind::HorizontalTwist;
        const Direction dir = horiz ? make_direction(QuadNum(1), QuadNum(0))
                                    : make_direction(QuadNum(0), QuadNum(1));
        const Decomposition d = decompose(*cur, dir);
        const PointMap tw = multi_twist(*cur, d, g.power);
        pt = apply_map(*cur, tw, pt);
        step.derivative = tw.derivative;
        step.generator = power_label(horiz ? "T_H" : "T_V", g.power);
        break;
      }
      case Generator::Kind::Involution: {
        const PointMap io = prym_involution(*cur);
        pt = apply_map(*cur, io, pt);
        step.derivative = io.derivative;
        step.generator = "i";
        break;
      }
      case Generator::Kind::Butterfly: {
        const TransportResult tr = butterfly(*cur, g.k);
        pt = transport_point(tr, pt);
        cur = tr.target;
        step.derivative = tr.map.derivative;
        step.generator = g.k == kInfinity
                             ? std::string("B_inf")
                             : "B_" + std::to_string(g.k);
        break;
      }
    }
    total = step.derivative * total;
    step.params_after = *cur->prototype();
    step.point_after = pt;
    out.trace.push_back(std::move(step));
  }
  out.surface = cur;
  out.point = pt;
  out.derivative = total;
  return out;
}

}  // namespace prym
