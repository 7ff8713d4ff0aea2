#include "prym/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <utility>

namespace prym {

namespace {

long to_long(const Integer& z) {
  if (!z.fits_slong_p()) throw InternalError("integer out of range");
  return z.get_si();
}

int instance_index(const Surface& s, int cell, bool top, const QuadNum& x) {
  const auto& inst = s.cone_instances();
  for (int i = 0; i < static_cast<int>(inst.size()); ++i)
    if (inst[i].cell == cell && inst[i].top == top && inst[i].x == x) return i;
  throw InternalError("gluing-circle point is not a cone instance");
}

std::vector<int> bottom_instances(const Surface& s) {
  std::vector<int> out;
  const auto& inst = s.cone_instances();
  for (int i = 0; i < static_cast<int>(inst.size()); ++i)
    if (!inst[i].top) out.push_back(i);
  return out;
}

}  // namespace

Direction make_direction(const QuadNum& dx0, const QuadNum& dy0) {
  QuadNum dx = dx0, dy = dy0;
  if (dx.is_zero() && dy.is_zero())
    throw DomainError("direction (0, 0) is not allowed");
  if (dy.sign() < 0 || (dy.is_zero() && dx.sign() < 0)) {
    dx = -dx;
    dy = -dy;
  }
  if (dy.is_zero()) return {QuadNum(1), QuadNum(0)};
  if (dx.is_zero()) return {QuadNum(0), QuadNum(1)};
  const QuadNum slope = dx / dy;  // also rejects mixed-field coordinates
  if (slope.is_rational()) {
    const Rational& r = slope.a();  // canonical form has positive denominator
    return {QuadNum(Rational(r.get_num())), QuadNum(Rational(r.get_den()))};
  }
  return {slope, QuadNum(1)};
}

QuadNum norm_sq(const Direction& v) { return v.dx * v.dx + v.dy * v.dy; }

bool is_horizontal(const Direction& v) { return v.dy.is_zero(); }

std::string to_string(const Direction& v) {
  return "(" + v.dx.str() + ", " + v.dy.str() + ")";
}

int upward_ray_count(const Surface& s) {
  return static_cast<int>(bottom_instances(s).size());
}

long default_budget(const Surface& s, const Direction& v) {
  long base = s.discriminant();
  if (s.prototype()) {
    const Prototype& p = *s.prototype();
    base = p.w + p.h + std::labs(p.e);
  }
  long k = s.discriminant();
  if (is_horizontal(v)) {
    k = 1;
  } else if (v.dx.is_rational() && v.dy.is_rational()) {
    k = std::labs(to_long(v.dx.a().get_num())) + to_long(v.dy.a().get_num());
  }
  return 16 * (base + k);
}

SaddleConnection trace_separatrix(const Surface& s, int ray_index,
                                  const Direction& v0, long budget) {
  const Direction v = make_direction(v0.dx, v0.dy);
  const std::vector<int> rays = bottom_instances(s);
  if (ray_index < 0 || ray_index >= static_cast<int>(rays.size()))
    throw DomainError("separatrix ray index out of range");
  if (budget <= 0) budget = default_budget(s, v);
  const Instance& start = s.cone_instances()[rays[ray_index]];

  SaddleConnection sc;
  sc.start_instance = rays[ray_index];
  sc.length_units = QuadNum(0);

  if (is_horizontal(v)) {
    // The ray runs rightward along the bottom circle to the next instance.
    const auto& arcs = s.bottom_arcs(start.cell);
    const QuadNum W = s.cells()[start.cell].width;
    QuadNum next = arcs.front().first + W;
    for (const auto& arc : arcs) {
      if (arc.first > start.x) {
        next = arc.first;
        break;
      }
    }
    sc.length_units = next - start.x;
    sc.end_instance = instance_index(s, start.cell, false, qmod(next, W));
    return sc;
  }

  const QuadNum slope = v.dx / v.dy;
  int c = start.cell;
  QuadNum x = start.x;
  for (long step = 0;; ++step) {
    if (step >= budget)
      throw BudgetError("separatrix exceeded its cell-crossing budget");
    const Cell& cell = s.cells()[c];
    sc.chords.push_back({c, x, -1, -1});
    sc.length_units += cell.height / v.dy;
    const QuadNum x_top = qmod(x + cell.height * slope, cell.width);
    const Seam& seam = s.seam_from_top(c, x_top);
    if (x_top == seam.x0) {  // a top partition point: the cone class
      sc.end_instance = instance_index(s, c, true, x_top);
      break;
    }
    x = s.seam_image(seam, x_top);
    c = seam.dst;
  }
  return sc;
}

namespace {

// Shared tail of the decomposition: moduli, commensurability, the twist
// constant and the multiplicities, plus the exact area check.
void finish_decomposition(const Surface& s, Decomposition& d) {
  const QuadNum nsq = norm_sq(d.dir);
  for (Cylinder& c : d.cylinders)
    c.modulus = c.height_units / (c.circumference_units * nsq);

  const QuadNum base = d.cylinders.front().modulus;
  Integer lcm_p = 1, gcd_q = 0;
  for (const Cylinder& c : d.cylinders) {
    const QuadNum r = base / c.modulus;
    if (!r.is_rational())
      throw HypothesisError(
          "cylinder moduli are not commensurable; the direction is not "
          "parabolic");
    lcm_p = lcm(lcm_p, r.a().get_num());
    gcd_q = gcd(gcd_q, r.a().get_den());
  }
  d.twist_constant = QuadNum(Rational(lcm_p, gcd_q)) / base;
  Integer common = 0;
  for (Cylinder& c : d.cylinders) {
    const QuadNum a = d.twist_constant * c.modulus;
    if (!a.is_rational() || a.a().get_den() != 1 || sign_of(a.a()) <= 0)
      throw InternalError("twist multiplicity is not a positive integer");
    c.multiplicity = to_long(a.a().get_num());
    common = gcd(common, a.a().get_num());
  }
  if (common != 1) throw InternalError("twist constant is not minimal");

  QuadNum total(0);
  for (const Cylinder& c : d.cylinders)
    total += c.circumference_units * c.height_units;
  if (total != s.area())
    throw InternalError("cylinder areas do not add up to the surface area");
}

Decomposition decompose_horizontal(const Surface& s, const Direction& v,
                                   long budget) {
  Decomposition d;
  d.surface = &s;
  d.dir = v;
  for (int r = 0; r < upward_ray_count(s); ++r)
    d.saddles.push_back(trace_separatrix(s, r, v, budget));
  for (int c = 0; c < static_cast<int>(s.cells().size()); ++c) {
    Cylinder cyl;
    cyl.circumference_units = s.cells()[c].width;
    cyl.height_units = s.cells()[c].height;
    cyl.lower_saddle_count = static_cast<int>(s.bottom_arcs(c).size());
    cyl.upper_saddle_count = static_cast<int>(s.top_seam_indices(c).size());
    cyl.simple = cyl.lower_saddle_count == 1 && cyl.upper_saddle_count == 1;
    d.cylinders.push_back(std::move(cyl));
  }
  d.cell_chords.assign(s.cells().size(), {});
  d.cell_bands.assign(s.cells().size(), {});
  finish_decomposition(s, d);
  return d;
}

Decomposition decompose_impl(const Surface& s, const Direction& v,
                             long budget) {
  if (is_horizontal(v)) return decompose_horizontal(s, v, budget);

  Decomposition d;
  d.surface = &s;
  d.dir = v;
  const QuadNum slope = v.dx / v.dy;
  const int ncells = static_cast<int>(s.cells().size());

  for (int r = 0; r < upward_ray_count(s); ++r) {
    SaddleConnection sc = trace_separatrix(s, r, v, budget);
    const int sid = static_cast<int>(d.saddles.size());
    for (int k = 0; k < static_cast<int>(sc.chords.size()); ++k) {
      sc.chords[k].saddle = sid;
      sc.chords[k].index = k;
      d.chords.push_back(sc.chords[k]);
    }
    d.saddles.push_back(std::move(sc));
  }

  // Sort the chords of each cell by intercept; intercepts are distinct.
  d.cell_chords.assign(ncells, {});
  for (int i = 0; i < static_cast<int>(d.chords.size()); ++i)
    d.cell_chords[d.chords[i].cell].push_back(i);
  for (int c = 0; c < ncells; ++c) {
    auto& list = d.cell_chords[c];
    if (list.empty())
      throw InternalError("a cell is not crossed by any separatrix");
    std::sort(list.begin(), list.end(), [&](int i, int j) {
      return d.chords[i].b < d.chords[j].b;
    });
    for (size_t k = 1; k < list.size(); ++k)
      if (d.chords[list[k - 1]].b == d.chords[list[k]].b)
        throw InternalError("two distinct chords share an intercept");
  }

  // Bands between consecutive chords; the last one wraps past x = 0.
  d.cell_bands.assign(ncells, {});
  for (int c = 0; c < ncells; ++c) {
    const auto& list = d.cell_chords[c];
    const QuadNum W = s.cells()[c].width;
    const int k = static_cast<int>(list.size());
    for (int j = 0; j < k; ++j) {
      Band band;
      band.cell = c;
      band.b_lo = d.chords[list[j]].b;
      band.b_hi = j + 1 < k ? d.chords[list[j + 1]].b : d.chords[list[0]].b + W;
      band.upper_chord = list[j];
      band.lower_chord = list[(j + 1) % k];
      d.cell_bands[c].push_back(static_cast<int>(d.bands.size()));
      d.bands.push_back(std::move(band));
    }
  }

  // Each band's top arc lies in a single seam and maps onto the band of the
  // destination cell starting at the image of its left endpoint.
  std::vector<int> next(d.bands.size(), -1);
  for (size_t i = 0; i < d.bands.size(); ++i) {
    const Band& band = d.bands[i];
    const Cell& cell = s.cells()[band.cell];
    const QuadNum width = band.b_hi - band.b_lo;
    const QuadNum a_left = qmod(band.b_lo + cell.height * slope, cell.width);
    if (a_left + width > cell.width)
      throw InternalError("a band's top arc wraps past a partition point");
    const Seam& seam = s.seam_from_top(band.cell, a_left + width / QuadNum(2));
    const QuadNum v_left = s.seam_image(seam, a_left);
    for (int j : d.cell_bands[seam.dst]) {
      if (d.bands[j].b_lo == v_left) {
        if (d.bands[j].b_hi - d.bands[j].b_lo != width)
          throw InternalError("adjacent bands have different widths");
        next[i] = j;
        break;
      }
    }
    if (next[i] < 0)
      throw InternalError("a band's top arc does not match a band below");
  }

  const auto continues_upper = [&](int b1, int b2) {
    const Chord& c1 = d.chords[d.bands[b1].upper_chord];
    const Chord& c2 = d.chords[d.bands[b2].upper_chord];
    return c2.saddle == c1.saddle && c2.index == c1.index + 1;
  };
  const auto continues_lower = [&](int b1, int b2) {
    const Chord& c1 = d.chords[d.bands[b1].lower_chord];
    const Chord& c2 = d.chords[d.bands[b2].lower_chord];
    return c2.saddle == c1.saddle && c2.index == c1.index + 1;
  };

  // Chase the chains of bands; each cycle is a cylinder. Start every chain
  // just after a cone visit on its upper side so that, in the cut
  // presentation, no seam arc wraps around the cylinder.
  std::vector<char> visited(d.bands.size(), 0);
  for (size_t i0 = 0; i0 < d.bands.size(); ++i0) {
    if (visited[i0]) continue;
    std::vector<int> chain;
    int i = static_cast<int>(i0);
    do {
      visited[i] = 1;
      chain.push_back(i);
      i = next[i];
    } while (i != static_cast<int>(i0));
    const int n = static_cast<int>(chain.size());
    int start = -1;
    for (int k = 0; k < n; ++k) {
      if (!continues_upper(chain[k], chain[(k + 1) % n])) {
        start = (k + 1) % n;
        break;
      }
    }
    if (start < 0)
      throw InternalError("a cylinder boundary is a smooth closed leaf");
    std::rotate(chain.begin(), chain.begin() + start, chain.end());

    Cylinder cyl;
    const int id = static_cast<int>(d.cylinders.size());
    QuadNum offset(0);
    for (int k = 0; k < n; ++k) {
      Band& band = d.bands[chain[k]];
      band.cylinder = id;
      band.pos = k;
      band.x_offset = offset;
      offset += s.cells()[band.cell].height / v.dy;
    }
    cyl.circumference_units = offset;
    cyl.height_units =
        v.dy * (d.bands[chain[0]].b_hi - d.bands[chain[0]].b_lo);
    for (int k = 0; k < n; ++k) {
      if (!continues_upper(chain[k], chain[(k + 1) % n]))
        ++cyl.upper_saddle_count;
      if (!continues_lower(chain[k], chain[(k + 1) % n]))
        ++cyl.lower_saddle_count;
    }
    cyl.simple = cyl.upper_saddle_count == 1 && cyl.lower_saddle_count == 1;
    cyl.bands = std::move(chain);
    d.cylinders.push_back(std::move(cyl));
  }

  finish_decomposition(s, d);
  return d;
}

}  // namespace

Decomposition decompose(const Surface& s, const Direction& v0, long budget) {
  const Direction v = make_direction(v0.dx, v0.dy);
  const long b = budget > 0 ? budget : default_budget(s, v);
  try {
    return decompose_impl(s, v, b);
  } catch (const BudgetError&) {
    return decompose_impl(s, v, 2 * b);
  }
}

Decomposition::Location Decomposition::locate(const SurfacePoint& p0) const {
  const SurfacePoint p = surface->normalized(p0);
  Location loc;
  if (is_horizontal(dir)) {
    if (p.y.is_zero()) {
      loc.on_saddle = true;
      loc.cylinder = p.cell;
      return loc;
    }
    loc.cylinder = p.cell;
    loc.transversal_ratio = p.y / surface->cells()[p.cell].height;
    return loc;
  }
  const QuadNum W = surface->cells()[p.cell].width;
  QuadNum b = qmod(p.x - p.y * (dir.dx / dir.dy), W);
  for (int ci : cell_chords[p.cell]) {
    if (chords[ci].b == b) {
      loc.on_saddle = true;
      loc.chord = ci;
      return loc;
    }
  }
  const auto& list = cell_bands[p.cell];
  if (b < bands[list.front()].b_lo) b += W;
  int found = -1;
  for (int bi : list) {
    if (bands[bi].b_lo <= b && b < bands[bi].b_hi) {
      found = bi;
      break;
    }
  }
  if (found < 0) throw InternalError("point escapes the band tiling");
  loc.cylinder = bands[found].cylinder;
  loc.band = found;
  loc.transversal_ratio =
      (bands[found].b_hi - b) / (bands[found].b_hi - bands[found].b_lo);
  return loc;
}

QuadNum Decomposition::area() const {
  QuadNum total(0);
  for (const Cylinder& c : cylinders)
    total += c.circumference_units * c.height_units;
  return total;
}

SurfacePoint flow_from(const Surface& s, const SurfacePoint& p0,
                       const Direction& v, const QuadNum& time) {
  SurfacePoint p = s.normalized(p0);
  const QuadNum dx = v.dx, dy = v.dy;
  if (is_horizontal(v)) {
    const Cell& cell = s.cells()[p.cell];
    return s.normalized({p.cell, qmod(p.x + time * dx, cell.width), p.y});
  }
  QuadNum remaining = time;
  // Crossing count bound: total transversal travel over the least height.
  double min_h = 0.0;
  for (const Cell& c : s.cells()) {
    const double h = c.height.approx();
    if (min_h == 0.0 || h < min_h) min_h = h;
  }
  const long cap =
      static_cast<long>(std::abs(time.approx() * dy.approx()) / min_h) +
      static_cast<long>(s.cells().size()) + 4;
  for (long guard = 0;; ++guard) {
    if (guard > cap) throw InternalError("directional flow did not terminate");
    const Cell& cell = s.cells()[p.cell];
    if (remaining.sign() >= 0) {
      const QuadNum to_top = (cell.height - p.y) / dy;
      if (remaining < to_top)
        return s.normalized(
            {p.cell, p.x + remaining * dx, p.y + remaining * dy});
      remaining -= to_top;
      p = s.normalized(
          {p.cell, qmod(p.x + to_top * dx, cell.width), cell.height});
      if (remaining.is_zero()) return p;
      if (s.is_cone(p)) throw DomainError("flow line hits the cone class");
    } else {
      const QuadNum to_bottom = p.y / dy;
      if (to_bottom > -remaining)
        return s.normalized(
            {p.cell, p.x + remaining * dx, p.y + remaining * dy});
      remaining += to_bottom;
      const QuadNum xb = qmod(p.x - to_bottom * dx, cell.width);
      if (remaining.is_zero()) return s.normalized({p.cell, xb, QuadNum(0)});
      // Descend through the seam gluing this bottom-circle point.
      const Seam& sm = s.seam_into_bottom(p.cell, xb);
      p = {sm.src, s.seam_preimage(sm, xb), s.cells()[sm.src].height};
      if (s.is_cone(p)) throw DomainError("flow line hits the cone class");
    }
  }
}

PointMap multi_twist(const Surface& s, const Decomposition& d, long power) {
  if (power == 0) throw DomainError("multi-twist power must be nonzero");
  PointMap m;
  const QuadNum t = QuadNum(power) * d.twist_constant;
  if (is_horizontal(d.dir)) {
    m.derivative = {QuadNum(1), t, QuadNum(0), QuadNum(1)};
    for (int c = 0; c < static_cast<int>(s.cells().size()); ++c) {
      const Cell& cell = s.cells()[c];
      const QuadNum shear =
          QuadNum(d.cylinders[c].multiplicity) * cell.width / cell.height;
      if (shear != d.twist_constant)
        throw InternalError("multi-twist shear varies between cylinders");
      m.pieces.push_back({c, c, m.derivative, QuadNum(0), QuadNum(0)});
    }
    return m;
  }

  const QuadNum nsq = norm_sq(d.dir);
  const QuadNum f = t / nsq;
  const QuadNum dx = d.dir.dx, dy = d.dir.dy;
  m.derivative = {QuadNum(1) - f * dx * dy, f * dx * dx, -f * dy * dy,
                  QuadNum(1) + f * dx * dy};
  const Surface* sp = &s;
  auto dd = std::make_shared<const Decomposition>(d);
  m.fn = [sp, dd, power](const SurfacePoint& p0) -> SurfacePoint {
    const Surface& s = *sp;
    SurfacePoint p = s.normalized(p0);
    const auto loc = dd->locate(p);
    if (loc.on_saddle) return p;
    const Cylinder& cyl = dd->cylinders[loc.cylinder];
    // Advance along the leaf by (power * a * L) * (transversal offset / h).
    const QuadNum displacement = QuadNum(power) *
                                 QuadNum(cyl.multiplicity) *
                                 cyl.circumference_units *
                                 loc.transversal_ratio;
    return flow_from(s, p, dd->dir, displacement);
  };
  return m;
}

std::vector<Region> region_structure(const Decomposition& along, int cyl,
                                     const Decomposition& transverse) {
  if (along.surface != transverse.surface)
    throw DomainError("decompositions live on different surfaces");
  const Surface& s = *along.surface;
  const Direction u = along.dir, v = transverse.dir;
  const QuadNum kappa = v.dx * u.dy - u.dx * v.dy;
  if (kappa.is_zero())
    throw DomainError("transverse decomposition is parallel to the cylinder");
  if (cyl < 0 || cyl >= static_cast<int>(along.cylinders.size()))
    throw DomainError("cylinder index out of range");

  std::vector<Region> out;

  if (is_horizontal(u)) {
    // The transverse bands of this cell are exactly the regions.
    for (int bi : transverse.cell_bands[cyl]) {
      const Band& band = transverse.bands[bi];
      out.push_back({qmod(band.b_lo, s.cells()[cyl].width),
                     band.b_hi - band.b_lo, band.cylinder});
    }
    std::sort(out.begin(), out.end(),
              [](const Region& a, const Region& b) { return a.start < b.start; });
    return out;
  }

  const Cylinder& H = along.cylinders[cyl];
  const QuadNum L = H.circumference_units;

  std::vector<QuadNum> cuts;
  const auto add_cut = [&](const QuadNum& x) {
    const QuadNum xr = qmod(x, L);
    for (const QuadNum& c : cuts)
      if (c == xr) return;
    cuts.push_back(xr);
  };

  if (is_horizontal(v)) {
    // Horizontal saddle connections run along the gluing circles, so the
    // cuts are the band boundaries of the chain itself.
    for (int bi : H.bands) add_cut(along.bands[bi].x_offset);
  } else {
    // A transverse chord x = b_v + y * (v.dx / v.dy) crosses the lower edge
    // of band [b_lo, b_hi) where its intercept equals b_hi modulo the width.
    const QuadNum delta = v.dx / v.dy - u.dx / u.dy;  // = kappa/(v.dy*u.dy)
    for (int bi : H.bands) {
      const Band& band = along.bands[bi];
      const Cell& cell = s.cells()[band.cell];
      for (int ci : transverse.cell_chords[band.cell]) {
        const QuadNum& bv = transverse.chords[ci].b;
        // Solve b_hi + k*W - bv = y*delta with y in [0, height].
        const QuadNum lo = delta.sign() > 0 ? QuadNum(0) : cell.height * delta;
        const QuadNum hi = delta.sign() > 0 ? cell.height * delta : QuadNum(0);
        const Integer k0 = ((lo + bv - band.b_hi) / cell.width).floor() - 1;
        const Integer k1 = ((hi + bv - band.b_hi) / cell.width).floor() + 1;
        for (Integer k = k0; k <= k1; ++k) {
          const QuadNum y =
              (band.b_hi + cell.width * QuadNum(Rational(k)) - bv) / delta;
          if (y.sign() < 0 || y > cell.height) continue;
          add_cut(band.x_offset + y / u.dy);
        }
      }
    }
  }

  if (cuts.empty())
    throw InternalError("a cylinder is not crossed by the transverse "
                        "decomposition");
  std::sort(cuts.begin(), cuts.end());

  // Label each strip by the transverse cylinder through its midpoint.
  const auto point_at = [&](const QuadNum& X, const QuadNum& ratio)
      -> SurfacePoint {
    int bi = H.bands.front();
    for (int j : H.bands) {
      if (along.bands[j].x_offset <= X) bi = j;
      else break;
    }
    const Band& band = along.bands[bi];
    const QuadNum y = (X - band.x_offset) * u.dy;
    const QuadNum b = band.b_hi - ratio * (band.b_hi - band.b_lo);
    const Cell& cell = s.cells()[band.cell];
    return {band.cell, qmod(b + y * (u.dx / u.dy), cell.width), y};
  };

  QuadNum widths(0);
  for (size_t j = 0; j < cuts.size(); ++j) {
    const QuadNum start = cuts[j];
    const QuadNum end = j + 1 < cuts.size() ? cuts[j + 1] : cuts[0] + L;
    const QuadNum mid = qmod(start + (end - start) / QuadNum(2), L);
    const auto loc = transverse.locate(point_at(mid, QuadNum(Rational(1, 2))));
    if (loc.on_saddle)
      throw InternalError("region midpoint lies on a transverse saddle");
    out.push_back({start, end - start, loc.cylinder});
    widths += end - start;
  }
  if (widths != L)
    throw InternalError("region widths do not add up to the circumference");
  return out;
}

G4Widths verify_g4_widths(const Surface& s) {
  if (s.genus() != 4 || !s.prototype())
    throw DomainError("width identities require a genus-4 polygonal model");
  const Prototype p = *s.prototype();
  const QuadNum lam = lambda_of(p);
  const Direction v = make_direction(lam, QuadNum(1));
  const Decomposition d = decompose(s, v);
  if (d.cylinders.size() != 4)
    throw HypothesisError("expected four cylinders in the slope-1/lambda "
                          "direction");
  std::vector<QuadNum> h;
  for (const Cylinder& c : d.cylinders) h.push_back(c.height_units);
  std::sort(h.begin(), h.end());
  if (!(h[0] == h[1] && h[2] == h[3] && h[1] < h[2]))
    throw HypothesisError("expected two short and two long cylinders");

  G4Widths out;
  out.small_units = h[0];
  out.large_units = h[3];
  const QuadNum sum = out.small_units + out.large_units;
  const QuadNum half = lam / QuadNum(2);
  if (sum != half)
    throw HypothesisError("short and long widths do not add up to lambda/2");

  // w_L = (n+1) * lambda/2 - w/2 for the winding count n of the long
  // cylinder; locate n from a float estimate, then confirm exactly.
  const QuadNum w_half{Rational(p.w, 2)};
  const long n0 = std::lround(
      (out.large_units.approx() + w_half.approx()) / half.approx() - 1.0);
  for (long n = std::max(1L, n0 - 1); n <= n0 + 1; ++n) {
    if (QuadNum(n + 1) * half - w_half == out.large_units) {
      out.n = n;
      return out;
    }
  }
  throw HypothesisError("long-cylinder width misses every winding count");
}

CutPresentation cut_along(const Surface& s, const Decomposition& d) {
  CutPresentation out;
  const Surface* sp = &s;

  if (is_horizontal(d.dir)) {
    out.cut = std::make_shared<Surface>(s);
    auto cut = out.cut;
    out.to_cut.fn = [sp](const SurfacePoint& p) { return sp->normalized(p); };
    out.from_cut.fn = [cut](const SurfacePoint& p) {
      return cut->normalized(p);
    };
    return out;
  }

  const QuadNum dx = d.dir.dx, dy = d.dir.dy;
  const QuadNum slope = dx / dy;
  std::vector<Cell> cells;
  for (const Cylinder& c : d.cylinders)
    cells.push_back({c.circumference_units, c.height_units});

  // One seam per chord: the chord lies on the top edge of the cylinder whose
  // band has it at b_lo, and on the bottom circle of the one with it at b_hi.
  std::vector<int> band_above(d.chords.size()), band_below(d.chords.size());
  for (int bi = 0; bi < static_cast<int>(d.bands.size()); ++bi) {
    band_above[d.bands[bi].upper_chord] = bi;
    band_below[d.bands[bi].lower_chord] = bi;
  }
  std::vector<Seam> seams;
  for (size_t ci = 0; ci < d.chords.size(); ++ci) {
    const Band& src = d.bands[band_above[ci]];
    const Band& dst = d.bands[band_below[ci]];
    const QuadNum len = s.cells()[d.chords[ci].cell].height / dy;
    seams.push_back({src.cylinder, src.x_offset, src.x_offset + len,
                     dst.cylinder, dst.x_offset});
  }
  // Merge seams that continue each other across a regular junction.
  std::sort(seams.begin(), seams.end(), [](const Seam& a, const Seam& b) {
    return a.src != b.src ? a.src < b.src : a.x0 < b.x0;
  });
  std::vector<Seam> merged;
  for (const Seam& seam : seams) {
    if (!merged.empty()) {
      Seam& last = merged.back();
      if (last.src == seam.src && last.dst == seam.dst &&
          last.x1 == seam.x0 &&
          qmod(last.y0 + (seam.x0 - last.x0),
               cells[last.dst].width) == seam.y0) {
        last.x1 = seam.x1;
        continue;
      }
    }
    merged.push_back(seam);
  }

  auto cut = std::make_shared<Surface>(std::move(cells), std::move(merged),
                                       s.genus(), s.discriminant());
  if (cut->area() != s.area())
    throw InternalError("cutting changed the surface area");
  out.cut = cut;

  auto dd = std::make_shared<const Decomposition>(d);
  out.to_cut.derivative = {QuadNum(0), QuadNum(1) / dy, -dy, dx};
  out.from_cut.derivative = out.to_cut.derivative.inverse();

  out.to_cut.fn = [sp, dd, cut, dy,
                   band_below](const SurfacePoint& p0) -> SurfacePoint {
    const Surface& s = *sp;
    const SurfacePoint p = s.normalized(p0);
    if (s.is_cone(p)) return cut->cone_point();
    const auto loc = dd->locate(p);
    if (loc.on_saddle) {
      // Land on the bottom circle of the cylinder below the chord.
      const Band& band = dd->bands[band_below[loc.chord]];
      return cut->normalized(
          {band.cylinder, band.x_offset + p.y / dy, QuadNum(0)});
    }
    const Band& band = dd->bands[loc.band];
    const QuadNum h = dd->cylinders[loc.cylinder].height_units;
    return cut->normalized({loc.cylinder, band.x_offset + p.y / dy,
                            h * loc.transversal_ratio});
  };

  out.from_cut.fn = [sp, dd, cut, dx, dy,
                     slope](const SurfacePoint& q0) -> SurfacePoint {
    const Surface& s = *sp;
    const SurfacePoint q = cut->normalized(q0);
    const Cylinder& cyl = dd->cylinders[q.cell];
    int bi = cyl.bands.front();
    for (int j : cyl.bands) {
      if (dd->bands[j].x_offset <= q.x) bi = j;
      else break;
    }
    const Band& band = dd->bands[bi];
    const QuadNum y = (q.x - band.x_offset) * dy;
    const QuadNum b = band.b_hi - q.y / dy;
    const Cell& cell = s.cells()[band.cell];
    return s.normalized({band.cell, qmod(b + y * slope, cell.width), y});
  };
  return out;
}

}  // namespace prym
