#include "prym/surface.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace prym {

QuadNum qmod(const QuadNum& x, const QuadNum& m) {
  if (m.sign() <= 0) throw DomainError("modulus must be positive");
  Integer q = (x / m).floor();
  return x - m * QuadNum(Rational(q));
}

bool lex_less(const SurfacePoint& p, const SurfacePoint& q) {
  if (p.cell != q.cell) return p.cell < q.cell;
  if (!(p.x == q.x)) return p.x < q.x;
  return p.y < q.y;
}

std::string to_string(const SurfacePoint& p) {
  return "cell " + std::to_string(p.cell) + " (" + p.x.str() + ", " +
         p.y.str() + ")";
}

Mat2 Mat2::identity() { return {QuadNum(1), QuadNum(), QuadNum(), QuadNum(1)}; }

Mat2 Mat2::scalar(const QuadNum& s) { return {s, QuadNum(), QuadNum(), s}; }

QuadNum Mat2::det() const { return a * d - b * c; }

Mat2 Mat2::inverse() const {
  QuadNum dt = det();
  return {d / dt, (QuadNum() - b) / dt, (QuadNum() - c) / dt, a / dt};
}

Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

Surface::Surface(std::vector<Cell> cells, std::vector<Seam> seams, int genus,
                 long discriminant, std::optional<Prototype> proto)
    : cells_(std::move(cells)),
      seams_(std::move(seams)),
      genus_(genus),
      discriminant_(discriminant),
      proto_(std::move(proto)) {
  validate();
}

QuadNum Surface::area() const {
  QuadNum total;
  for (const Cell& c : cells_) total += c.width * c.height;
  return total;
}

long Surface::euler_characteristic() const {
  // Gauss-Bonnet for one cone class of angle pi * #instances.
  return (2 - static_cast<long>(instances_.size())) / 2;
}

void Surface::validate() {
  if (genus_ < 2 || genus_ > 4) throw DomainError("genus must be 2, 3, or 4");
  if (discriminant_ <= 0) throw DomainError("discriminant must be positive");
  if (cells_.empty()) throw InternalError("surface has no cells");
  for (const Cell& c : cells_) {
    if (c.width.sign() <= 0 || c.height.sign() <= 0)
      throw InternalError("cell sides must be positive");
  }
  const int n = static_cast<int>(cells_.size());
  for (Seam& s : seams_) {
    if (s.src < 0 || s.src >= n || s.dst < 0 || s.dst >= n)
      throw InternalError("seam references a missing cell");
    if (s.x0.sign() < 0 || s.length().sign() <= 0 ||
        (s.x1 - cells_[s.src].width).sign() > 0)
      throw InternalError("seam source arc is not a proper top-edge arc");
    if ((s.length() - cells_[s.dst].width).sign() > 0)
      throw InternalError("seam arc is longer than the target circle");
    s.y0 = qmod(s.y0, cells_[s.dst].width);
  }
  std::sort(seams_.begin(), seams_.end(), [](const Seam& a, const Seam& b) {
    if (a.src != b.src) return a.src < b.src;
    return a.x0 < b.x0;
  });

  // Top edges must be tiled exactly by the source arcs.
  top_seams_.assign(cells_.size(), {});
  for (int i = 0; i < static_cast<int>(seams_.size()); ++i)
    top_seams_[seams_[i].src].push_back(i);
  for (int c = 0; c < n; ++c) {
    if (top_seams_[c].empty()) throw InternalError("cell top is not glued");
    QuadNum cursor;
    for (int i : top_seams_[c]) {
      if (!(seams_[i].x0 == cursor))
        throw InternalError("top-edge arcs do not tile the edge");
      cursor = seams_[i].x1;
    }
    if (!(cursor == cells_[c].width))
      throw InternalError("top-edge arcs do not tile the edge");
  }

  // Bottom circles must be tiled exactly by the image arcs.
  bottom_arcs_.assign(cells_.size(), {});
  for (int i = 0; i < static_cast<int>(seams_.size()); ++i)
    bottom_arcs_[seams_[i].dst].push_back({seams_[i].y0, i});
  for (int c = 0; c < n; ++c) {
    auto& arcs = bottom_arcs_[c];
    if (arcs.empty()) throw InternalError("cell bottom is not glued");
    std::sort(arcs.begin(), arcs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    QuadNum total;
    for (const auto& [start, idx] : arcs) total += seams_[idx].length();
    if (!(total == cells_[c].width))
      throw InternalError("bottom-circle arcs do not tile the circle");
    const int k = static_cast<int>(arcs.size());
    for (int j = 0; j < k; ++j) {
      QuadNum end =
          qmod(arcs[j].first + seams_[arcs[j].second].length(), cells_[c].width);
      if (!(end == arcs[(j + 1) % k].first))
        throw InternalError("bottom-circle arcs overlap or leave gaps");
    }
  }

  // A full-circle gluing on both sides would be an everywhere-smooth circle;
  // those cells should have been merged into one cylinder.
  for (const Seam& s : seams_) {
    if (top_seams_[s.src].size() == 1 && bottom_arcs_[s.dst].size() == 1 &&
        s.length() == cells_[s.src].width &&
        s.length() == cells_[s.dst].width)
      throw InternalError("smooth full-circle gluing: cells must be merged");
  }

  // Every seam-arc endpoint is an instance of the cone class.
  instances_.clear();
  std::vector<int> seam_top_instance(seams_.size(), -1);
  for (int c = 0; c < n; ++c)
    for (int i : top_seams_[c]) {
      seam_top_instance[i] = static_cast<int>(instances_.size());
      instances_.push_back({c, true, seams_[i].x0});
    }
  for (int c = 0; c < n; ++c)
    for (const auto& [start, idx] : bottom_arcs_[c])
      instances_.push_back({c, false, start});

  auto bottom_index = [&](int cell, const QuadNum& x) -> int {
    for (int i = 0; i < static_cast<int>(instances_.size()); ++i)
      if (!instances_[i].top && instances_[i].cell == cell &&
          instances_[i].x == x)
        return i;
    throw InternalError("seam endpoint is not a bottom partition point");
  };

  // Walk around each endpoint: a top instance meets, across its two adjacent
  // seams, the image endpoints on the target circles.
  std::vector<int> parent(instances_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](int u, int v) { parent[find(u)] = find(v); };
  for (int c = 0; c < n; ++c) {
    const auto& tops = top_seams_[c];
    const int k = static_cast<int>(tops.size());
    for (int j = 0; j < k; ++j) {
      const Seam& right = seams_[tops[j]];
      const Seam& left = seams_[tops[(j + k - 1) % k]];
      int ti = seam_top_instance[tops[j]];
      unite(ti, bottom_index(right.dst, right.y0));
      unite(ti, bottom_index(left.dst, qmod(left.y0 + left.length(),
                                            cells_[left.dst].width)));
    }
  }
  int root = find(0);
  for (int i = 0; i < static_cast<int>(instances_.size()); ++i)
    if (find(i) != root)
      throw InternalError("gluing produces more than one cone class");
  if (static_cast<int>(instances_.size()) != 4 * genus_ - 2)
    throw InternalError("cone angle does not match the minimal stratum");

  bool have = false;
  for (const Instance& inst : instances_) {
    SurfacePoint rep{inst.cell, inst.x,
                     inst.top ? cells_[inst.cell].height : QuadNum()};
    if (!have || lex_less(rep, cone_canonical_)) {
      cone_canonical_ = rep;
      have = true;
    }
  }
}

Surface Surface::build(const Prototype& p) {
  const long D = discriminant_of(p);
  check_not_excluded(p.genus, D);
  if (!is_valid(p)) throw DomainError("prototype is not valid");
  const QuadNum lam = lambda_of(p);
  const QuadNum w{Rational(p.w)};
  const QuadNum h{Rational(p.h)};
  const QuadNum t{Rational(p.t)};
  std::vector<Cell> cells;
  std::vector<Seam> seams;
  switch (p.genus) {
    case 2: {
      // One w x h cylinder (0) carrying a lambda x lambda square (1).
      cells = {{w, h}, {lam, lam}};
      seams = {{0, QuadNum(), lam, 1, QuadNum()},
               {0, lam, w, 0, qmod(lam + t, w)},
               {1, QuadNum(), lam, 0, t}};
      break;
    }
    case 3: {
      // Two w x h cylinders (0, 2) joined through one square (1).
      cells = {{w, h}, {lam, lam}, {w, h}};
      seams = {{0, QuadNum(), lam, 1, QuadNum()},
               {0, lam, w, 0, qmod(lam + t, w)},
               {1, QuadNum(), lam, 2, t},
               {2, QuadNum(), lam, 0, t},
               {2, lam, w, 2, qmod(lam + t, w)}};
      break;
    }
    case 4: {
      // Two w/2 x h/2 cylinders (0, 3) joined through two lambda/2 squares
      // (1, 2) side by side.
      const QuadNum W = w / QuadNum(2);
      const QuadNum H = h / QuadNum(2);
      const QuadNum L = lam / QuadNum(2);
      cells = {{W, H}, {L, L}, {L, L}, {W, H}};
      seams = {{0, QuadNum(), L, 1, QuadNum()},
               {0, L, lam, 2, QuadNum()},
               {0, lam, W, 0, qmod(lam + t, W)},
               {1, QuadNum(), L, 3, qmod(t, W)},
               {2, QuadNum(), L, 3, qmod(L + t, W)},
               {3, QuadNum(), lam, 0, qmod(t, W)},
               {3, lam, W, 3, qmod(lam + t, W)}};
      break;
    }
    default:
      throw DomainError("genus must be 2, 3, or 4");
  }
  return Surface(std::move(cells), std::move(seams), p.genus, D, p);
}

const Seam& Surface::seam_from_top(int cell, const QuadNum& x) const {
  const QuadNum xx = qmod(x, cells_[cell].width);
  const auto& tops = top_seams_[cell];
  int best = tops.front();
  for (int i : tops) {
    if ((seams_[i].x0 - xx).sign() <= 0)
      best = i;
    else
      break;
  }
  return seams_[best];
}

const Seam& Surface::seam_into_bottom(int cell, const QuadNum& x) const {
  const QuadNum xx = qmod(x, cells_[cell].width);
  const auto& arcs = bottom_arcs_[cell];
  if (xx < arcs.front().first) return seams_[arcs.back().second];  // wrap arc
  int best = arcs.front().second;
  for (const auto& [start, idx] : arcs) {
    if ((start - xx).sign() <= 0)
      best = idx;
    else
      break;
  }
  return seams_[best];
}

QuadNum Surface::seam_image(const Seam& s, const QuadNum& x) const {
  return qmod(x - s.x0 + s.y0, cells_[s.dst].width);
}

QuadNum Surface::seam_preimage(const Seam& s, const QuadNum& x) const {
  return s.x0 + qmod(x - s.y0, cells_[s.dst].width);
}

SurfacePoint Surface::normalized(SurfacePoint p) const {
  if (p.cell < 0 || p.cell >= static_cast<int>(cells_.size()))
    throw DomainError("point references a missing cell");
  const Cell& c = cells_[p.cell];
  p.x = qmod(p.x, c.width);
  if (p.y.sign() < 0 || (p.y - c.height).sign() > 0)
    throw DomainError("point lies outside its cell");
  if (p.y == c.height) {
    const Seam& s = seam_from_top(p.cell, p.x);
    return SurfacePoint{s.dst, seam_image(s, p.x), QuadNum()};
  }
  return p;
}

SurfacePoint Surface::canonical(const SurfacePoint& q) const {
  SurfacePoint p = normalized(q);
  if (p.y.sign() > 0) return p;  // interior points have a unique representative
  if (is_cone(p)) return cone_canonical_;
  const Seam& s = seam_into_bottom(p.cell, p.x);
  SurfacePoint top{s.src, seam_preimage(s, p.x), cells_[s.src].height};
  return lex_less(top, p) ? top : p;
}

bool Surface::same_point(const SurfacePoint& p, const SurfacePoint& q) const {
  return canonical(p) == canonical(q);
}

bool Surface::is_cone(const SurfacePoint& q) const {
  SurfacePoint p = normalized(q);
  if (!p.y.is_zero()) return false;
  for (const Instance& inst : instances_)
    if (!inst.top && inst.cell == p.cell && inst.x == p.x) return true;
  return false;
}

std::vector<SurfacePoint> Surface::sample_points(int count) const {
  const int n = static_cast<int>(cells_.size());
  int g = 2;
  while (n * g * g < count) ++g;
  std::vector<SurfacePoint> out;
  out.reserve(static_cast<size_t>(n) * g * g);
  for (int c = 0; c < n; ++c)
    for (int i = 1; i <= g; ++i)
      for (int j = 0; j < g; ++j)
        out.push_back({c, cells_[c].width * QuadNum(Rational(i, g + 1)),
                       cells_[c].height * QuadNum(Rational(j, g))});
  return out;
}

SurfacePoint apply_map(const Surface& source, const Surface& target,
                       const PointMap& m, const SurfacePoint& p0) {
  if (!m.pieces.empty()) {
    SurfacePoint p = source.normalized(p0);
    for (const AffinePiece& piece : m.pieces) {
      if (piece.src != p.cell) continue;
      QuadNum nx = piece.linear.a * p.x + piece.linear.b * p.y + piece.shift_x;
      QuadNum ny = piece.linear.c * p.x + piece.linear.d * p.y + piece.shift_y;
      return target.normalized({piece.dst, nx, ny});
    }
    throw DomainError("point map has no branch for the point's cell");
  }
  if (m.fn) return m.fn(p0);
  throw DomainError("point map is empty");
}

SurfacePoint apply_map(const Surface& s, const PointMap& m,
                       const SurfacePoint& p) {
  return apply_map(s, s, m, p);
}

PointMap prym_involution(const Surface& s) {
  if (!s.prototype())
    throw DomainError("Prym involution requires a built polygonal model");
  const Prototype p = *s.prototype();
  const QuadNum lam = lambda_of(p);
  const QuadNum t{Rational(p.t)};
  PointMap m;
  m.derivative = Mat2::scalar(QuadNum(-1));
  auto flip = [&](int src, int dst, const QuadNum& sx, const QuadNum& sy) {
    m.pieces.push_back({src, dst, m.derivative, sx, sy});
  };
  switch (p.genus) {
    case 2:
      flip(0, 0, lam + t, QuadNum(Rational(p.h)));
      flip(1, 1, QuadNum(), lam);
      break;
    case 3:
      flip(0, 2, lam + t, QuadNum(Rational(p.h)));
      flip(1, 1, QuadNum(), lam);
      flip(2, 0, lam + t, QuadNum(Rational(p.h)));
      break;
    case 4: {
      const QuadNum H{Rational(p.h, 2)};
      const QuadNum L = lam / QuadNum(2);
      flip(0, 3, lam + t, H);
      flip(1, 2, QuadNum(), L);
      flip(2, 1, QuadNum(), L);
      flip(3, 0, lam + t, H);
      break;
    }
    default:
      throw InternalError("unsupported genus");
  }
  return m;
}

namespace {

// One affine branch per source cell, looked up by cell id.
const AffinePiece& branch_for(const PointMap& m, int cell) {
  for (const AffinePiece& piece : m.pieces)
    if (piece.src == cell) return piece;
  throw DomainError("point map has no branch for a cell");
}

}  // namespace

FixedPoints fixed_points(const Surface& s, const PointMap& m) {
  if (m.pieces.empty())
    throw DomainError("fixed-point solve requires piecewise affine data");
  const Mat2 I = Mat2::identity();

  bool identity = true;
  for (const AffinePiece& piece : m.pieces) {
    if (piece.src != piece.dst || !(piece.linear == I) ||
        !piece.shift_y.is_zero() ||
        !qmod(piece.shift_x, s.cells()[piece.src].width).is_zero()) {
      identity = false;
      break;
    }
  }
  if (identity)
    throw DomainError("identity map: the fixed locus is the whole surface");

  FixedPoints out;
  auto try_add = [&](const SurfacePoint& cand) {
    SurfacePoint p = s.normalized(cand);
    if (!s.same_point(p, apply_map(s, m, p))) return;
    if (s.is_cone(p)) return;  // handled as the singular class below
    SurfacePoint c = s.canonical(p);
    for (const SurfacePoint& r : out.regular)
      if (r == c) return;
    out.regular.push_back(c);
  };

  for (const AffinePiece& piece : m.pieces) {
    const Cell& src = s.cells()[piece.src];
    const Cell& dst = s.cells()[piece.dst];
    if (!piece.linear.c.is_zero())
      throw DomainError("unsupported point map: does not keep circles level");
    if (!(src.width == dst.width) || !(src.height == dst.height))
      throw DomainError("point map branch does not map its cell onto a cell");

    // Interior solutions: linear * p + shift = p + (k * width, 0).
    if (piece.src == piece.dst) {
      Mat2 AmI{piece.linear.a - QuadNum(1), piece.linear.b, piece.linear.c,
               piece.linear.d - QuadNum(1)};
      QuadNum det = AmI.det();
      if (!det.is_zero()) {
        for (long k = -8; k <= 8; ++k) {
          QuadNum rx = QuadNum(k) * src.width - piece.shift_x;
          QuadNum ry = QuadNum() - piece.shift_y;
          QuadNum x = (AmI.d * rx - AmI.b * ry) / det;
          QuadNum y = (AmI.a * ry - AmI.c * rx) / det;
          if (x.sign() >= 0 && (x - src.width).sign() < 0 && y.sign() > 0 &&
              (y - src.height).sign() < 0)
            try_add({piece.src, x, y});
        }
      } else {
        // Degenerate linear part (and linear.c == 0): any fixed set is a
        // union of horizontal lines; if one crosses the open cell the locus
        // is not isolated.
        bool a1 = piece.linear.a == QuadNum(1);
        bool d1 = piece.linear.d == QuadNum(1);
        if (d1 && a1) {
          if (piece.shift_y.is_zero()) {
            if (piece.linear.b.is_zero()) {
              if (qmod(piece.shift_x, src.width).is_zero())
                throw DomainError("fixed locus is not isolated");
            } else {
              // y with b*y + shift_x = k * width, for k near the cell
              for (long k = -8; k <= 8; ++k) {
                QuadNum y = (QuadNum(k) * src.width - piece.shift_x) /
                            piece.linear.b;
                if (y.sign() > 0 && (y - src.height).sign() < 0)
                  throw DomainError("fixed locus is not isolated");
              }
            }
          }
        } else if (d1 && !a1) {
          if (piece.shift_y.is_zero())
            throw DomainError("fixed locus is not isolated");
        } else if (!d1) {
          // a == 1 here (det of AmI vanishes, linear.c == 0)
          QuadNum y = (QuadNum() - piece.shift_y) /
                      (piece.linear.d - QuadNum(1));
          if (y.sign() > 0 && (y - src.height).sign() < 0) {
            QuadNum drift = qmod(piece.linear.b * y + piece.shift_x, src.width);
            if (drift.is_zero())
              throw DomainError("fixed locus is not isolated");
          }
        }
      }
    }

    // Bottom-circle solutions for this branch: image of (u, 0) is
    // (a*u + shift_x, shift_y) in the target cell.
    const QuadNum W = src.width;
    const QuadNum a = piece.linear.a;
    if (!(a == QuadNum(1)) && !(a == QuadNum(-1)))
      throw DomainError("unsupported point map: circle maps must be isometric");
    if (piece.shift_y.is_zero()) {
      if (piece.dst == piece.src) {
        if (a == QuadNum(1)) {
          if (qmod(piece.shift_x, W).is_zero())
            throw DomainError("fixed locus is not isolated");
        } else {
          QuadNum z = qmod(piece.shift_x, W);
          try_add({piece.src, z / QuadNum(2), QuadNum()});
          try_add({piece.src, qmod(z / QuadNum(2) + W / QuadNum(2), W),
                   QuadNum()});
        }
      }
    } else if (piece.shift_y == dst.height) {
      for (int ti : s.top_seam_indices(piece.dst)) {
        const Seam& tau = s.seams()[ti];
        if (tau.dst != piece.src) continue;
        if (a == QuadNum(1)) {
          if (qmod(piece.shift_x - tau.x0 + tau.y0, W).is_zero())
            throw DomainError("fixed locus is not isolated");
        } else {
          QuadNum z = qmod(piece.shift_x - tau.x0 + tau.y0, W);
          try_add({piece.src, z / QuadNum(2), QuadNum()});
          try_add({piece.src, qmod(z / QuadNum(2) + W / QuadNum(2), W),
                   QuadNum()});
        }
      }
    } else {
      throw DomainError("point map branch does not preserve cell boundaries");
    }
  }

  SurfacePoint cone = s.normalized(s.cone_point());
  if (!s.same_point(cone, apply_map(s, m, cone)))
    throw DomainError("point map does not fix the cone class");
  out.singular.push_back(s.canonical(cone));

  std::sort(out.regular.begin(), out.regular.end(), lex_less);
  return out;
}

}  // namespace prym
