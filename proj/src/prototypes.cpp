#include "prym/prototypes.hpp"

#include <algorithm>
#include <numeric>

namespace prym {

namespace {

void check_genus(int genus) {
  if (genus < 2 || genus > 4) throw DomainError("genus must be 2, 3 or 4");
}

long isqrt_exact(long n) {
  // Integer square root for exact e-sweeps; -1 when n is not a square.
  if (n < 0) return -1;
  Integer z(n), r;
  mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
  long s = r.get_si();
  return s * s == n ? s : -1;
}

}  // namespace

long lambda_coupling(int genus) {
  check_genus(genus);
  return genus == 3 ? 2 : 1;
}

long discriminant_of(int genus, long w, long h, long e) {
  return e * e + 4 * lambda_coupling(genus) * w * h;
}

long discriminant_of(const Prototype& p) {
  return discriminant_of(p.genus, p.w, p.h, p.e);
}

QuadNum lambda_of(const Prototype& p) {
  const long D = discriminant_of(p);
  return QuadNum(Rational(p.e, 2), Rational(1, 2), D);
}

bool is_valid(const Prototype& p) {
  check_genus(p.genus);
  if (p.w < 1 || p.h < 1 || p.t < 0) return false;
  if (p.t >= std::gcd(p.w, p.h)) return false;
  // gcd(w, h, t, e) = 1, with gcd(x, 0) = x.
  if (std::gcd(std::gcd(p.w, p.h), std::gcd(p.t, std::abs(p.e))) != 1) return false;
  const long D = discriminant_of(p);
  if (D <= 0 || is_perfect_square(D)) return false;
  // Embeddability: lambda < w (genus 2, 3) or lambda < w/2 (genus 4).
  const QuadNum lam = lambda_of(p);
  const QuadNum bound = p.genus == 4 ? QuadNum(Rational(p.w, 2)) : QuadNum(Rational(p.w));
  return (bound - lam).sign() > 0;
}

void check_not_excluded(int genus, long D) {
  if ((genus == 3 && D == 8) || (genus == 4 && D == 5)) {
    throw ExcludedDiscriminantError("discriminant " + std::to_string(D) +
                                    " is excluded from the genus-" + std::to_string(genus) +
                                    " prototype normal forms");
  }
}

std::vector<Prototype> representatives_g2(long D) {
  if (D <= 4 || is_perfect_square(D) || (D % 4 != 0 && D % 4 != 1)) {
    throw DomainError("inadmissible genus-2 discriminant " + std::to_string(D));
  }
  std::vector<Prototype> out;
  if (D % 4 == 0) {
    out.push_back({2, (D - 4) / 4, 1, 0, -2});
  } else if (D % 8 == 5) {
    out.push_back({2, (D - 1) / 4, 1, 0, -1});
  } else {  // D = 1 (mod 8)
    out.push_back({2, (D - 1) / 4, 1, 0, -1});
    out.push_back({2, (D - 9) / 4, 1, 0, -3});
  }
  return out;
}

std::vector<Prototype> enumerate_for_discriminant(int genus, long D) {
  check_genus(genus);
  if (D <= 0 || is_perfect_square(D)) throw DomainError("discriminant must be positive nonsquare");
  const long c = 4 * lambda_coupling(genus);
  std::vector<Prototype> out;
  for (long h = 1; c * h <= D; ++h) {
    for (long w = 1; c * w * h <= D; ++w) {
      const long e2 = D - c * w * h;
      const long r = isqrt_exact(e2);
      if (r < 0) continue;
      for (long e : r == 0 ? std::vector<long>{0} : std::vector<long>{-r, r}) {
        for (long t = 0; t < std::gcd(w, h); ++t) {
          Prototype p{genus, w, h, t, e};
          if (is_valid(p)) out.push_back(p);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_admissible(const Prototype& p, long k) {
  if (k == kInfinity) return true;
  if (k < 1) return false;
  const long D = discriminant_of(p);
  const long s = p.genus == 2 ? p.e + 2 * k : p.e + 4 * k;
  return s * s < D;
}

GoodnessReport is_good(const Prototype& p) {
  GoodnessReport rep;
  const long D = discriminant_of(p);
  // All finite admissible indices: (e + ck)^2 < D caps k at (sqrt(D) - e)/c.
  const long c = p.genus == 2 ? 2 : 4;
  for (long k = 1;; ++k) {
    const long s = p.e + c * k;
    if (s * s < D) rep.admissible_ks.push_back(k);
    if (s >= 0 && s * s >= D) break;
  }
  if (p.genus == 2 || p.h != 1 || p.t != 0) return rep;
  if (p.genus == 3) {
    if (p.w % 2 == 1 && is_admissible(p, 2)) rep.q = 2;
    else if (p.w % 4 == 2 && is_admissible(p, 4)) rep.q = 4;
    else if (p.w % 8 == 4 && is_admissible(p, 8)) rep.q = 8;
  } else {
    if (p.w % 2 == 1 && is_admissible(p, 2)) rep.q = 2;
    else if (p.w % 4 == 2 && is_admissible(p, 4)) rep.q = 4;
  }
  return rep;
}

Prototype butterfly_params(const Prototype& p, long q) {
  if (!is_admissible(p, q)) throw DomainError("inadmissible butterfly index");
  if (q == kInfinity) return binfty_params(p);
  const long D = discriminant_of(p);
  const long eq = -p.e - 4 * q;
  if (eq * eq >= D) {
    throw DomainError("no butterfly target: (e + 4q)^2 >= D, the move direction is not parabolic of model type");
  }
  // In genus 2 the move runs along slope 2q/w, so the circumference count is
  // gcd(2q, w); for genus 3 and 4 the slope is q/w.
  const long hq = p.genus == 2 ? std::gcd(2 * q, p.w) : std::gcd(q, p.w);
  const long den = 4 * lambda_coupling(p.genus) * hq;
  if ((D - eq * eq) % den != 0) throw InternalError("butterfly target width is not integral");
  const long wq = (D - eq * eq) / den;
  // The target is tilted by one unit exactly when w_q, h_q, e_q share a
  // factor (measured; coprimality of the full tuple forces t_q = 1 there).
  long tq = std::gcd(std::gcd(wq, hq), std::abs(eq)) != 1 ? 1 : 0;
  Prototype out{p.genus, wq, hq, tq, eq};
  if (discriminant_of(out) != D) throw InternalError("butterfly changed the discriminant");
  if (!is_valid(out)) {
    throw DomainError("butterfly target leaves the prototype family");
  }
  return out;
}

Prototype binfty_params(const Prototype& p) {
  const long D = discriminant_of(p);
  // Measured from the renormalized vertical direction: the trace parameter
  // reflects as -e - 2h (genus 2) or -e - 4h (genus 3, 4) and the
  // circumference count h is preserved.
  const long einf = p.genus == 2 ? -p.e - 2 * p.h : -p.e - 4 * p.h;
  const long den = 4 * lambda_coupling(p.genus) * p.h;
  if (einf * einf >= D) throw DomainError("vertical move target leaves the prototype family");
  if ((D - einf * einf) % den != 0) throw InternalError("vertical move target width is not integral");
  const long winf = (D - einf * einf) / den;
  long tinf = std::gcd(std::gcd(winf, p.h), std::abs(einf)) != 1 ? 1 : 0;
  Prototype out{p.genus, winf, p.h, tinf, einf};
  if (discriminant_of(out) != D) throw InternalError("vertical move changed the discriminant");
  if (!is_valid(out)) throw DomainError("vertical move left the prototype family");
  return out;
}

bool verify_no_tilt(const Prototype& p, long q) {
  const Prototype b = butterfly_params(p, q);
  // t_q < gcd(w_q, h_q), so coprime width/height forces zero tilt.
  return std::gcd(b.w, b.h) == 1;
}

bool discriminant_admissible(int genus, long D) {
  check_genus(genus);
  if (D <= 0 || is_perfect_square(D)) return false;
  if (genus == 3) return D >= 8 && (D % 8 == 0 || D % 8 == 1 || D % 8 == 4);
  if (genus == 4) return D >= 5 && (D % 4 == 0 || D % 4 == 1);
  return D > 4 && (D % 4 == 0 || D % 4 == 1);
}

long goodness_threshold(int genus) { return genus == 3 ? 17 : 5; }

std::vector<DiscriminantReport> search_good(int genus, long d_min, long d_max) {
  if (genus != 3 && genus != 4) throw DomainError("good-prototype search is defined for genus 3 and 4");
  std::vector<DiscriminantReport> out;
  for (long D = std::max(d_min, genus == 3 ? 8L : 5L); D <= d_max; ++D) {
    if (!discriminant_admissible(genus, D)) continue;
    DiscriminantReport rep;
    rep.D = D;
    rep.below_threshold = D < goodness_threshold(genus);
    for (const Prototype& p : enumerate_for_discriminant(genus, D)) {
      if (p.h != 1 || p.t != 0) continue;
      const GoodnessReport g = is_good(p);
      if (g.q) rep.good.push_back({p.w, p.e, *g.q});
    }
    out.push_back(std::move(rep));
  }
  return out;
}

TableRow table_row(int genus, long D) {
  if (!discriminant_admissible(genus, D)) throw DomainError("discriminant not admissible");
  std::optional<TableRow> row;
  auto pick = [&](long e, long q, long den) {
    if (row) throw InternalError("table rows overlap at D = " + std::to_string(D));
    if ((D - e * e) % den != 0) throw InternalError("table row width not integral");
    row = TableRow{e, (D - e * e) / den, q};
  };
  if (genus == 3) {
    if (D <= 900) throw DomainError("genus-3 table covers D > 900");
    if (D % 16 == 1) pick(-3, 2, 8);
    if (D % 16 == 8) pick(0, 2, 8);
    if (D % 16 == 9) pick(-1, 2, 8);
    if (D % 16 == 12) pick(-2, 2, 8);
    if (D % 32 == 0) pick(-4, 4, 8);
    if (D % 32 == 16) pick(0, 4, 8);
    if (D % 32 == 20) pick(-2, 4, 8);
    if (D % 64 == 4) pick(-6, 8, 8);
    if (D % 64 == 36) pick(-2, 8, 8);
  } else if (genus == 4) {
    if (D <= 225) throw DomainError("genus-4 table covers D > 225");
    if (D % 8 == 0) pick(-2, 2, 4);
    if (D % 8 == 4) pick(0, 2, 4);
    if (D % 8 == 5) pick(-1, 2, 4);
    if (D % 16 == 1) pick(-3, 4, 4);
    if (D % 16 == 9) pick(-1, 4, 4);
  } else {
    throw DomainError("tables are defined for genus 3 and 4");
  }
  if (!row) throw DomainError("discriminant matches no table row");
  return *row;
}

const std::vector<long>& bad_set(int genus) {
  static const std::vector<long> p_bad = {17, 20, 24,  28,  32,  33,  40,  41,  48,  52,  56,  68,
                                          80, 84, 96, 112, 128, 132, 164, 228, 260, 292, 388, 452};
  static const std::vector<long> s4_bad = {5, 8, 12, 13, 17, 21, 24, 32, 33, 41, 57, 65, 73, 97, 113};
  if (genus == 3) return p_bad;
  if (genus == 4) return s4_bad;
  throw DomainError("bad sets are defined for genus 3 and 4");
}

}  // namespace prym
