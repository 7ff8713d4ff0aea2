#include "prym/qfield.hpp"

#include <cmath>
#include <utility>

namespace prym {

bool is_perfect_square(long n) {
  if (n < 0) return false;
  Integer z(n);
  return mpz_perfect_square_p(z.get_mpz_t()) != 0;
}

int sign_of(const Rational& r) { return sgn(r); }

Integer floor_of(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

std::string to_string(const Rational& r) { return r.get_str(); }

namespace {

// d = s^2 * d0 with d0 squarefree; returns {s, d0}.
std::pair<long, long> squarefree_split(long d) {
  long s = 1, d0 = d;
  for (long p = 2; p * p <= d0; ++p) {
    while (d0 % (p * p) == 0) {
      d0 /= p * p;
      s *= p;
    }
  }
  return {s, d0};
}

}  // namespace

QuadNum::QuadNum(const Rational& a, const Rational& b, long d) : a_(a), b_(b), d_(d) {
  a_.canonicalize();
  b_.canonicalize();
  if (b_ != 0) {
    if (d_ <= 0) throw DomainError("field discriminant must be positive");
    // Canonicalize to the squarefree kernel so equal values compare equal
    // across representations (e.g. sqrt(44) = 2*sqrt(11)).
    auto [s, d0] = squarefree_split(d_);
    if (d0 == 1) {
      a_ += b_ * Rational(s);
      b_ = 0;
    } else {
      b_ *= Rational(s);
      d_ = d0;
    }
  }
  normalize();
}

void QuadNum::normalize() {
  if (b_ == 0) d_ = 0;
}

long QuadNum::merge_d(const QuadNum& x, const QuadNum& y) {
  if (x.d_ == 0) return y.d_;
  if (y.d_ == 0 || x.d_ == y.d_) return x.d_;
  throw DomainError("mixing elements of distinct quadratic fields");
}

bool QuadNum::is_integer() const { return b_ == 0 && a_.get_den() == 1; }

QuadNum QuadNum::conj() const {
  QuadNum r(*this);
  r.b_ = -r.b_;
  return r;
}

QuadNum QuadNum::inverse() const {
  if (is_zero()) throw DomainError("division by zero");
  // 1/(a+b*sqrt(D)) = (a-b*sqrt(D)) / (a^2 - b^2 D); the norm is nonzero for
  // nonzero elements because D is nonsquare.
  Rational n = a_ * a_ - b_ * b_ * Rational(d_);
  QuadNum r(*this);
  r.a_ /= n;
  r.b_ = -r.b_ / n;
  r.normalize();
  return r;
}

int QuadNum::sign() const {
  const int sa = sgn(a_), sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare a^2 with b^2 D; the larger magnitude wins.
  const int t = sgn(a_ * a_ - b_ * b_ * Rational(d_));
  return t == 0 ? 0 : (t > 0 ? sa : sb);
}

double QuadNum::approx() const {
  return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(d_));
}

Integer QuadNum::floor() const {
  if (b_ == 0) return floor_of(a_);
  Integer n(static_cast<long>(std::floor(approx())));
  // The double estimate is within a couple of units; correct it exactly.
  while ((*this - QuadNum(Rational(n + 1))).sign() >= 0) ++n;
  while ((*this - QuadNum(Rational(n))).sign() < 0) --n;
  return n;
}

QuadNum QuadNum::operator-() const {
  QuadNum r(*this);
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

QuadNum& QuadNum::operator+=(const QuadNum& o) {
  d_ = merge_d(*this, o);
  a_ += o.a_;
  b_ += o.b_;
  normalize();
  return *this;
}

QuadNum& QuadNum::operator-=(const QuadNum& o) {
  d_ = merge_d(*this, o);
  a_ -= o.a_;
  b_ -= o.b_;
  normalize();
  return *this;
}

QuadNum& QuadNum::operator*=(const QuadNum& o) {
  const long d = merge_d(*this, o);
  const Rational a = a_ * o.a_ + b_ * o.b_ * Rational(d);
  const Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = a;
  b_ = b;
  d_ = d;
  normalize();
  return *this;
}

QuadNum& QuadNum::operator/=(const QuadNum& o) { return *this *= o.inverse(); }

std::string QuadNum::str() const {
  if (b_ == 0) return to_string(a_);
  return to_string(a_) + "+" + to_string(b_) + "*sqrt(" + std::to_string(d_) + ")";
}

QuadNum floor_qn(const QuadNum& x) { return QuadNum(Rational(x.floor())); }

}  // namespace prym
