#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prym {

using Integer = mpz_class;
using Rational = mpq_class;

// Error taxonomy. Every failure mode callers are expected to handle gets its
// own type so the CLI can map them onto distinct exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Invalid input data (malformed prototype, parallel directions, ...).
struct DomainError : Error {
  using Error::Error;
};
// Discriminants whose loci are excluded from the prototype normal forms.
struct ExcludedDiscriminantError : Error {
  using Error::Error;
};
// A separatrix tracer ran past its step budget.
struct BudgetError : Error {
  using Error::Error;
};
// Hypotheses of a classification lemma failed for the given cylinder.
struct HypothesisError : Error {
  using Error::Error;
};
// An internal structural invariant was violated; indicates a bug.
struct InternalError : Error {
  using Error::Error;
};

bool is_perfect_square(long n);

int sign_of(const Rational& r);
Integer floor_of(const Rational& r);
std::string to_string(const Rational& r);

// Element a + b*sqrt(D) of the real quadratic field Q(sqrt(D)).  D is a
// positive nonsquare integer carried per value; purely rational values store
// D = 0 and combine with any field.  Mixing two distinct nonzero D's throws.
class QuadNum {
 public:
  QuadNum() : a_(0), b_(0), d_(0) {}
  QuadNum(const Rational& a) : a_(a), b_(0), d_(0) { a_.canonicalize(); }
  QuadNum(long a) : a_(a), b_(0), d_(0) {}
  QuadNum(const Rational& a, const Rational& b, long d);

  static QuadNum sqrt_of(long d) { return QuadNum(0, 1, d); }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  long d() const { return d_; }

  bool is_zero() const { return a_ == 0 && b_ == 0; }
  bool is_rational() const { return b_ == 0; }
  bool is_integer() const;

  QuadNum conj() const;
  QuadNum inverse() const;
  // Rational part and coefficient extraction keep exactness; irr() is b.
  const Rational& irr() const { return b_; }

  int sign() const;
  Integer floor() const;
  double approx() const;

  QuadNum operator-() const;
  QuadNum& operator+=(const QuadNum& o);
  QuadNum& operator-=(const QuadNum& o);
  QuadNum& operator*=(const QuadNum& o);
  QuadNum& operator/=(const QuadNum& o);

  friend QuadNum operator+(QuadNum x, const QuadNum& y) { return x += y; }
  friend QuadNum operator-(QuadNum x, const QuadNum& y) { return x -= y; }
  friend QuadNum operator*(QuadNum x, const QuadNum& y) { return x *= y; }
  friend QuadNum operator/(QuadNum x, const QuadNum& y) { return x /= y; }

  friend bool operator==(const QuadNum& x, const QuadNum& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }
  friend bool operator!=(const QuadNum& x, const QuadNum& y) { return !(x == y); }
  friend bool operator<(const QuadNum& x, const QuadNum& y) { return (y - x).sign() > 0; }
  friend bool operator>(const QuadNum& x, const QuadNum& y) { return y < x; }
  friend bool operator<=(const QuadNum& x, const QuadNum& y) { return !(y < x); }
  friend bool operator>=(const QuadNum& x, const QuadNum& y) { return !(x < y); }

  std::string str() const;

 private:
  static long merge_d(const QuadNum& x, const QuadNum& y);
  void normalize();

  Rational a_, b_;
  long d_;
};

QuadNum floor_qn(const QuadNum& x);

}  // namespace prym
