#pragma once

// Exact rational scalar used by every instance, solver and file format.

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blsingle {

using BigInt = mpz_class;

/// Reduced fraction num/den with den >= 1; zero is 0/1.
class Rational {
 public:
  Rational() = default;
  Rational(long v) : q_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(int v) : q_(static_cast<long>(v)) {}  // NOLINT
  explicit Rational(const BigInt& v) : q_(v) {}
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    q_.get_num() = num;
    q_.get_den() = den;
    q_.canonicalize();
  }
  explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  /// Parses "p/q" or "p". With `strict`, the text must already be canonical
  /// (reduced, positive denominator, no leading '+' or zeros).
  static Rational parse(std::string_view text, bool strict = true);

  const BigInt& num() const { return q_.get_num(); }
  const BigInt& den() const { return q_.get_den(); }
  const mpq_class& raw() const { return q_; }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  bool is_integer() const { return q_.get_den() == 1; }

  std::string str() const {
    if (q_.get_den() == 1) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }
  /// Fixed-point decimal rendering for display only.
  std::string decimal(int digits = 12) const;

  Rational operator-() const { return Rational(mpq_class(-q_)); }
  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("Rational: division by zero");
    q_ /= o.q_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  mpq_class q_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Number of bits of |x|, i.e. ceil(log2(|x| + 1)); zero for x = 0.
inline std::size_t bit_length(const BigInt& x) {
  if (sgn(x) == 0) return 0;
  return mpz_sizeinbase(x.get_mpz_t(), 2);
}

inline BigInt pow2(std::size_t k) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
  return r;
}

inline BigInt pow_ui(unsigned long base, std::size_t k) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, k);
  return r;
}

/// Encoding length 1 + ceil(log2(|p|+1)) + ceil(log2(q+1)).
inline std::size_t size(const Rational& r) {
  return 1 + bit_length(r.num()) + bit_length(r.den());
}

inline std::size_t size(std::span<const Rational> v) {
  std::size_t total = 0;
  for (const auto& x : v) total += size(x);
  return total;
}

inline BigInt floor(const Rational& r) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return q;
}

/// Continued-fraction rounding: the unique p/q with 1 <= q <= bound and
/// |alpha - p/q| < 1/(2 bound^2), or nothing when no such fraction exists.
///
/// Any such p/q satisfies |alpha - p/q| < 1/(2q^2), so it is a convergent of
/// alpha (Legendre); two distinct fractions with denominators <= bound are at
/// least 1/bound^2 apart, so at most one convergent can qualify.
inline std::optional<Rational> cf_round(const Rational& alpha, const BigInt& bound) {
  if (bound < 1) throw std::invalid_argument("cf_round: bound must be >= 1");
  const Rational tol(BigInt(1), BigInt(2 * bound * bound));

  // Convergents h_k/k_k via the standard recurrence.
  BigInt h_prev = 1, k_prev = 0;   // h_{-1}, k_{-1}
  BigInt h_prev2 = 0, k_prev2 = 1; // h_{-2}, k_{-2}
  BigInt num = alpha.num();
  BigInt den = alpha.den();
  std::optional<Rational> found;
  while (true) {
    BigInt a;
    mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    BigInt h = a * h_prev + h_prev2;
    BigInt k = a * k_prev + k_prev2;
    if (k > bound) break;
    Rational conv(h, k);
    if (abs(alpha - conv) < tol) found = conv;
    BigInt rem = num - a * den;
    if (rem == 0) break;
    num = den;
    den = rem;
    h_prev2 = h_prev; k_prev2 = k_prev;
    h_prev = h; k_prev = k;
  }
  return found;
}

inline Rational Rational::parse(std::string_view text, bool strict) {
  auto fail = [&](const char* why) {
    throw std::invalid_argument(std::string("invalid rational '") + std::string(text) + "': " + why);
  };
  auto valid_int = [&](std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (s[0] == '-' || (!strict && s[0] == '+')) {
      if (!allow_sign) return false;
      i = 1;
    }
    if (i == s.size()) return false;
    for (std::size_t j = i; j < s.size(); ++j)
      if (s[j] < '0' || s[j] > '9') return false;
    if (strict && s.size() - i > 1 && s[i] == '0') return false;
    return true;
  };
  auto slash = text.find('/');
  std::string_view ns = text.substr(0, slash);
  if (!valid_int(ns, true)) fail("bad numerator");
  BigInt num(std::string(ns[0] == '+' ? ns.substr(1) : ns), 10);
  BigInt den = 1;
  if (slash != std::string_view::npos) {
    std::string_view ds = text.substr(slash + 1);
    if (!valid_int(ds, false)) fail("bad denominator");
    den = BigInt(std::string(ds), 10);
    if (den == 0) fail("zero denominator");
    if (strict && den == 1) fail("non-canonical (denominator 1 must be omitted)");
  }
  if (strict && ns == "-0") fail("non-canonical zero");
  Rational r(num, den);
  if (strict && (r.num() != num || r.den() != den)) fail("non-canonical (not reduced)");
  return r;
}

inline std::string Rational::decimal(int digits) const {
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  BigInt scaled_num = abs(num()) * scale;
  BigInt rounded;
  // round half away from zero
  mpz_fdiv_q(rounded.get_mpz_t(), BigInt(2 * scaled_num + den()).get_mpz_t(),
             BigInt(2 * den()).get_mpz_t());
  std::string digits_str = rounded.get_str();
  if (static_cast<int>(digits_str.size()) <= digits)
    digits_str.insert(0, static_cast<std::size_t>(digits + 1) - digits_str.size(), '0');
  std::string out = sign() < 0 && rounded != 0 ? "-" : "";
  out += digits_str.substr(0, digits_str.size() - static_cast<std::size_t>(digits));
  if (digits > 0) out += "." + digits_str.substr(digits_str.size() - static_cast<std::size_t>(digits));
  return out;
}

using RationalVec = std::vector<Rational>;
using RationalMat = std::vector<RationalVec>;

inline Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  Rational s;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].is_zero() && !b[i].is_zero()) s += a[i] * b[i];
  return s;
}

}  // namespace blsingle
