#pragma once

// Exact polynomial arithmetic over moment symbols G[a,b] / C[a,b], the
// centroid coordinates q and p, hbar, the energy E and a formal imaginary
// unit i (i^2 = -1). Coefficients are arbitrary-precision rationals.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moments/errors.hpp"

namespace moments {

using Rational = mpq_class;
using Integer = mpz_class;

enum class Kind : std::uint8_t { Quantum, Classical };

std::string_view to_string(Kind kind);
Kind parseKind(std::string_view text);

/// Index pair of a centered moment: `a` counts momentum factors, `b` position
/// factors. Ordered by total order, then by decreasing `a`, so that
/// G[2,0] < G[1,1] < G[0,2] < G[3,0] < ...
struct MomentKey {
  int a = 0;
  int b = 0;
  Kind kind = Kind::Quantum;

  constexpr int order() const { return a + b; }

  friend constexpr std::strong_ordering operator<=>(const MomentKey& x, const MomentKey& y) {
    if (auto c = x.order() <=> y.order(); c != 0) return c;
    if (auto c = y.a <=> x.a; c != 0) return c;
    return x.kind <=> y.kind;
  }
  friend constexpr bool operator==(const MomentKey&, const MomentKey&) = default;
};

std::string to_string(const MomentKey& key);

/// Dynamical generator of the moment algebra: a centroid coordinate or a moment.
struct Variable {
  enum class Tag : std::uint8_t { Q, P, Moment };
  Tag tag = Tag::Q;
  MomentKey key{};

  static Variable q() { return {Tag::Q, {}}; }
  static Variable p() { return {Tag::P, {}}; }
  static Variable moment(MomentKey k) { return {Tag::Moment, k}; }
  bool isMoment() const { return tag == Tag::Moment; }

  friend std::strong_ordering operator<=>(const Variable& x, const Variable& y) {
    if (auto c = x.tag <=> y.tag; c != 0) return c;
    if (x.tag != Tag::Moment) return std::strong_ordering::equal;
    return x.key <=> y.key;
  }
  friend bool operator==(const Variable& x, const Variable& y) { return (x <=> y) == 0; }
};

std::string to_string(const Variable& v);

/// Product of symbol powers. Moment factors are kept sorted; factors of order
/// zero are dropped and a factor of order one annihilates the monomial, which
/// MomentPoly enforces on insertion.
struct Monomial {
  int q = 0;
  int p = 0;
  int hbar = 0;
  int energy = 0;
  bool imaginary = false;
  std::vector<MomentKey> keys;

  int momentOrder() const;
  bool hasMoments() const { return !keys.empty(); }
  int power(const Variable& v) const;

  friend std::strong_ordering operator<=>(const Monomial& x, const Monomial& y);
  friend bool operator==(const Monomial& x, const Monomial& y) { return (x <=> y) == 0; }
};

class MomentPoly {
 public:
  using Terms = std::map<Monomial, Rational>;

  MomentPoly() = default;
  MomentPoly(const Rational& c);  // NOLINT(google-explicit-constructor)
  MomentPoly(long c) : MomentPoly(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  MomentPoly(int c) : MomentPoly(Rational(c)) {}  // NOLINT(google-explicit-constructor)

  static MomentPoly monomial(Monomial m, const Rational& c = 1);
  /// G[a,b] (or C[a,b]); order 0 gives 1, order 1 or a negative index gives 0.
  static MomentPoly moment(int a, int b, Kind kind = Kind::Quantum);
  static MomentPoly moment(MomentKey key) { return moment(key.a, key.b, key.kind); }
  static MomentPoly q(int power = 1);
  static MomentPoly p(int power = 1);
  static MomentPoly hbar(int power = 1);
  static MomentPoly energy(int power = 1);
  static MomentPoly imag();
  static MomentPoly variable(const Variable& v);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool isZero() const { return terms_.empty(); }
  bool isConstant() const;
  /// True when every term has even i-parity.
  bool isReal() const;
  bool hasHbar() const;
  bool hasMoments() const;
  int maxMomentOrder() const;
  Rational coefficient(const Monomial& m) const;

  void addTerm(Monomial m, const Rational& c);

  MomentPoly& operator+=(const MomentPoly& y);
  MomentPoly& operator-=(const MomentPoly& y);
  MomentPoly& operator*=(const MomentPoly& y);
  MomentPoly& operator*=(const Rational& c);
  MomentPoly operator-() const;

  friend MomentPoly operator+(MomentPoly x, const MomentPoly& y) { return x += y; }
  friend MomentPoly operator-(MomentPoly x, const MomentPoly& y) { return x -= y; }
  friend MomentPoly operator*(const MomentPoly& x, const MomentPoly& y);
  friend MomentPoly operator*(MomentPoly x, const Rational& c) { return x *= c; }
  friend MomentPoly operator*(const Rational& c, MomentPoly x) { return x *= c; }

  friend bool operator==(const MomentPoly& x, const MomentPoly& y) { return x.terms_ == y.terms_; }
  /// Total order used for deterministic containers (not a numeric comparison).
  friend bool operator<(const MomentPoly& x, const MomentPoly& y);

 private:
  Terms terms_;
};

MomentPoly pow(const MomentPoly& x, int n);

struct RealImagPair {
  MomentPoly re;
  MomentPoly im;  // coefficient of i, itself i-free
};

RealImagPair split(const MomentPoly& x);
MomentPoly join(const RealImagPair& z);
/// Complex conjugation: i -> -i.
MomentPoly conjugate(const MomentPoly& x);

MomentPoly derivative(const MomentPoly& x, const Variable& v);
/// Drops every term containing a moment of order greater than `order`.
MomentPoly truncate(const MomentPoly& x, int order);
/// Drops every term whose hbar power is positive (the hbar -> 0 limit).
MomentPoly classicalLimit(const MomentPoly& x);
/// Divides by hbar; every term must carry at least one power of hbar.
MomentPoly divideByHbar(const MomentPoly& x);
MomentPoly relabel(const MomentPoly& x, Kind kind);
/// Replaces moments by polynomials; returning nullopt keeps the factor.
MomentPoly mapMoments(const MomentPoly& x,
                      const std::function<std::optional<MomentPoly>(const MomentKey&)>& fn);
MomentPoly substitute(const MomentPoly& x, const Variable& v, const MomentPoly& value);
MomentPoly setHbar(const MomentPoly& x, const Rational& value);
MomentPoly setEnergy(const MomentPoly& x, const MomentPoly& value);
std::vector<Variable> variables(const MomentPoly& x);

template <typename Scalar>
struct Bindings {
  std::optional<Scalar> q;
  std::optional<Scalar> p;
  std::optional<Scalar> hbar;
  std::optional<Scalar> energy;
  std::map<MomentKey, Scalar> moments;
};

namespace detail {
template <typename Scalar>
Scalar ipow(Scalar base, int n) {
  Scalar r(1);
  while (n > 0) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}
template <typename Scalar>
Scalar fromRational(const Rational& c) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return c;
  } else {
    return static_cast<Scalar>(c.get_d());
  }
}
template <typename Scalar>
const Scalar& require(const std::optional<Scalar>& v, const char* name) {
  if (!v) throw MissingBindingError(std::string("no binding for ") + name);
  return *v;
}
}  // namespace detail

/// Numeric value by homomorphic substitution. Works for any field-like
/// scalar (double, Rational).
template <typename Scalar>
Scalar evaluate(const MomentPoly& x, const Bindings<Scalar>& env) {
  Scalar sum(0);
  for (const auto& [m, c] : x.terms()) {
    if (m.imaginary) throw NonRealError("polynomial has odd i-parity terms");
    Scalar t = detail::fromRational<Scalar>(c);
    if (m.q) t *= detail::ipow(detail::require(env.q, "q"), m.q);
    if (m.p) t *= detail::ipow(detail::require(env.p, "p"), m.p);
    if (m.hbar) t *= detail::ipow(detail::require(env.hbar, "hbar"), m.hbar);
    if (m.energy) t *= detail::ipow(detail::require(env.energy, "E"), m.energy);
    for (const auto& k : m.keys) {
      auto it = env.moments.find(k);
      if (it == env.moments.end()) throw MissingBindingError("no binding for " + to_string(k));
      t *= it->second;
    }
    sum += t;
  }
  return sum;
}

/// Evaluates with every moment replaced by `family(a,b)`. The family must
/// respect the centered-moment conventions: family(0,0) = 1 and family is 0
/// on order-one keys.
template <typename Scalar>
Scalar substituteMomentFamily(const MomentPoly& x, const std::function<Scalar(int, int)>& family,
                              Bindings<Scalar> env = {}) {
  if (family(0, 0) != Scalar(1)) throw InvalidFamilyError("family(0,0) must be 1");
  if (family(1, 0) != Scalar(0) || family(0, 1) != Scalar(0))
    throw InvalidFamilyError("family must vanish on order-one moments");
  env.moments.clear();
  for (const auto& [m, c] : x.terms())
    for (const auto& k : m.keys)
      if (!env.moments.count(k)) env.moments.emplace(k, family(k.a, k.b));
  return evaluate(x, env);
}

std::string to_string(const Rational& c);
std::string to_string(const Monomial& m);
/// Canonical text: `num/den` coefficients, `*`-joined factors, terms joined
/// by ` + ` / ` - `. parse(to_string(x)) == x.
std::string to_string(const MomentPoly& x);
MomentPoly parseMomentPoly(std::string_view text);
/// Exact rational from a decimal literal such as "0.25", "3", "-1.5e-2" or "7/4".
Rational parseRational(std::string_view text);

}  // namespace moments
