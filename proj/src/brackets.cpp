#include "moments/brackets.hpp"

#include <algorithm>
#include <mutex>
#include <shared_mutex>

#include "moments/opalgebra.hpp"

namespace moments {

namespace {

Integer binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

Integer factorial(int n) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

void requireSameKind(const MomentKey& x, const MomentKey& y) {
  if (x.kind != y.kind) throw KindMismatchError("bracket between " + to_string(x) + " and " + to_string(y));
}

}  // namespace

Rational kCoefficient(int a, int b, int c, int d, int n) {
  if (a < 0 || b < 0 || c < 0 || d < 0 || n < 0) throw std::invalid_argument("kCoefficient: negative index");
  Integer sum = 0;
  for (int m = 0; m <= n; ++m) {
    Integer t = factorial(m) * factorial(n - m) * binomial(a, m) * binomial(b, n - m) * binomial(c, n - m) *
                binomial(d, m);
    if (m % 2) sum -= t;
    else sum += t;
  }
  return Rational(sum);
}

MomentPoly quantumBracket(const MomentKey& x, const MomentKey& y) {
  if (x.kind != Kind::Quantum || y.kind != Kind::Quantum)
    throw KindMismatchError("quantumBracket needs quantum moments");
  const auto [a, b, kx] = x;
  const auto [c, d, ky] = y;
  auto G = [](int i, int j) { return MomentPoly::moment(i, j, Kind::Quantum); };
  MomentPoly r = Rational(a * d) * G(a - 1, b) * G(c, d - 1) - Rational(b * c) * G(a, b - 1) * G(c - 1, d);
  const int M = std::min({a + c, b + d, a + b, c + d});
  const MomentPoly quarterHbar2 = Rational(1, 4) * MomentPoly::hbar(2);
  MomentPoly weight = 1;
  // M >= 1 guards the floor: (M - 1) / 2 truncates toward zero in C++.
  for (int m = 0; M >= 1 && m <= (M - 1) / 2; ++m) {
    Rational k = kCoefficient(a, b, c, d, 2 * m + 1);
    if (m % 2) k = -k;
    if (k != 0) r += k * weight * G(a + c - 2 * m - 1, b + d - 2 * m - 1);
    weight *= quarterHbar2;
  }
  return r;
}

MomentPoly classicalBracket(const MomentKey& x, const MomentKey& y) {
  if (x.kind != Kind::Classical || y.kind != Kind::Classical)
    throw KindMismatchError("classicalBracket needs classical moments");
  const auto [a, b, kx] = x;
  const auto [c, d, ky] = y;
  auto C = [](int i, int j) { return MomentPoly::moment(i, j, Kind::Classical); };
  return Rational(a * d) * C(a - 1, b) * C(c, d - 1) - Rational(b * c) * C(a, b - 1) * C(c - 1, d) +
         Rational(b * c - a * d) * C(a + c - 1, b + d - 1);
}

MomentPoly bracket(const MomentKey& x, const MomentKey& y) {
  requireSameKind(x, y);
  return x.kind == Kind::Quantum ? quantumBracket(x, y) : classicalBracket(x, y);
}

MomentPoly centroidBracket(const Variable& x, const Variable& y) {
  using T = Variable::Tag;
  if (x.tag == T::Moment && y.tag == T::Moment) return bracket(x.key, y.key);
  if (x.tag == T::Q && y.tag == T::P) return 1;
  if (x.tag == T::P && y.tag == T::Q) return -1;
  return 0;
}

namespace {

class BracketMemo {
 public:
  MomentPoly get(const MomentKey& x, const MomentKey& y) {
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find({x, y});
      if (it != table_.end()) return it->second;
    }
    MomentPoly r = bracket(x, y);
    std::unique_lock lock(mutex_);
    return table_.try_emplace({x, y}, std::move(r)).first->second;
  }

 private:
  std::shared_mutex mutex_;
  std::map<std::pair<MomentKey, MomentKey>, MomentPoly> table_;
};

BracketMemo& memo() {
  static BracketMemo m;
  return m;
}

}  // namespace

MomentPoly poissonBracket(const MomentPoly& f, const MomentPoly& g) {
  const auto vf = variables(f);
  const auto vg = variables(g);
  std::vector<MomentPoly> dg;
  dg.reserve(vg.size());
  for (const auto& v : vg) dg.push_back(derivative(g, v));
  MomentPoly r;
  for (const auto& u : vf) {
    MomentPoly du;
    bool haveDu = false;
    for (std::size_t j = 0; j < vg.size(); ++j) {
      const auto& v = vg[j];
      MomentPoly uv = (u.isMoment() && v.isMoment()) ? memo().get(u.key, v.key) : centroidBracket(u, v);
      if (uv.isZero()) continue;
      if (!haveDu) {
        du = derivative(f, u);
        haveDu = true;
      }
      r += du * dg[j] * uv;
    }
  }
  return r;
}

namespace {

// (-i/hbar) <[x, y]>
MomentPoly commutatorExpectation(const OperatorSum& x, const OperatorSum& y) {
  MomentPoly e = toMoments(commutator(x, y));
  return divideByHbar(-(MomentPoly::imag() * e));
}

}  // namespace

MomentPoly commutatorBracket(const MomentKey& x, const MomentKey& y) {
  if (x.kind != Kind::Quantum || y.kind != Kind::Quantum)
    throw KindMismatchError("commutatorBracket needs quantum moments");
  const OperatorSum W1 = weylMoment(x.a, x.b);
  const OperatorSum W2 = weylMoment(y.a, y.b);
  const OperatorSum P(OperatorWord("P"));
  const OperatorSum Q(OperatorWord("Q"));

  // Moments at fixed centroid, and their shifts under the centroid:
  // d/dp <W(Q,P)> = -<dW/dP> = -(-i/hbar)<[Q,W]>, d/dq <W> = (-i/hbar)<[P,W]>.
  const MomentPoly dp1 = -commutatorExpectation(Q, W1);
  const MomentPoly dq1 = commutatorExpectation(P, W1);
  const MomentPoly dp2 = -commutatorExpectation(Q, W2);
  const MomentPoly dq2 = commutatorExpectation(P, W2);
  const MomentPoly p1 = commutatorExpectation(W1, P);
  const MomentPoly q1 = commutatorExpectation(W1, Q);
  const MomentPoly p2 = commutatorExpectation(W2, P);
  const MomentPoly q2 = commutatorExpectation(W2, Q);

  return commutatorExpectation(W1, W2) - dp1 * p2 - dq1 * q2 + p1 * dp2 + q1 * dq2 - dp1 * dq2 + dq1 * dp2;
}

}  // namespace moments
