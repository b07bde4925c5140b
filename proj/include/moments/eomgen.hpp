#pragma once

// Effective Hamiltonians and truncated equations of motion for polynomial
// Hamiltonians H(q,p).

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moments/symcore.hpp"

namespace moments {

/// Polynomial H = sum c * p^a * q^b keyed by (a, b) = (p-power, q-power).
struct HamiltonianSpec {
  std::map<std::pair<int, int>, Rational> terms;

  void add(int pPow, int qPow, const Rational& c);
  /// d^{dp+dq} H / dp^dp dq^dq.
  HamiltonianSpec derivative(int dp, int dq) const;
  /// H as a polynomial in the centroid symbols q, p.
  MomentPoly toPoly() const;
  int degree() const;
  bool isZero() const { return terms.empty(); }
  bool isHarmonic() const { return degree() <= 2; }
  Rational coefficient(int pPow, int qPow) const;

  template <typename Scalar>
  Scalar value(const Scalar& q, const Scalar& p) const {
    Scalar s(0);
    for (const auto& [k, c] : terms)
      s += detail::fromRational<Scalar>(c) * detail::ipow(p, k.first) * detail::ipow(q, k.second);
    return s;
  }

  friend bool operator==(const HamiltonianSpec&, const HamiltonianSpec&) = default;
};

/// Grammar: term (('+'|'-') term)*, term = [coeff ['*']] ['p' ['^' int]] ['*'] ['q' ['^' int]].
/// coeff is a decimal or num/den. Multi-line input is summed line by line; '#' starts a comment.
HamiltonianSpec parseHamiltonian(std::string_view text);
std::string to_string(const HamiltonianSpec& h);

/// H(q,p) + sum_{2 <= a+b <= maxOrder} H_{p^a q^b} / (a! b!) * G[a,b].
MomentPoly effectiveHamiltonian(const HamiltonianSpec& h, Kind kind, int maxOrder);

enum class Route : int { TruncateFirst = 1, Full = 2 };
Route parseRoute(std::string_view text);

/// Moments with 2 <= a+b <= order, in MomentKey order.
std::vector<MomentKey> momentsUpTo(int order, Kind kind);

struct EomSystem {
  Kind kind = Kind::Quantum;
  int order = 2;
  Route route = Route::TruncateFirst;
  std::map<Variable, MomentPoly> rhs;

  /// q, p, then moments in key order.
  std::vector<Variable> variables() const;
  const MomentPoly& at(const Variable& v) const;
  const MomentPoly& at(const MomentKey& k) const { return at(Variable::moment(k)); }

  friend bool operator==(const EomSystem&, const EomSystem&) = default;
};

/// Route 1 brackets with H_eff at order N, route 2 with H_eff at order 2N;
/// both discard moments above N afterwards. N < 2 is rejected.
EomSystem deriveEom(const HamiltonianSpec& h, Kind kind, int order, Route route);

/// Closed form for Hamiltonians of degree <= 2; throws NotHarmonicError otherwise.
EomSystem harmonicEom(const HamiltonianSpec& h, Kind kind, int order);

/// H = q*phi(p) + xi(p).
struct LinearSplit {
  HamiltonianSpec phi;
  HamiltonianSpec xi;
};
/// Throws NotLinearError if h has terms of degree >= 2 in q.
LinearSplit splitLinear(const HamiltonianSpec& h);

struct LinearSubsystem {
  EomSystem system;  // q, p and G[a,b] for a <= maxA, b <= maxB
  /// Moments referenced by the right-hand sides but not retained; the
  /// hierarchy never closes on a finite set.
  std::vector<MomentKey> external;
};

/// Equations of q, p, G[a,0], G[a,1] (closed forms) and, for maxB >= 2,
/// G[a,b] with b >= 2 from the untruncated bracket. phi and xi must be
/// functions of p alone.
LinearSubsystem linearEomSubsystem(const HamiltonianSpec& phi, const HamiltonianSpec& xi, int maxA, int maxB,
                                   Kind kind = Kind::Quantum);

/// d/dt [G20 G02 - G11^2] from the closed form, truncated at order N.
MomentPoly heisenbergDrift(const HamiltonianSpec& h, int order, Kind kind = Kind::Quantum);

/// Chain rule: sum_v df/dv * rhs(v). Every variable of f must have an equation.
MomentPoly timeDerivative(const MomentPoly& f, const EomSystem& sys);

/// Header `# kind=... order=... route=...`, then `dX/dt = poly` per variable.
std::string serialize(const EomSystem& sys);
EomSystem parseEomSystem(std::string_view text);

}  // namespace moments
