#pragma once

// Stationary states: equilibria of a truncated moment system and the moment
// recursion for H = p^2/2 + lambda q^m about q = 0.

#include <map>
#include <optional>
#include <vector>

#include "moments/dynamics.hpp"
#include "moments/eomgen.hpp"

namespace moments {

struct EquilibriumReport {
  std::vector<MomentPoly> equations;  // nonzero right-hand sides, each = 0
  std::vector<Variable> unknowns;
  bool linear = false;
  std::size_t rank = 0;
  /// unknowns - rank; positive means the system leaves a family of states.
  std::size_t deficiency() const { return unknowns.size() - rank; }
  /// Linear systems only: pivot variables in terms of the free ones.
  std::map<Variable, MomentPoly> solution;
  std::vector<Variable> freeVariables;
  bool consistent = true;
};

/// Sets every right-hand side to zero. hbar is fixed to `hbar` first. Linear
/// systems are solved exactly; otherwise the rank is the Jacobian rank at a
/// pseudo-random rational point.
EquilibriumReport equilibriumSystem(const EomSystem& sys, const Rational& hbar = 1);

/// max |rhs| <= tol at the given state.
bool isEquilibrium(const EomSystem& sys, const MomentState& state, double tol = 1e-12);

/// V = lambda q^m, centroid at q = 0.
struct StationaryProblem {
  int m = 2;
  Rational lambda = 1;
  Kind kind = Kind::Quantum;
};

/// Extracts lambda and m from a single-term potential such as "q^4" or "0.5*q^4".
StationaryProblem parsePotential(std::string_view text, Kind kind);

/// (2n+m+2) lambda G[0,n+m] = 2E(n+1) G[0,n] + (hbar^2/4)(n+1)n(n-1) G[0,n-2],
/// solved for G[0,n+m]; classical problems drop the hbar term. `lower` maps k
/// to G[0,k]; G[0,0] = 1 and G[0,1] = 0 are implied.
template <typename Scalar>
Scalar recursionStep(const StationaryProblem& prob, int n, const Scalar& E, const Scalar& hbar,
                     const std::map<int, Scalar>& lower);

/// G[0,k] for 2 <= k <= maxOrder as polynomials in E and hbar. Orders below m
/// that the recursion cannot reach stay as symbolic seeds.
std::map<int, MomentPoly> stationaryTable(const StationaryProblem& prob, int maxOrder);

/// 2E<g''> - 2<g''V> - <g'V'> + (hbar^2/4)<g''''> with g = x^k/k, k = gPower+2,
/// x = q^ - q, V expanded about the symbolic centroid q.
MomentPoly stationaryCondition(const HamiltonianSpec& potential, int gPower, Kind kind);

// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar recursionStep(const StationaryProblem& prob, int n, const Scalar& E, const Scalar& hbar,
                     const std::map<int, Scalar>& lower) {
  if (n < 0) throw std::invalid_argument("recursion index must be non-negative");
  if (prob.m < 1) throw std::invalid_argument("potential power must be positive");
  auto get = [&](int k) -> Scalar {
    if (k < 0 || k == 1) return Scalar(0);
    if (k == 0) return Scalar(1);
    auto it = lower.find(k);
    if (it == lower.end())
      throw SeedingError("G[0," + std::to_string(k) + "] is needed for G[0," + std::to_string(n + prob.m) +
                         "] but was not seeded");
    return it->second;
  };
  Scalar rhs = Scalar(2) * E * Scalar(n + 1) * get(n);
  if (prob.kind == Kind::Quantum && n >= 2)
    rhs += hbar * hbar / Scalar(4) * Scalar((n + 1) * n * (n - 1)) * get(n - 2);
  Scalar denom = Scalar(2 * n + prob.m + 2) * detail::fromRational<Scalar>(prob.lambda);
  return Scalar(rhs / denom);
}

}  // namespace moments
