#pragma once

// Cauchy-Schwarz moment inequalities: generators, the quantum word catalog,
// uncertainty classification, reductions, and moment-family checks.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moments/opalgebra.hpp"
#include "moments/symcore.hpp"

namespace moments {

enum class IneqClass { Uncertainty, Ordinary, Equality };
std::string_view to_string(IneqClass c);

/// lhs <= rhs. Stored canonically: the lhs holds the negated constant terms
/// and the hbar-free squares of single moments with negative slack
/// coefficient; everything else sits on the rhs.
struct Inequality {
  MomentPoly lhs;
  MomentPoly rhs;
  std::string provenance;
  Kind kind = Kind::Quantum;

  MomentPoly slack() const { return rhs - lhs; }
};

Inequality canonicalInequality(const MomentPoly& slack, std::string provenance, Kind kind);
/// `LHS <= RHS ; provenance=... ; class=...`
std::string to_string(const Inequality& x, std::optional<IneqClass> cls = std::nullopt);

/// (C[a+c,b+d])^2 <= C[2a,2b] C[2c,2d].
Inequality classicalIneqTypeI(int a, int b, int c, int d);
/// f = (Q+P)^a, g = (Q+P)^b classically; a == b throws DegenerateEqualityError.
Inequality classicalIneqTypeII(int a, int b);
/// |<f^dagger g>|^2 <= <f^dagger f><g^dagger g> in Weyl moments.
Inequality quantumIneqFromWords(const OperatorWord& f, const OperatorWord& g);
Inequality quantumIneqFromOperators(const OperatorSum& f, const OperatorSum& g, std::string provenance);
/// f = (Q+P)^a, g = (Q+P)^b as operators; carries no hbar.
Inequality quantumIneqSymmetricChoice(int a, int b);
/// 0 <= M[2n,2m] for 1 <= n+m <= maxSum.
std::vector<Inequality> positivityRelations(Kind kind, int maxSum = 5);

/// Every slack term hbar^h * (moments of total order s) obeys 2h + s = 2(|f|+|g|).
bool obeysGrading(const Inequality& x, int orderF, int orderG);

IneqClass classifyUncertainty(const Inequality& x);

struct CatalogStats {
  std::size_t words = 0;
  std::size_t pairs = 0;       // unordered, self-pairs included
  std::size_t equalities = 0;  // pairs whose slack vanishes
  std::size_t distinct = 0;    // after dedup on the canonical slack
  std::size_t distinctRaw = 0;  // after dedup on the uncanonicalized (A^2+B^2, rhs) pair
  std::size_t uncertainty = 0;
};

struct Catalog {
  Kind kind = Kind::Quantum;
  int maxOrderPerSide = 0;
  std::vector<Inequality> items;
  std::vector<IneqClass> classes;
  CatalogStats stats;

  const Inequality* findBySlack(const MomentPoly& slack) const;
  std::vector<const Inequality*> upToOrder(int maxMomentOrder) const;
  /// Rebuilds the slack lookup after items changed.
  void reindex();

 private:
  std::map<MomentPoly, std::size_t> index_;
};

/// f, g over all words of length 1..maxOrderPerSide, unordered pairs,
/// exact dedup. Deterministic for any thread count (0 = hardware).
Catalog enumerateCatalog(int maxOrderPerSide, unsigned threads = 0);
/// hbar -> 0 limit of a quantum catalog plus the type I and II generators up
/// to the same order per side.
Catalog classicalCatalog(const Catalog& quantum);

struct PurePairResult {
  int n = 0;
  Rational gamma;
  Inequality relation;  // gamma hbar^{2n} <= G[0,2n] G[2n,0]
  std::vector<std::string> sources;
};

/// Zeroes every moment except G[2a,0], G[0,2a]; uncertainty relations whose
/// remainder is c0 hbar^k <= c1 hbar^j G[0,2n] G[2n,0] give gamma_n = max c0/c1.
PurePairResult reduceToPurePair(const Catalog& catalog, int n);

/// m_plus >= ratio * m_minus in the adimensional g_a (g_0 = 1).
struct GConstraint {
  std::map<int, int> plus;   // a -> exponent of g_a
  std::map<int, int> minus;
  Rational ratio;
  std::string source;
};
std::string to_string(const GConstraint& c);

/// Substitutes G[2a,0] = G[0,2a] = g_a hbar^a (others 0) into every
/// inequality with moments up to maxMomentOrder and keeps the strongest
/// two-term constraint for each pair of monomials.
std::vector<GConstraint> equalUncertaintyConstraints(const Catalog& catalog, int maxMomentOrder = 8);

template <typename Scalar>
struct MomentFamily {
  std::string label;
  std::function<Scalar(int, int)> rule;  // consulted for a+b >= 2 only
};

/// factorial, order-factorial, power0, power1, power2, power3, unit; all
/// scaled by hbar^{(a+b)/2}. x^{x-k} is read as 1 at x = 0.
template <typename Scalar>
MomentFamily<Scalar> namedFamily(const std::string& name, const Scalar& hbar);
std::vector<std::string> familyNames();

template <typename Scalar>
struct FamilyEntry {
  const Inequality* inequality;
  Scalar lhs;
  Scalar rhs;
  Scalar margin;
  bool pass;
};

template <typename Scalar>
struct FamilyReport {
  std::string label;
  std::vector<FamilyEntry<Scalar>> entries;
  std::size_t failures = 0;
  bool allPass() const { return failures == 0; }
};

/// Exact comparison for Rational; 1e-12 relative slack for floating point.
template <typename Scalar>
FamilyReport<Scalar> checkFamily(const MomentFamily<Scalar>& fam, const std::vector<const Inequality*>& ineqs,
                                 int maxOrder, const Scalar& hbar);

struct AppendixEntry {
  std::string label;
  Inequality relation;
  bool found = false;
  std::string provenance;  // catalog provenance when found
  std::string nearest;     // closest catalog member when not found
};

struct AppendixReport {
  std::vector<AppendixEntry> entries;
  bool summedHolds = false;
  bool allFound() const;
};

/// Matches the explicit second- and third-order uncertainty relations
/// against the catalog and checks their summed combination.
AppendixReport verifyAppendix(const Catalog& catalog);

// ---------------------------------------------------------------------------

template <typename Scalar>
FamilyReport<Scalar> checkFamily(const MomentFamily<Scalar>& fam, const std::vector<const Inequality*>& ineqs,
                                 int maxOrder, const Scalar& hbar) {
  FamilyReport<Scalar> report;
  report.label = fam.label;
  std::function<Scalar(int, int)> family = [&fam](int a, int b) -> Scalar {
    if (a + b == 0) return Scalar(1);
    if (a + b == 1) return Scalar(0);
    return fam.rule(a, b);
  };
  Bindings<Scalar> env;
  env.hbar = hbar;
  for (const Inequality* x : ineqs) {
    if (std::max(x->lhs.maxMomentOrder(), x->rhs.maxMomentOrder()) > maxOrder) continue;
    const Scalar l = substituteMomentFamily(x->lhs, family, env);
    const Scalar r = substituteMomentFamily(x->rhs, family, env);
    const Scalar margin = r - l;
    bool pass = false;
    if constexpr (std::is_same_v<Scalar, Rational>) {
      pass = margin >= 0;
    } else {
      using std::abs;
      const Scalar scale = std::max({Scalar(1), Scalar(abs(l)), Scalar(abs(r))});
      pass = margin >= -Scalar(1e-12) * scale;
    }
    if (!pass) ++report.failures;
    report.entries.push_back({x, l, r, margin, pass});
  }
  return report;
}

}  // namespace moments
