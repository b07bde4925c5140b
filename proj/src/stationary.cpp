#include "moments/stationary.hpp"

#include <algorithm>
#include <random>

namespace moments {

namespace {

using Matrix = std::vector<std::vector<Rational>>;

// Gauss-Jordan elimination in place; returns pivot columns.
std::vector<std::size_t> rowReduce(Matrix& a, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < a.size(); ++c) {
    std::size_t r = row;
    while (r < a.size() && a[r][c] == 0) ++r;
    if (r == a.size()) continue;
    std::swap(a[r], a[row]);
    const Rational inv = 1 / a[row][c];
    for (auto& x : a[row]) x *= inv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == row || a[i][c] == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] -= f * a[row][j];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

bool isAffine(const MomentPoly& e, const std::vector<Variable>& unknowns) {
  for (const auto& [m, c] : e.terms()) {
    int degree = m.q + m.p + static_cast<int>(m.keys.size());
    if (degree > 1 || m.imaginary) return false;
  }
  (void)unknowns;
  return true;
}

}  // namespace

EquilibriumReport equilibriumSystem(const EomSystem& sys, const Rational& hbar) {
  EquilibriumReport report;
  report.unknowns = sys.variables();
  for (const auto& v : report.unknowns) {
    MomentPoly e = setHbar(sys.at(v), hbar);
    if (!e.isZero()) report.equations.push_back(std::move(e));
  }
  report.linear = std::all_of(report.equations.begin(), report.equations.end(),
                              [&](const MomentPoly& e) { return isAffine(e, report.unknowns); });
  const std::size_t n = report.unknowns.size();

  if (report.linear) {
    // Columns: unknowns, then the constant term.
    Matrix a;
    for (const auto& e : report.equations) {
      std::vector<Rational> row(n + 1, Rational(0));
      for (std::size_t j = 0; j < n; ++j) {
        const MomentPoly d = derivative(e, report.unknowns[j]);
        row[j] = d.isZero() ? Rational(0) : d.coefficient(Monomial{});
      }
      row[n] = e.coefficient(Monomial{});
      a.push_back(std::move(row));
    }
    const auto pivots = rowReduce(a, n);
    report.rank = pivots.size();
    for (std::size_t i = report.rank; i < a.size(); ++i)
      if (a[i][n] != 0) report.consistent = false;
    std::vector<bool> isPivot(n, false);
    for (auto c : pivots) isPivot[c] = true;
    for (std::size_t j = 0; j < n; ++j)
      if (!isPivot[j]) report.freeVariables.push_back(report.unknowns[j]);
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      MomentPoly value = Rational(-a[r][n]);
      for (std::size_t j = 0; j < n; ++j)
        if (!isPivot[j] && a[r][j] != 0) value -= a[r][j] * MomentPoly::variable(report.unknowns[j]);
      report.solution[report.unknowns[pivots[r]]] = value;
    }
    return report;
  }

  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> pick(1, 97);
  Bindings<Rational> env;
  env.hbar = hbar;
  env.q = Rational(pick(rng), 7);
  env.p = Rational(pick(rng), 7);
  for (const auto& v : report.unknowns)
    if (v.isMoment()) env.moments[v.key] = Rational(pick(rng), 11);
  Matrix jac;
  for (const auto& e : report.equations) {
    std::vector<Rational> row;
    for (const auto& v : report.unknowns) row.push_back(evaluate(derivative(e, v), env));
    jac.push_back(std::move(row));
  }
  report.rank = rowReduce(jac, n).size();
  return report;
}

bool isEquilibrium(const EomSystem& sys, const MomentState& state, double tol) {
  CompiledSystem cs(sys, sys.kind == Kind::Classical ? 0.0 : state.hbar);
  Eigen::VectorXd x = cs.pack(state), f;
  cs.evaluate(x, f);
  return f.size() == 0 || f.cwiseAbs().maxCoeff() <= tol;
}

StationaryProblem parsePotential(std::string_view text, Kind kind) {
  const HamiltonianSpec v = parseHamiltonian(text);
  if (v.terms.size() != 1) throw ParseError(0, "potential must be a single term lambda*q^m");
  const auto& [k, c] = *v.terms.begin();
  if (k.first != 0 || k.second < 1) throw ParseError(0, "potential must be lambda*q^m with m >= 1");
  return {k.second, c, kind};
}

std::map<int, MomentPoly> stationaryTable(const StationaryProblem& prob, int maxOrder) {
  const Kind kind = prob.kind;
  std::map<int, MomentPoly> g{{0, MomentPoly(1)}, {1, MomentPoly(0)}};
  for (int k = 2; k < prob.m + 2 && k <= maxOrder; ++k) g[k] = MomentPoly::moment(0, k, kind);
  const MomentPoly E = MomentPoly::energy();
  const MomentPoly h2 = MomentPoly::hbar(2);
  for (int n = 0; n + prob.m <= maxOrder; ++n) {
    if (n + prob.m < 2) continue;
    MomentPoly rhs = Rational(2 * (n + 1)) * E * g.at(n);
    if (kind == Kind::Quantum && n >= 2) rhs += Rational((n + 1) * n * (n - 1), 4) * h2 * g.at(n - 2);
    g[n + prob.m] = Rational(1) / (Rational(2 * n + prob.m + 2) * prob.lambda) * rhs;
  }
  g.erase(0);
  g.erase(1);
  return g;
}

MomentPoly stationaryCondition(const HamiltonianSpec& potential, int gPower, Kind kind) {
  for (const auto& [k, c] : potential.terms)
    if (k.first != 0) throw std::invalid_argument("potential must depend on q only");
  if (gPower < 0) throw std::invalid_argument("gPower must be non-negative");
  const int k = gPower + 2;
  auto x = [kind](int n) { return n < 0 ? MomentPoly(0) : MomentPoly::moment(0, n, kind); };
  auto taylor = [](const HamiltonianSpec& f, int j) {
    Integer fact;
    mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(j));
    return Rational(Integer(1), fact) * f.derivative(0, j).toPoly();
  };
  const HamiltonianSpec dV = potential.derivative(0, 1);
  const int degree = potential.degree();
  MomentPoly r = Rational(2 * (k - 1)) * MomentPoly::energy() * x(k - 2);
  for (int j = 0; j <= degree; ++j) {
    r -= Rational(2 * (k - 1)) * taylor(potential, j) * x(k - 2 + j);
    r -= taylor(dV, j) * x(k - 1 + j);
  }
  if (kind == Kind::Quantum && k >= 4)
    r += Rational((k - 1) * (k - 2) * (k - 3), 4) * MomentPoly::hbar(2) * x(k - 4);
  return r;
}

}  // namespace moments
