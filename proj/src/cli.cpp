#include "moments/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moments/brackets.hpp"
#include "moments/dynamics.hpp"
#include "moments/inequalities.hpp"
#include "moments/stationary.hpp"

namespace moments {

namespace {

struct Options {
  std::string hamiltonian = "0.5*p^2 + 0.5*q^2";
  int order = 2;
  std::string route = "1";
  std::string kind = "quantum";
  std::string hbar = "1";
  double tEnd = 10;
  double dt = 1e-3;
  int stride = 1;
  std::uint64_t seed = 1;
  std::size_t particles = 100000;
  int maxOrder = -1;
  std::string exportPath;
  std::string family;
  std::string potential = "q^2";
  std::string energy = "1";
  std::string init;
  std::string output;
  bool classical = false;
};

std::string g17(double x) { return fmt::format("{:.17g}", x); }

// Inline text, or the contents of the file it names.
std::string textOrFile(const std::string& s) {
  std::error_code ec;
  if (s.empty() || !std::filesystem::is_regular_file(s, ec)) return s;
  std::ifstream in(s);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Kind kindOf(const Options& o) {
  if (o.kind == "quantum") return Kind::Quantum;
  if (o.kind == "classical") return Kind::Classical;
  throw std::invalid_argument("--kind must be quantum or classical");
}

double hbarValue(const Options& o) { return parseRational(o.hbar).get_d(); }

void requirePositive(double v, const char* name) {
  if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be positive");
}

// Writes to --output when given, else to `out`.
template <typename F>
void emit(const Options& o, std::ostream& out, F&& body) {
  if (o.output.empty()) {
    body(out);
    return;
  }
  std::ofstream file(o.output);
  if (!file) throw std::runtime_error("cannot open " + o.output);
  body(file);
}

MomentState initialState(const Options& o, Kind kind, int order) {
  const double hbar = hbarValue(o);
  MomentState s;
  if (o.init.empty()) {
    s = gaussianMoments(1, 0, hbar / 2, 0, hbar / 2, order, kind, hbar);
  } else {
    s = parseState(textOrFile(o.init), kind);
  }
  s.kind = kind;
  s.hbar = kind == Kind::Quantum ? hbar : 0;
  return s;
}

std::vector<MomentKey> csvKeys(int order) { return momentsUpTo(order, Kind::Quantum); }

// Relabels a trajectory so quantum and classical runs share the M[a,b] header.
std::vector<MomentState> asQuantumKeys(std::vector<MomentState> traj) {
  for (auto& s : traj) s = s.as(Kind::Quantum);
  return traj;
}

int cmdDerive(const Options& o, std::ostream& out) {
  const auto h = parseHamiltonian(textOrFile(o.hamiltonian));
  const auto sys = deriveEom(h, kindOf(o), o.order, parseRoute(o.route));
  emit(o, out, [&](std::ostream& os) { os << serialize(sys); });
  return 0;
}

int cmdIntegrate(const Options& o, std::ostream& out) {
  requirePositive(std::abs(o.dt), "--dt");
  requirePositive(o.stride, "--stride");
  const Kind kind = kindOf(o);
  const auto h = parseHamiltonian(textOrFile(o.hamiltonian));
  const auto sys = deriveEom(h, kind, o.order, parseRoute(o.route));
  const auto traj = integrate(sys, initialState(o, kind, o.order), o.tEnd, o.dt, o.stride);
  const auto report = monitorConserved(h, sys, traj);
  emit(o, out, [&](std::ostream& os) {
    writeCsv(os, traj, momentsUpTo(o.order, kind), kind == Kind::Quantum ? "G" : "C");
    writeReport(os, report);
  });
  return 0;
}

int cmdEnsemble(const Options& o, std::ostream& out) {
  requirePositive(o.dt, "--dt");
  requirePositive(o.stride, "--stride");
  requirePositive(static_cast<double>(o.particles), "--particles");
  const auto h = parseHamiltonian(textOrFile(o.hamiltonian));
  const MomentState s = initialState(o, Kind::Classical, 2);
  const auto ens = gaussianEnsemble(s.q, s.p, s.moment(2, 0), s.moment(1, 1), s.moment(0, 2), o.particles, o.seed);
  std::vector<MomentState> samples;
  ensembleEvolve(h, ens, o.tEnd, o.dt, o.stride,
                 [&](double t, const ParticleEnsemble& e) { samples.push_back(sampleMoments(e, o.order, t)); });
  emit(o, out, [&](std::ostream& os) { writeCsv(os, samples, momentsUpTo(o.order, Kind::Classical), "C"); });
  return 0;
}

int cmdInequalities(const Options& o, std::ostream& out) {
  const int k = o.maxOrder < 0 ? 5 : o.maxOrder;
  requirePositive(k, "--max-order");
  Catalog cat = enumerateCatalog(k);
  if (o.classical || o.kind == "classical") cat = classicalCatalog(cat);
  if (!o.exportPath.empty()) {
    std::ofstream file(o.exportPath);
    if (!file) throw std::runtime_error("cannot open " + o.exportPath);
    for (std::size_t i = 0; i < cat.items.size(); ++i) file << to_string(cat.items[i], cat.classes[i]) << '\n';
  }
  std::size_t counts[3] = {0, 0, 0};
  for (auto c : cat.classes) ++counts[static_cast<int>(c)];
  out << "kind: " << (cat.kind == Kind::Quantum ? "quantum" : "classical") << '\n';
  out << "max-order: " << k << '\n';
  if (cat.kind == Kind::Quantum) {
    out << "words: " << cat.stats.words << '\n';
    out << "pairs: " << cat.stats.pairs << '\n';
    out << "equalities: " << cat.stats.equalities << '\n';
    out << "distinct-raw: " << cat.stats.distinctRaw << '\n';
  }
  out << "distinct: " << cat.items.size() << '\n';
  out << "uncertainty: " << counts[static_cast<int>(IneqClass::Uncertainty)] << '\n';
  out << "ordinary: " << counts[static_cast<int>(IneqClass::Ordinary)] << '\n';
  return 0;
}

template <typename Scalar>
int reportFamily(const MomentFamily<Scalar>& fam, const Catalog& cat, int maxOrder, const Scalar& hbar,
                 std::ostream& out) {
  const auto rep = checkFamily(fam, cat.upToOrder(maxOrder), maxOrder, hbar);
  for (const auto& e : rep.entries) {
    if (e.pass) continue;
    std::ostringstream l, r;
    if constexpr (std::is_same_v<Scalar, Rational>) {
      l << e.lhs;
      r << e.rhs;
    } else {
      l << g17(e.lhs);
      r << g17(e.rhs);
    }
    out << "FAIL " << to_string(*e.inequality) << " ; lhs=" << l.str() << " ; rhs=" << r.str() << '\n';
  }
  out << "family: " << rep.label << '\n';
  out << "checked: " << rep.entries.size() << '\n';
  out << "failures: " << rep.failures << '\n';
  return 0;
}

int cmdCheckDistribution(const Options& o, std::ostream& out) {
  if (o.family.empty()) throw std::invalid_argument("--family is required (one of factorial, order-factorial, power0..power3, unit)");
  const int maxOrder = o.maxOrder < 0 ? 8 : o.maxOrder;
  requirePositive(maxOrder, "--max-order");
  Catalog cat = enumerateCatalog((maxOrder + 1) / 2);
  if (o.classical || o.kind == "classical") cat = classicalCatalog(cat);
  const Rational hq = parseRational(o.hbar);
  // Exact arithmetic when the family is rational at this hbar.
  try {
    const auto fam = namedFamily<Rational>(o.family, hq);
    for (int n = 2; n <= maxOrder; ++n) (void)fam.rule(n, 1);
    return reportFamily(fam, cat, maxOrder, hq, out);
  } catch (const std::invalid_argument&) {
    return reportFamily(namedFamily<double>(o.family, hq.get_d()), cat, maxOrder, hq.get_d(), out);
  }
}

int cmdStationary(const Options& o, std::ostream& out) {
  const int maxOrder = o.maxOrder < 0 ? 8 : o.maxOrder;
  const StationaryProblem prob = parsePotential(o.potential, kindOf(o));
  const Rational E = parseRational(o.energy);
  const Rational hbar = prob.kind == Kind::Quantum ? parseRational(o.hbar) : Rational(0);
  const auto table = stationaryTable(prob, maxOrder);
  const char* m = prob.kind == Kind::Quantum ? "G" : "C";
  for (const auto& [k, g] : table) {
    const MomentPoly v = setHbar(setEnergy(g, E), hbar);
    out << m << "[0," << k << "] = " << to_string(g) << " = " << to_string(v);
    if (v.isConstant()) out << " = " << g17(v.coefficient(Monomial{}).get_d());
    out << '\n';
  }
  return 0;
}

int cmdVerifyBrackets(const Options& o, std::ostream& out) {
  const int k = o.maxOrder < 0 ? 5 : o.maxOrder;
  const auto keys = momentsUpTo(k, Kind::Quantum);
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& x : keys) {
    for (const auto& y : keys) {
      ++pairs;
      if (quantumBracket(x, y) != commutatorBracket(x, y)) {
        ++mismatches;
        out << "MISMATCH {G[" << x.a << ',' << x.b << "],G[" << y.a << ',' << y.b << "]}\n";
      }
    }
  }
  out << "pairs: " << pairs << '\n' << "mismatches: " << mismatches << '\n';
  return mismatches == 0 ? 0 : 1;
}

// Point particle under Hamilton's equations, as a system without moments.
EomSystem pointSystem(const HamiltonianSpec& h) {
  EomSystem sys;
  sys.kind = Kind::Classical;
  sys.order = 0;
  sys.rhs[Variable::q()] = h.derivative(1, 0).toPoly();
  sys.rhs[Variable::p()] = -h.derivative(0, 1).toPoly();
  return sys;
}

int cmdCompare(const Options& o, std::ostream& out) {
  requirePositive(std::abs(o.dt), "--dt");
  requirePositive(o.stride, "--stride");
  const auto h = parseHamiltonian(textOrFile(o.hamiltonian));
  const Route route = parseRoute(o.route);
  const MomentState init = initialState(o, Kind::Quantum, o.order);
  const auto quantum = integrate(deriveEom(h, Kind::Quantum, o.order, route), init, o.tEnd, o.dt, o.stride);
  const auto classical =
      integrate(deriveEom(h, Kind::Classical, o.order, route), init.as(Kind::Classical), o.tEnd, o.dt, o.stride);
  MomentState point;
  point.kind = Kind::Classical;
  point.q = init.q;
  point.p = init.p;
  const auto points = integrate(pointSystem(h), point, o.tEnd, o.dt, o.stride);
  const auto keys = csvKeys(o.order);
  if (o.output.empty()) {
    out << "# quantum\n";
    writeCsv(out, asQuantumKeys(quantum), keys, "M");
    out << "# classical\n";
    writeCsv(out, asQuantumKeys(classical), keys, "M");
    out << "# point\n";
    writeCsv(out, points, {}, "M");
    return 0;
  }
  auto write = [&](const std::string& suffix, const std::vector<MomentState>& traj,
                   const std::vector<MomentKey>& k) {
    std::ofstream file(o.output + suffix);
    if (!file) throw std::runtime_error("cannot open " + o.output + suffix);
    writeCsv(file, traj, k, "M");
  };
  write("quantum.csv", asQuantumKeys(quantum), keys);
  write("classical.csv", asQuantumKeys(classical), keys);
  write("point.csv", points, {});
  return 0;
}

int cmdReduce(const Options& o, std::ostream& out) {
  const int k = o.maxOrder < 0 ? 5 : o.maxOrder;
  const Catalog cat = enumerateCatalog(k);
  out << "# bounds implied by words of length <= " << k << "\n";
  for (int n = 1; n <= k; ++n) {
    const auto r = reduceToPurePair(cat, n);
    out << "gamma" << n << " = " << r.gamma << " ; " << to_string(r.relation) << '\n';
  }
  for (const auto& c : equalUncertaintyConstraints(cat, std::min(2 * k, 8))) out << to_string(c) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Moment dynamics, uncertainty relations and stationary states", "moments"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "flat key = value file; flags override it");
  // Values such as Hamiltonians contain spaces and commas; never split them into arrays.
  app.get_config_formatter_base()->arrayDelimiter('\x1f');

  app.add_option("--hamiltonian", o.hamiltonian, "polynomial in p and q, or a file containing one");
  app.add_option("--order", o.order, "truncation order N");
  app.add_option("--route", o.route, "1: truncate H_Q at N, 2: expand at 2N then truncate")->check(CLI::IsMember({"1", "2"}));
  app.add_option("--kind", o.kind)->check(CLI::IsMember({"quantum", "classical"}));
  app.add_option("--hbar", o.hbar, "decimal or rational");
  app.add_option("--t-end", o.tEnd);
  app.add_option("--dt", o.dt);
  app.add_option("--stride", o.stride, "write every n-th step");
  app.add_option("--seed", o.seed);
  app.add_option("--particles", o.particles);
  app.add_option("--max-order", o.maxOrder);
  app.add_option("--export", o.exportPath, "catalog output file");
  app.add_option("--family", o.family);
  app.add_option("--potential", o.potential, "lambda*q^m");
  app.add_option("--E", o.energy, "energy of the stationary state");
  app.add_option("--init", o.init, "initial state, e.g. \"q=1, p=0, G[2,0]=0.5\", or a file");
  app.add_option("--output", o.output, "output file (compare: path prefix)");
  app.add_flag("--classical", o.classical, "classical catalog");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&);
  };
  const Sub subs[] = {
      {"derive", "print the truncated equations of motion", cmdDerive},
      {"integrate", "RK4 evolution of the moment system (CSV + monitor report)", cmdIntegrate},
      {"ensemble", "sampled moments of a classical particle cloud (CSV)", cmdEnsemble},
      {"inequalities", "enumerate the uncertainty catalog", cmdInequalities},
      {"check-distribution", "test a moment family against the catalog", cmdCheckDistribution},
      {"stationary", "moment table of a stationary state in V = lambda q^m", cmdStationary},
      {"verify-brackets", "compare closed-form brackets with commutators", cmdVerifyBrackets},
      {"compare", "quantum, classical and point evolutions from one initial state", cmdCompare},
      {"reduce", "gamma constants and equal-uncertainty constraints", cmdReduce},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) return s.fn(o, out);
  } catch (const ParseError& e) {
    err << "moments: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "moments: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace moments
