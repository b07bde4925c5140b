#include "moments/dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace moments {

double MomentState::moment(int a, int b) const {
  if (a + b == 0) return 1;
  if (a + b == 1) return 0;
  auto it = moments.find({a, b, kind});
  return it == moments.end() ? 0.0 : it->second;
}

MomentState MomentState::as(Kind k) const {
  MomentState r = *this;
  r.kind = k;
  r.moments.clear();
  for (const auto& [key, v] : moments) r.moments[{key.a, key.b, k}] = v;
  return r;
}

CompiledSystem::CompiledSystem(const EomSystem& sys, double hbar) : kind_(sys.kind), hbar_(hbar) {
  vars_ = sys.variables();
  std::map<Variable, int> index;
  for (std::size_t i = 0; i < vars_.size(); ++i) index[vars_[i]] = static_cast<int>(i);
  auto find = [&](const Variable& v) {
    auto it = index.find(v);
    if (it == index.end()) throw std::invalid_argument("right-hand side references " + to_string(v) +
                                                       " which has no equation");
    return it->second;
  };
  if (index.count(Variable::q())) qIndex_ = index[Variable::q()];
  if (index.count(Variable::p())) pIndex_ = index[Variable::p()];
  for (const auto& v : vars_) {
    std::vector<Term> terms;
    for (const auto& [m, c] : sys.at(v).terms()) {
      if (m.imaginary) throw NonRealError("equation for " + to_string(v) + " is not real");
      if (m.energy) throw MissingBindingError("equation for " + to_string(v) + " depends on E");
      Term t{c.get_d() * std::pow(hbar, m.hbar), m.q, m.p, {}};
      if (m.q) find(Variable::q());
      if (m.p) find(Variable::p());
      for (const auto& k : m.keys) t.factors.push_back(find(Variable::moment(k)));
      terms.push_back(std::move(t));
    }
    rhs_.push_back(std::move(terms));
  }
}

Eigen::VectorXd CompiledSystem::pack(const MomentState& s) const {
  if (s.kind != kind_) throw std::invalid_argument("initial state kind does not match the system");
  Eigen::VectorXd x(static_cast<Eigen::Index>(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    const auto idx = static_cast<Eigen::Index>(i);
    switch (v.tag) {
      case Variable::Tag::Q: x[idx] = s.q; break;
      case Variable::Tag::P: x[idx] = s.p; break;
      case Variable::Tag::Moment: x[idx] = s.moment(v.key.a, v.key.b); break;
    }
  }
  return x;
}

MomentState CompiledSystem::unpack(const Eigen::VectorXd& x, double t) const {
  MomentState s;
  s.kind = kind_;
  s.t = t;
  s.hbar = hbar_;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    const double value = x[static_cast<Eigen::Index>(i)];
    switch (v.tag) {
      case Variable::Tag::Q: s.q = value; break;
      case Variable::Tag::P: s.p = value; break;
      case Variable::Tag::Moment: s.moments[v.key] = value; break;
    }
  }
  return s;
}

void CompiledSystem::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.resize(x.size());
  const double q = qIndex_ >= 0 ? x[qIndex_] : 0.0;
  const double p = pIndex_ >= 0 ? x[pIndex_] : 0.0;
  for (std::size_t i = 0; i < rhs_.size(); ++i) {
    double sum = 0;
    for (const auto& t : rhs_[i]) {
      double v = t.coeff;
      if (t.q) v *= detail::ipow(q, t.q);
      if (t.p) v *= detail::ipow(p, t.p);
      for (int f : t.factors) v *= x[f];
      sum += v;
    }
    out[static_cast<Eigen::Index>(i)] = sum;
  }
}

namespace {

long stepCount(double t0, double tEnd, double dt) {
  if (dt == 0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be finite and nonzero");
  const double span = tEnd - t0;
  if (span != 0 && (span > 0) != (dt > 0)) throw std::invalid_argument("dt has the wrong sign for tEnd");
  const double n = span / dt;
  return static_cast<long>(std::ceil(n - 1e-9));
}

template <typename F>
void rk4Step(const F& f, Eigen::VectorXd& x, double h, Eigen::VectorXd& k1, Eigen::VectorXd& k2,
             Eigen::VectorXd& k3, Eigen::VectorXd& k4, Eigen::VectorXd& tmp) {
  f(x, k1);
  tmp = x + 0.5 * h * k1;
  f(tmp, k2);
  tmp = x + 0.5 * h * k2;
  f(tmp, k3);
  tmp = x + h * k3;
  f(tmp, k4);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::vector<MomentState> integrate(const EomSystem& sys, const MomentState& init, double tEnd, double dt,
                                   int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  const double hbar = sys.kind == Kind::Classical ? 0.0 : init.hbar;
  CompiledSystem cs(sys, hbar);
  Eigen::VectorXd x = cs.pack(init);
  const long n = stepCount(init.t, tEnd, dt);
  std::vector<MomentState> out;
  out.reserve(static_cast<std::size_t>(n / stride + 2));
  out.push_back(cs.unpack(x, init.t));
  Eigen::VectorXd k1, k2, k3, k4, tmp;
  auto f = [&](const Eigen::VectorXd& y, Eigen::VectorXd& o) { cs.evaluate(y, o); };
  for (long k = 0; k < n; ++k) {
    const double t = init.t + static_cast<double>(k) * dt;
    const double h = (k == n - 1) ? tEnd - t : dt;
    Eigen::VectorXd prev = x;
    rk4Step(f, x, h, k1, k2, k3, k4, tmp);
    if (!x.allFinite())
      throw DivergenceError(fmt::format("non-finite state after t = {:.17g}", t), cs.unpack(prev, t));
    const double tNext = (k == n - 1) ? tEnd : init.t + static_cast<double>(k + 1) * dt;
    if ((k + 1) % stride == 0 || k == n - 1) out.push_back(cs.unpack(x, tNext));
  }
  return out;
}

MonitorReport monitorConserved(const HamiltonianSpec& h, const EomSystem& sys,
                               const std::vector<MomentState>& trajectory) {
  MonitorReport report;
  const MomentPoly heff = effectiveHamiltonian(h, sys.kind, sys.order);
  std::set<MomentKey> reported;
  for (const auto& s : trajectory) {
    Bindings<double> env;
    env.q = s.q;
    env.p = s.p;
    env.hbar = s.hbar;
    for (const auto& k : momentsUpTo(sys.order, sys.kind)) env.moments[k] = s.moment(k.a, k.b);
    MonitorSample m{};
    m.t = s.t;
    m.effective = evaluate(heff, env);
    m.centroid = h.value(s.q, s.p);
    m.difference = m.effective - m.centroid;
    m.heisenberg = s.moment(2, 0) * s.moment(0, 2) - s.moment(1, 1) * s.moment(1, 1);
    report.samples.push_back(m);
    for (const auto& [k, v] : s.moments) {
      if (k.a % 2 == 0 && k.b % 2 == 0 && v < 0 && reported.insert(k).second)
        report.warnings.push_back(fmt::format("{} = {:.17g} < 0 at t = {:.17g} (truncation artifact)", to_string(k),
                                              v, s.t));
    }
  }
  if (!report.samples.empty()) {
    const auto& first = report.samples.front();
    for (const auto& m : report.samples) {
      report.driftEffective = std::max(report.driftEffective, std::abs(m.effective - first.effective));
      report.driftCentroid = std::max(report.driftCentroid, std::abs(m.centroid - first.centroid));
      report.driftDifference = std::max(report.driftDifference, std::abs(m.difference - first.difference));
      report.driftHeisenberg = std::max(report.driftHeisenberg, std::abs(m.heisenberg - first.heisenberg));
    }
  }
  return report;
}

void writeReport(std::ostream& out, const MonitorReport& report, std::string_view prefix) {
  out << prefix << "monitor samples=" << report.samples.size() << "\n";
  out << prefix << "columns t,H_eff,H_centroid,H_eff-H_centroid,M20*M02-M11^2\n";
  for (const auto& m : report.samples)
    out << prefix << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", m.t, m.effective, m.centroid,
                                 m.difference, m.heisenberg);
  out << prefix
      << fmt::format("max_drift H_eff={:.17g} H_centroid={:.17g} difference={:.17g} heisenberg={:.17g}\n",
                     report.driftEffective, report.driftCentroid, report.driftDifference, report.driftHeisenberg);
  for (const auto& w : report.warnings) out << prefix << "warning " << w << "\n";
}

ParticleEnsemble gaussianEnsemble(double q, double p, double m20, double m11, double m02, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("ensemble must be nonempty");
  // Cholesky factor of [[var q, cov], [cov, var p]]; tolerates a degenerate cloud.
  const double l00 = std::sqrt(std::max(m02, 0.0));
  const double l10 = l00 > 0 ? m11 / l00 : 0.0;
  const double l11 = std::sqrt(std::max(m20 - l10 * l10, 0.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ParticleEnsemble ens;
  ens.particles.resize(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < ens.particles.rows(); ++i) {
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    ens.particles(i, 0) = q + l00 * z0;
    ens.particles(i, 1) = p + l10 * z0 + l11 * z1;
  }
  return ens;
}

namespace {

double doubleFactorial(int n) {
  double r = 1;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

MomentState gaussianMoments(double q, double p, double m20, double m11, double m02, int order, Kind kind,
                            double hbar) {
  MomentState s;
  s.kind = kind;
  s.q = q;
  s.p = p;
  s.hbar = hbar;
  for (const auto& key : momentsUpTo(order, kind)) {
    // Isserlis: k cross pairings between the a momentum and b position factors.
    double v = 0;
    for (int k = 0; k <= std::min(key.a, key.b); ++k) {
      const int ra = key.a - k, rb = key.b - k;
      if (ra % 2 || rb % 2) continue;
      double f = 1;
      for (int i = 1; i <= k; ++i) f *= i;
      v += binom(key.a, k) * binom(key.b, k) * f * std::pow(m11, k) * doubleFactorial(ra - 1) *
           std::pow(m20, ra / 2) * doubleFactorial(rb - 1) * std::pow(m02, rb / 2);
    }
    s.moments[key] = v;
  }
  return s;
}

namespace {

struct PolyTerms {
  std::vector<std::tuple<double, int, int>> terms;  // coeff, p power, q power

  explicit PolyTerms(const HamiltonianSpec& h) {
    for (const auto& [k, c] : h.terms) terms.emplace_back(c.get_d(), k.first, k.second);
  }
  double operator()(double q, double p) const {
    double s = 0;
    for (const auto& [c, a, b] : terms) s += c * detail::ipow(p, a) * detail::ipow(q, b);
    return s;
  }
};

}  // namespace

ParticleEnsemble ensembleEvolve(const HamiltonianSpec& h, const ParticleEnsemble& ens, double tEnd, double dt,
                                int stride, const std::function<void(double, const ParticleEnsemble&)>& observer) {
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  if (ens.size() == 0) throw std::invalid_argument("ensemble must be nonempty");
  const long n = stepCount(0, tEnd, dt);
  const PolyTerms dHdp(h.derivative(1, 0));
  const PolyTerms dHdq(h.derivative(0, 1));
  ParticleEnsemble cur = ens;
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);

  auto advance = [&](long k0, long k1) {
    std::vector<std::size_t> failed(workers, SIZE_MAX);
    auto work = [&](std::size_t w) {
      const std::size_t lo = cur.size() * w / workers, hi = cur.size() * (w + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        double q = cur.particles(row, 0), p = cur.particles(row, 1);
        for (long k = k0; k < k1; ++k) {
          const double t = static_cast<double>(k) * dt;
          const double hs = (k == n - 1) ? tEnd - t : dt;
          const double a1 = dHdp(q, p), b1 = -dHdq(q, p);
          const double a2 = dHdp(q + 0.5 * hs * a1, p + 0.5 * hs * b1),
                       b2 = -dHdq(q + 0.5 * hs * a1, p + 0.5 * hs * b1);
          const double a3 = dHdp(q + 0.5 * hs * a2, p + 0.5 * hs * b2),
                       b3 = -dHdq(q + 0.5 * hs * a2, p + 0.5 * hs * b2);
          const double a4 = dHdp(q + hs * a3, p + hs * b3), b4 = -dHdq(q + hs * a3, p + hs * b3);
          q += hs / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
          p += hs / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
          if (!std::isfinite(q) || !std::isfinite(p)) {
            failed[w] = i;
            return;
          }
        }
        cur.particles(row, 0) = q;
        cur.particles(row, 1) = p;
      }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work, w);
    work(0);
    for (auto& t : threads) t.join();
    const std::size_t bad = *std::min_element(failed.begin(), failed.end());
    if (bad != SIZE_MAX) throw ParticleDivergenceError(fmt::format("particle {} diverged", bad), bad);
  };

  if (observer) observer(0.0, cur);
  if (!observer) {
    advance(0, n);
    return cur;
  }
  for (long k = 0; k < n; k += stride) {
    const long k1 = std::min(n, k + stride);
    advance(k, k1);
    observer(k1 == n ? tEnd : static_cast<double>(k1) * dt, cur);
  }
  return cur;
}

namespace {

struct Centered {
  std::vector<std::vector<double>> dpPow, dqPow;  // [power][particle]
  double q = 0, p = 0;

  Centered(const ParticleEnsemble& ens, int maxOrder) {
    const auto n = static_cast<Eigen::Index>(ens.size());
    q = ens.particles.col(0).mean();
    p = ens.particles.col(1).mean();
    dpPow.assign(static_cast<std::size_t>(maxOrder + 1), std::vector<double>(ens.size(), 1.0));
    dqPow = dpPow;
    for (int k = 1; k <= maxOrder; ++k)
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        dpPow[k][u] = dpPow[k - 1][u] * (ens.particles(i, 1) - p);
        dqPow[k][u] = dqPow[k - 1][u] * (ens.particles(i, 0) - q);
      }
  }
};

}  // namespace

MomentState sampleMoments(const ParticleEnsemble& ens, int maxOrder, double t) {
  if (maxOrder < 2) throw std::invalid_argument("maxOrder must be at least 2");
  if (ens.size() == 0) throw std::invalid_argument("ensemble must be nonempty");
  Centered c(ens, maxOrder);
  MomentState s;
  s.kind = Kind::Classical;
  s.t = t;
  s.q = c.q;
  s.p = c.p;
  const double n = static_cast<double>(ens.size());
  for (const auto& key : momentsUpTo(maxOrder, Kind::Classical)) {
    double sum = 0;
    for (std::size_t i = 0; i < ens.size(); ++i) sum += c.dpPow[key.a][i] * c.dqPow[key.b][i];
    s.moments[key] = sum / n;
  }
  return s;
}

std::map<MomentKey, double> sampleStandardErrors(const ParticleEnsemble& ens, int maxOrder) {
  Centered c(ens, maxOrder);
  const double n = static_cast<double>(ens.size());
  std::map<MomentKey, double> out;
  for (const auto& key : momentsUpTo(maxOrder, Kind::Classical)) {
    double sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      const double x = c.dpPow[key.a][i] * c.dqPow[key.b][i];
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = n > 1 ? std::max(sum2 / n - mean * mean, 0.0) * n / (n - 1) : 0.0;
    out[key] = std::sqrt(var / n);
  }
  return out;
}

void writeCsv(std::ostream& out, const std::vector<MomentState>& trajectory, const std::vector<MomentKey>& keys,
              std::string_view prefix) {
  out << "t,q,p";
  for (const auto& k : keys) out << "," << prefix << "[" << k.a << "," << k.b << "]";
  out << "\n";
  for (const auto& s : trajectory) {
    out << fmt::format("{:.17g},{:.17g},{:.17g}", s.t, s.q, s.p);
    for (const auto& k : keys) out << fmt::format(",{:.17g}", s.moment(k.a, k.b));
    out << "\n";
  }
}

MomentState parseState(std::string_view text, Kind kind) {
  MomentState s;
  s.kind = kind;
  std::string buf(text);
  for (char& ch : buf)
    if (ch == '\n' || ch == ';') ch = ' ';
  // Commas inside G[a,b] must survive, so split on whitespace and top-level commas.
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char ch : buf) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if ((ch == ',' && depth == 0) || ch == ' ') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
      continue;
    }
    cur += ch;
  }
  if (!cur.empty()) items.push_back(cur);
  // Rejoin "name" "=" "value" fragments produced by spaces around '='.
  std::vector<std::string> joined;
  for (const auto& it : items) {
    if (!joined.empty() && (it.front() == '=' || joined.back().back() == '='))
      joined.back() += it;
    else
      joined.push_back(it);
  }
  for (const auto& item : joined) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw ParseError(0, "expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(eq + 1, "bad number in '" + item + "'");
    }
    if (name == "q") s.q = value;
    else if (name == "p") s.p = value;
    else if (name == "t") s.t = value;
    else if (name == "hbar") s.hbar = value;
    else if (name.size() > 3 && (name[0] == 'G' || name[0] == 'C' || name[0] == 'M') && name[1] == '[') {
      int a = 0, b = 0;
      char close = 0;
      std::istringstream in(name.substr(2));
      char comma = 0;
      if (!(in >> a >> comma >> b >> close) || comma != ',' || close != ']' || a < 0 || b < 0)
        throw ParseError(0, "bad moment name '" + name + "'");
      if (a + b >= 2) s.moments[{a, b, kind}] = value;
    } else {
      throw ParseError(0, "unknown state variable '" + name + "'");
    }
  }
  return s;
}

}  // namespace moments
