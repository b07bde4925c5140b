#include "moments/eomgen.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "moments/brackets.hpp"

namespace moments {

namespace {

Rational inverseFactorials(int a, int b) {
  Integer fa, fb;
  mpz_fac_ui(fa.get_mpz_t(), static_cast<unsigned long>(a));
  mpz_fac_ui(fb.get_mpz_t(), static_cast<unsigned long>(b));
  return Rational(Integer(1), fa * fb);
}

}  // namespace

void HamiltonianSpec::add(int pPow, int qPow, const Rational& c) {
  if (pPow < 0 || qPow < 0) throw std::invalid_argument("negative power in Hamiltonian");
  if (c == 0) return;
  auto [it, inserted] = terms.try_emplace({pPow, qPow}, c);
  if (inserted) {
    it->second.canonicalize();
  } else {
    it->second += c;
    if (it->second == 0) terms.erase(it);
  }
}

HamiltonianSpec HamiltonianSpec::derivative(int dp, int dq) const {
  HamiltonianSpec r;
  for (const auto& [k, c] : terms) {
    auto [a, b] = k;
    if (a < dp || b < dq) continue;
    Rational f = c;
    for (int i = 0; i < dp; ++i) f *= a - i;
    for (int i = 0; i < dq; ++i) f *= b - i;
    r.add(a - dp, b - dq, f);
  }
  return r;
}

MomentPoly HamiltonianSpec::toPoly() const {
  MomentPoly r;
  for (const auto& [k, c] : terms) r += c * MomentPoly::p(k.first) * MomentPoly::q(k.second);
  return r;
}

int HamiltonianSpec::degree() const {
  int d = 0;
  for (const auto& [k, c] : terms) d = std::max(d, k.first + k.second);
  return d;
}

Rational HamiltonianSpec::coefficient(int pPow, int qPow) const {
  auto it = terms.find({pPow, qPow});
  return it == terms.end() ? Rational(0) : it->second;
}

namespace {

class HamiltonianParser {
 public:
  HamiltonianParser(std::string_view s, std::size_t offset) : s_(s), offset_(offset) {}

  void parseInto(HamiltonianSpec& h) {
    skip();
    if (pos_ == s_.size()) return;
    int sign = 1;
    if (peek() == '-' || peek() == '+') {
      sign = peek() == '-' ? -1 : 1;
      ++pos_;
    }
    term(h, sign);
    for (;;) {
      skip();
      if (pos_ == s_.size()) return;
      const char c = peek();
      if (c != '+' && c != '-') fail(std::string("unexpected '") + c + "'");
      ++pos_;
      term(h, c == '-' ? -1 : 1);
    }
  }

 private:
  char peek() const { return s_[pos_]; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool digit(std::size_t i) const { return i < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i])); }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(offset_ + pos_, what); }

  int exponent() {
    skip();
    if (!digit(pos_)) fail("expected integer exponent");
    int n = 0;
    while (digit(pos_)) n = n * 10 + (s_[pos_++] - '0');
    return n;
  }

  void term(HamiltonianSpec& h, int sign) {
    skip();
    Rational coeff = 1;
    bool any = false;
    if (pos_ < s_.size() && (digit(pos_) || peek() == '.')) {
      const std::size_t start = pos_;
      while (digit(pos_)) ++pos_;
      if (pos_ < s_.size() && peek() == '/' && digit(pos_ + 1)) {
        ++pos_;
        while (digit(pos_)) ++pos_;
      } else if (pos_ < s_.size() && peek() == '.') {
        ++pos_;
        while (digit(pos_)) ++pos_;
      }
      if (pos_ < s_.size() && (peek() == 'e' || peek() == 'E') &&
          (digit(pos_ + 1) || ((pos_ + 1 < s_.size() && (s_[pos_ + 1] == '-' || s_[pos_ + 1] == '+')) &&
                               digit(pos_ + 2)))) {
        pos_ += 2;
        while (digit(pos_)) ++pos_;
      }
      try {
        coeff = parseRational(s_.substr(start, pos_ - start));
      } catch (const ParseError& e) {
        throw ParseError(offset_ + start + e.position, "malformed coefficient");
      }
      any = true;
      skip();
      if (pos_ < s_.size() && peek() == '*') {
        ++pos_;
        skip();
        if (pos_ == s_.size() || (peek() != 'p' && peek() != 'q')) fail("expected p or q after '*'");
      }
    }
    int pp = 0, qq = 0;
    for (;;) {
      skip();
      if (pos_ == s_.size() || (peek() != 'p' && peek() != 'q')) break;
      const char v = s_[pos_++];
      int n = 1;
      skip();
      if (pos_ < s_.size() && peek() == '^') {
        ++pos_;
        n = exponent();
      }
      (v == 'p' ? pp : qq) += n;
      any = true;
      skip();
      if (pos_ < s_.size() && peek() == '*') {
        ++pos_;
        skip();
        if (pos_ == s_.size() || (peek() != 'p' && peek() != 'q')) fail("expected p or q after '*'");
      }
    }
    if (!any) fail(pos_ == s_.size() ? "expected a term" : std::string("unexpected '") + peek() + "'");
    h.add(pp, qq, sign < 0 ? Rational(-coeff) : coeff);
  }

  std::string_view s_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

}  // namespace

HamiltonianSpec parseHamiltonian(std::string_view text) {
  HamiltonianSpec h;
  std::size_t offset = 0;
  while (offset <= text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    HamiltonianParser(line, offset).parseInto(h);
    offset = end + 1;
  }
  return h;
}

std::string to_string(const HamiltonianSpec& h) {
  if (h.isZero()) return "0";
  std::string out;
  for (auto it = h.terms.rbegin(); it != h.terms.rend(); ++it) {
    const auto& [k, c] = *it;
    if (!out.empty()) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    out += to_string(Rational(abs(c)));
    if (k.first) out += "*p" + (k.first > 1 ? "^" + std::to_string(k.first) : std::string());
    if (k.second) out += "*q" + (k.second > 1 ? "^" + std::to_string(k.second) : std::string());
  }
  return out;
}

MomentPoly effectiveHamiltonian(const HamiltonianSpec& h, Kind kind, int maxOrder) {
  MomentPoly r = h.toPoly();
  for (int n = 2; n <= maxOrder; ++n) {
    for (int a = n; a >= 0; --a) {
      const int b = n - a;
      HamiltonianSpec d = h.derivative(a, b);
      if (d.isZero()) continue;
      r += inverseFactorials(a, b) * d.toPoly() * MomentPoly::moment(a, b, kind);
    }
  }
  return r;
}

Route parseRoute(std::string_view text) {
  if (text == "1") return Route::TruncateFirst;
  if (text == "2") return Route::Full;
  throw std::invalid_argument("route must be 1 or 2, got '" + std::string(text) + "'");
}

std::vector<MomentKey> momentsUpTo(int order, Kind kind) {
  std::vector<MomentKey> keys;
  for (int n = 2; n <= order; ++n)
    for (int a = n; a >= 0; --a) keys.push_back({a, n - a, kind});
  return keys;
}

std::vector<Variable> EomSystem::variables() const {
  std::vector<Variable> vs;
  vs.reserve(rhs.size());
  for (const auto& [v, e] : rhs) vs.push_back(v);
  return vs;
}

const MomentPoly& EomSystem::at(const Variable& v) const {
  auto it = rhs.find(v);
  if (it == rhs.end()) throw std::out_of_range("no equation for " + to_string(v));
  return it->second;
}

namespace {

void requireOrder(int order) {
  if (order < 2) throw std::invalid_argument("truncation order must be at least 2");
}

}  // namespace

EomSystem deriveEom(const HamiltonianSpec& h, Kind kind, int order, Route route) {
  requireOrder(order);
  EomSystem sys{kind, order, route, {}};
  const MomentPoly H = effectiveHamiltonian(h, kind, route == Route::Full ? 2 * order : order);
  sys.rhs[Variable::q()] = truncate(poissonBracket(MomentPoly::q(), H), order);
  sys.rhs[Variable::p()] = truncate(poissonBracket(MomentPoly::p(), H), order);
  for (const auto& k : momentsUpTo(order, kind))
    sys.rhs[Variable::moment(k)] = truncate(poissonBracket(MomentPoly::moment(k), H), order);
  return sys;
}

EomSystem harmonicEom(const HamiltonianSpec& h, Kind kind, int order) {
  requireOrder(order);
  if (!h.isHarmonic()) throw NotHarmonicError("Hamiltonian has degree " + std::to_string(h.degree()));
  const Rational Hpp = h.coefficient(2, 0) * 2;
  const Rational Hpq = h.coefficient(1, 1);
  const Rational Hqq = h.coefficient(0, 2) * 2;
  EomSystem sys{kind, order, Route::TruncateFirst, {}};
  sys.rhs[Variable::q()] = h.derivative(1, 0).toPoly();
  sys.rhs[Variable::p()] = -h.derivative(0, 1).toPoly();
  auto M = [kind](int a, int b) { return MomentPoly::moment(a, b, kind); };
  for (const auto& k : momentsUpTo(order, kind)) {
    const int a = k.a, b = k.b;
    sys.rhs[Variable::moment(k)] =
        Rational(b) * Hpp * M(a + 1, b - 1) + Rational(b - a) * Hpq * M(a, b) - Rational(a) * Hqq * M(a - 1, b + 1);
  }
  return sys;
}

LinearSplit splitLinear(const HamiltonianSpec& h) {
  LinearSplit s;
  for (const auto& [k, c] : h.terms) {
    if (k.second >= 2) throw NotLinearError("Hamiltonian is not linear in q");
    (k.second == 1 ? s.phi : s.xi).add(k.first, 0, c);
  }
  return s;
}

LinearSubsystem linearEomSubsystem(const HamiltonianSpec& phi, const HamiltonianSpec& xi, int maxA, int maxB,
                                   Kind kind) {
  for (const auto* f : {&phi, &xi})
    for (const auto& [k, c] : f->terms)
      if (k.second != 0) throw NotLinearError("phi and xi must depend on p only");
  if (maxB < 1) throw std::invalid_argument("linear subsystem needs maxB >= 1");
  if (maxA < 1) throw std::invalid_argument("linear subsystem needs maxA >= 1");

  HamiltonianSpec h = xi;
  for (const auto& [k, c] : phi.terms) h.add(k.first, 1, c);
  const int degree = std::max(phi.degree(), xi.degree());

  auto M = [kind](int a, int b) { return MomentPoly::moment(a, b, kind); };
  // phi^{(n)}(p) / n! and [q phi^{(n+1)} + xi^{(n+1)}] / n! as polynomials in q, p.
  auto phiTerm = [&](int n) { return inverseFactorials(n, 0) * phi.derivative(n, 0).toPoly(); };
  auto mixedTerm = [&](int n) {
    return inverseFactorials(n, 0) *
           (MomentPoly::q() * phi.derivative(n + 1, 0).toPoly() + xi.derivative(n + 1, 0).toPoly());
  };

  LinearSubsystem out;
  EomSystem& sys = out.system;
  sys.kind = kind;
  sys.order = maxA + maxB;
  sys.route = Route::Full;

  // dq/dt = dH_Q/dp, dp/dt = -phi - sum_{n>=2} phi^{(n)}/n! G[n,0].
  const MomentPoly HQ = effectiveHamiltonian(h, kind, degree);
  sys.rhs[Variable::q()] = derivative(HQ, Variable::p());
  MomentPoly dp = -phi.toPoly();
  for (int n = 2; n <= degree; ++n) dp -= phiTerm(n) * M(n, 0);
  sys.rhs[Variable::p()] = dp;

  for (int a = 2; a <= maxA; ++a) {
    MomentPoly r;
    for (int n = 1; n <= degree; ++n) r += Rational(a) * phiTerm(n) * (M(a - 1, 0) * M(n, 0) - M(a + n - 1, 0));
    sys.rhs[Variable::moment({a, 0, kind})] = r;
  }
  for (int b = 1; b <= maxA; ++b) {
    MomentPoly r;
    for (int n = 1; n <= degree; ++n) {
      r += mixedTerm(n) * (M(b + n, 0) - M(b, 0) * M(n, 0));
      r += phiTerm(n) * (Rational(b) * M(b - 1, 1) * M(n, 0) - Rational(n) * M(b, 0) * M(n - 1, 1) +
                         Rational(n - b) * M(b + n - 1, 1));
    }
    sys.rhs[Variable::moment({b, 1, kind})] = r;
  }
  for (int b = 2; b <= maxB; ++b)
    for (int a = 0; a <= maxA; ++a)
      if (a + b >= 2) sys.rhs[Variable::moment({a, b, kind})] = poissonBracket(M(a, b), HQ);

  std::set<MomentKey> ext;
  for (const auto& [v, e] : sys.rhs)
    for (const auto& u : variables(e))
      if (u.isMoment() && !sys.rhs.count(u)) ext.insert(u.key);
  out.external.assign(ext.begin(), ext.end());
  return out;
}

MomentPoly heisenbergDrift(const HamiltonianSpec& h, int order, Kind kind) {
  auto M = [kind](int a, int b) { return MomentPoly::moment(a, b, kind); };
  MomentPoly r;
  for (int n = 3; n <= h.degree(); ++n) {
    for (int a = n; a >= 0; --a) {
      const int b = n - a;
      HamiltonianSpec d = h.derivative(a, b);
      if (d.isZero()) continue;
      MomentPoly bracketed = Rational(a) * M(2, 0) * M(a - 1, b + 1) - Rational(b) * M(0, 2) * M(a + 1, b - 1) +
                             Rational(b - a) * M(1, 1) * M(a, b);
      r += Rational(2) * inverseFactorials(a, b) * d.toPoly() * bracketed;
    }
  }
  return truncate(r, order);
}

MomentPoly timeDerivative(const MomentPoly& f, const EomSystem& sys) {
  MomentPoly r;
  for (const auto& v : variables(f)) r += derivative(f, v) * sys.at(v);
  return r;
}

std::string serialize(const EomSystem& sys) {
  std::ostringstream out;
  out << "# kind=" << to_string(sys.kind) << " order=" << sys.order << " route=" << static_cast<int>(sys.route)
      << "\n";
  for (const auto& [v, e] : sys.rhs) out << "d" << to_string(v) << "/dt = " << to_string(e) << "\n";
  return out.str();
}

EomSystem parseEomSystem(std::string_view text) {
  EomSystem sys;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  bool header = false;
  while (std::getline(in, line)) {
    const std::size_t lineStart = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string f;
      while (fields >> f) {
        auto eq = f.find('=');
        if (eq == std::string::npos) continue;
        std::string key = f.substr(0, eq), value = f.substr(eq + 1);
        if (key == "kind") sys.kind = parseKind(value), header = true;
        else if (key == "order") sys.order = std::stoi(value);
        else if (key == "route") sys.route = parseRoute(value);
      }
      continue;
    }
    const auto slash = line.find("/dt = ");
    if (line[0] != 'd' || slash == std::string::npos) throw ParseError(lineStart, "expected 'dX/dt = ...'");
    MomentPoly target = parseMomentPoly(line.substr(1, slash - 1));
    const auto vs = variables(target);
    if (vs.size() != 1 || !(target == MomentPoly::variable(vs[0])))
      throw ParseError(lineStart + 1, "left side must be a single variable");
    try {
      sys.rhs[vs[0]] = parseMomentPoly(line.substr(slash + 6));
    } catch (const ParseError& e) {
      throw ParseError(lineStart + slash + 6 + e.position, "in right-hand side");
    }
  }
  if (!header) throw ParseError(0, "missing '# kind=...' header");
  return sys;
}

}  // namespace moments
