#include "moments/inequalities.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

namespace moments {

std::string_view to_string(IneqClass c) {
  switch (c) {
    case IneqClass::Uncertainty: return "uncertainty";
    case IneqClass::Ordinary: return "ordinary";
    case IneqClass::Equality: return "equality";
  }
  return "?";
}

Inequality canonicalInequality(const MomentPoly& slack, std::string provenance, Kind kind) {
  Inequality x;
  x.provenance = std::move(provenance);
  x.kind = kind;
  for (const auto& [m, c] : slack.terms()) {
    const bool centroidFree = m.q == 0 && m.p == 0 && m.energy == 0;
    const bool constant = centroidFree && !m.hasMoments();
    const bool square = centroidFree && m.hbar == 0 && m.keys.size() == 2 && m.keys[0] == m.keys[1];
    if (constant || (square && c < 0)) x.lhs.addTerm(m, -c);
  }
  x.rhs = slack + x.lhs;
  return x;
}

std::string to_string(const Inequality& x, std::optional<IneqClass> cls) {
  std::string s = to_string(x.lhs) + " <= " + to_string(x.rhs) + " ; provenance=" + x.provenance;
  if (cls) s += " ; class=" + std::string(to_string(*cls));
  return s;
}

namespace {

Integer binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

// Expectation of (Q+P)^n when all orderings are symmetric.
MomentPoly symmetricSum(int n, Kind kind) {
  MomentPoly s;
  for (int k = 0; k <= n; ++k) s += Rational(binomial(n, k)) * MomentPoly::moment(k, n - k, kind);
  return s;
}

std::string tuple(std::initializer_list<int> xs) {
  std::string s;
  for (int x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

}  // namespace

Inequality classicalIneqTypeI(int a, int b, int c, int d) {
  if (a < 0 || b < 0 || c < 0 || d < 0) throw std::invalid_argument("negative index");
  auto C = [](int i, int j) { return MomentPoly::moment(i, j, Kind::Classical); };
  MomentPoly slack = C(2 * a, 2 * b) * C(2 * c, 2 * d) - pow(C(a + c, b + d), 2);
  return canonicalInequality(slack, "typeI:" + tuple({a, b, c, d}), Kind::Classical);
}

Inequality classicalIneqTypeII(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("negative index");
  if (a == b) throw DegenerateEqualityError("a == b reduces to an equality");
  MomentPoly slack =
      symmetricSum(2 * a, Kind::Classical) * symmetricSum(2 * b, Kind::Classical) -
      pow(symmetricSum(a + b, Kind::Classical), 2);
  return canonicalInequality(slack, "typeII:" + tuple({a, b}), Kind::Classical);
}

Inequality quantumIneqFromOperators(const OperatorSum& f, const OperatorSum& g, std::string provenance) {
  const RealImagPair fg = expectationOfProduct(f, g);
  const MomentPoly ff = expectationOfProduct(f, f).re;
  const MomentPoly gg = expectationOfProduct(g, g).re;
  MomentPoly slack = ff * gg - fg.re * fg.re - fg.im * fg.im;
  return canonicalInequality(slack, std::move(provenance), Kind::Quantum);
}

Inequality quantumIneqFromWords(const OperatorWord& f, const OperatorWord& g) {
  return quantumIneqFromOperators(OperatorSum(f), OperatorSum(g), "f:" + f.letters() + ",g:" + g.letters());
}

Inequality quantumIneqSymmetricChoice(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("negative index");
  if (a == b) throw DegenerateEqualityError("a == b reduces to an equality");
  const OperatorSum base = OperatorSum(OperatorWord("Q")) + OperatorSum(OperatorWord("P"));
  auto power = [&](int n) {
    OperatorSum r(OperatorWord{});
    for (int i = 0; i < n; ++i) r = r * base;
    return r;
  };
  return quantumIneqFromOperators(power(a), power(b), "symmetric:" + tuple({a, b}));
}

std::vector<Inequality> positivityRelations(Kind kind, int maxSum) {
  std::vector<Inequality> out;
  for (int s = 1; s <= maxSum; ++s)
    for (int n = s; n >= 0; --n)
      out.push_back(canonicalInequality(MomentPoly::moment(2 * n, 2 * (s - n), kind),
                                        "positivity:" + tuple({2 * n, 2 * (s - n)}), kind));
  return out;
}

bool obeysGrading(const Inequality& x, int orderF, int orderG) {
  const MomentPoly s = x.slack();
  for (const auto& [m, c] : s.terms())
    if (2 * m.hbar + m.momentOrder() != 2 * (orderF + orderG)) return false;
  return true;
}

IneqClass classifyUncertainty(const Inequality& x) {
  const MomentPoly s = x.slack();
  if (s.isZero()) return IneqClass::Equality;
  Rational constant = 0;
  for (const auto& [m, c] : s.terms())
    if (!m.hasMoments() && m.q == 0 && m.p == 0) constant += c;
  return constant < 0 ? IneqClass::Uncertainty : IneqClass::Ordinary;
}

const Inequality* Catalog::findBySlack(const MomentPoly& slack) const {
  auto it = index_.find(slack);
  return it == index_.end() ? nullptr : &items[it->second];
}

std::vector<const Inequality*> Catalog::upToOrder(int maxMomentOrder) const {
  std::vector<const Inequality*> out;
  for (const auto& x : items)
    if (std::max(x.lhs.maxMomentOrder(), x.rhs.maxMomentOrder()) <= maxMomentOrder) out.push_back(&x);
  return out;
}

void Catalog::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < items.size(); ++i) index_.emplace(items[i].slack(), i);
}

namespace {

template <typename F>
void parallelFor(std::size_t n, unsigned threads, const F& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace

Catalog enumerateCatalog(int maxOrderPerSide, unsigned threads) {
  if (maxOrderPerSide < 1) throw std::invalid_argument("maxOrderPerSide must be at least 1");
  std::vector<OperatorWord> words;
  for (int n = 1; n <= maxOrderPerSide; ++n)
    for (auto& w : allWords(n)) words.push_back(std::move(w));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i; j < words.size(); ++j) pairs.emplace_back(i, j);

  struct Result {
    MomentPoly slack;
    MomentPoly rawLhs;
    MomentPoly rawRhs;
  };
  std::vector<Result> results(pairs.size());
  parallelFor(pairs.size(), threads, [&](std::size_t k) {
    const auto& f = words[pairs[k].first];
    const auto& g = words[pairs[k].second];
    const RealImagPair fg = expectationOfProduct(f, g);
    Result& r = results[k];
    r.rawLhs = fg.re * fg.re + fg.im * fg.im;
    r.rawRhs = expectationOfProduct(f, f).re * expectationOfProduct(g, g).re;
    r.slack = r.rawRhs - r.rawLhs;
  });

  Catalog cat;
  cat.kind = Kind::Quantum;
  cat.maxOrderPerSide = maxOrderPerSide;
  cat.stats.words = words.size();
  cat.stats.pairs = pairs.size();
  std::set<std::pair<MomentPoly, MomentPoly>> raw;
  std::map<MomentPoly, std::size_t> seen;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    Result& r = results[k];
    if (r.slack.isZero()) {
      ++cat.stats.equalities;
      continue;
    }
    raw.emplace(r.rawLhs, r.rawRhs);
    if (seen.count(r.slack)) continue;
    seen.emplace(r.slack, cat.items.size());
    const auto& f = words[pairs[k].first];
    const auto& g = words[pairs[k].second];
    cat.items.push_back(canonicalInequality(r.slack, "f:" + f.letters() + ",g:" + g.letters(), Kind::Quantum));
    cat.classes.push_back(classifyUncertainty(cat.items.back()));
  }
  cat.stats.distinct = cat.items.size();
  cat.stats.distinctRaw = raw.size();
  cat.stats.uncertainty = static_cast<std::size_t>(
      std::count(cat.classes.begin(), cat.classes.end(), IneqClass::Uncertainty));
  cat.reindex();
  return cat;
}

Catalog classicalCatalog(const Catalog& quantum) {
  Catalog cat;
  cat.kind = Kind::Classical;
  cat.maxOrderPerSide = quantum.maxOrderPerSide;
  std::map<MomentPoly, std::size_t> seen;
  auto add = [&](const MomentPoly& slack, const std::string& provenance) {
    if (slack.isZero()) {
      ++cat.stats.equalities;
      return;
    }
    if (seen.count(slack)) return;
    seen.emplace(slack, cat.items.size());
    cat.items.push_back(canonicalInequality(slack, provenance, Kind::Classical));
    cat.classes.push_back(classifyUncertainty(cat.items.back()));
  };
  for (const auto& x : quantum.items)
    add(relabel(classicalLimit(x.slack()), Kind::Classical), "classical-limit:" + x.provenance);
  const int K = quantum.maxOrderPerSide;
  for (int n1 = 0; n1 <= K; ++n1)
    for (int a = n1; a >= 0; --a)
      for (int n2 = std::max(n1, 1); n2 <= K; ++n2)
        for (int c = n2; c >= 0; --c) {
          const Inequality x = classicalIneqTypeI(a, n1 - a, c, n2 - c);
          add(x.slack(), x.provenance);
        }
  for (int a = 0; a <= K; ++a)
    for (int b = a + 1; b <= K; ++b) {
      const Inequality x = classicalIneqTypeII(a, b);
      add(x.slack(), x.provenance);
    }
  cat.stats.distinct = cat.items.size();
  cat.stats.distinctRaw = cat.items.size();
  cat.stats.uncertainty = 0;
  cat.reindex();
  return cat;
}

namespace {

bool pureEven(const MomentKey& k) { return (k.a == 0 && k.b % 2 == 0) || (k.b == 0 && k.a % 2 == 0); }

MomentPoly keepPure(const MomentPoly& x) {
  return mapMoments(x, [](const MomentKey& k) -> std::optional<MomentPoly> {
    if (pureEven(k)) return std::nullopt;
    return MomentPoly(0);
  });
}

}  // namespace

PurePairResult reduceToPurePair(const Catalog& catalog, int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (catalog.kind != Kind::Quantum) throw KindMismatchError("reduceToPurePair needs a quantum catalog");
  if (catalog.maxOrderPerSide < n)
    throw CoverageError("catalog of order " + std::to_string(catalog.maxOrderPerSide) + " cannot bound G[0," +
                        std::to_string(2 * n) + "]G[" + std::to_string(2 * n) + ",0]");
  const MomentKey pos{0, 2 * n, Kind::Quantum}, mom{2 * n, 0, Kind::Quantum};
  PurePairResult best;
  best.n = n;
  bool any = false;
  for (std::size_t i = 0; i < catalog.items.size(); ++i) {
    if (catalog.classes[i] != IneqClass::Uncertainty) continue;
    const MomentPoly r = keepPure(catalog.items[i].slack());
    if (r.size() != 2) continue;
    const auto& [m0, c0] = *r.terms().begin();
    const auto& [m1, c1] = *std::next(r.terms().begin());
    if (m0.hasMoments() || c0 >= 0 || c1 <= 0) continue;
    if (m1.keys != std::vector<MomentKey>{mom, pos}) continue;
    if (m0.hbar - m1.hbar != 2 * n) continue;
    const Rational gamma = -c0 / c1;
    if (!any || gamma > best.gamma) {
      best.gamma = gamma;
      best.sources.clear();
    }
    if (!any || gamma == best.gamma) best.sources.push_back(catalog.items[i].provenance);
    any = true;
  }
  if (!any) throw CoverageError("no uncertainty relation reduces to a bound on G[0," + std::to_string(2 * n) + "]G[" +
                                std::to_string(2 * n) + ",0]");
  MomentPoly slack = MomentPoly::moment(pos) * MomentPoly::moment(mom) - best.gamma * MomentPoly::hbar(2 * n);
  best.relation = canonicalInequality(slack, "reduced:n=" + std::to_string(n), Kind::Quantum);
  return best;
}

namespace {

std::string gMonomial(const std::map<int, int>& m) {
  std::string s;
  for (const auto& [a, e] : m) {
    if (!s.empty()) s += "*";
    s += "g" + std::to_string(a);
    if (e != 1) s += "^" + std::to_string(e);
  }
  return s;
}

std::string plainRational(const Rational& r) {
  return r.get_den() == 1 ? r.get_num().get_str() : r.get_num().get_str() + "/" + r.get_den().get_str();
}

}  // namespace

std::string to_string(const GConstraint& c) {
  std::string rhs = plainRational(c.ratio);
  if (!c.minus.empty()) rhs += "*" + gMonomial(c.minus);
  return (c.plus.empty() ? std::string("1") : gMonomial(c.plus)) + " >= " + rhs;
}

std::vector<GConstraint> equalUncertaintyConstraints(const Catalog& catalog, int maxMomentOrder) {
  if (catalog.kind != Kind::Quantum) throw KindMismatchError("equal-uncertainty reduction needs quantum moments");
  std::map<std::pair<std::map<int, int>, std::map<int, int>>, GConstraint> best;
  for (const Inequality* x : catalog.upToOrder(maxMomentOrder)) {
    MomentPoly r = mapMoments(x->slack(), [](const MomentKey& k) -> std::optional<MomentPoly> {
      if (k.b == 0 && k.a % 2 == 0) return std::nullopt;
      if (k.a == 0 && k.b % 2 == 0) return MomentPoly::moment(k.b, 0);
      return MomentPoly(0);
    });
    r = setHbar(r, 1);
    if (r.size() != 2) continue;
    std::pair<Monomial, Rational> t0 = *r.terms().begin();
    std::pair<Monomial, Rational> t1 = *std::next(r.terms().begin());
    if ((t0.second > 0) == (t1.second > 0)) continue;
    if (t0.second < 0) std::swap(t0, t1);
    auto exponents = [](const Monomial& m) {
      std::map<int, int> e;
      for (const auto& k : m.keys) ++e[k.a / 2];
      return e;
    };
    GConstraint c{exponents(t0.first), exponents(t1.first), Rational(-t1.second / t0.second), x->provenance};
    auto key = std::make_pair(c.plus, c.minus);
    auto it = best.find(key);
    if (it == best.end()) best.emplace(key, c);
    else if (c.ratio > it->second.ratio) it->second = c;
  }
  std::vector<GConstraint> out;
  for (auto& [k, c] : best) out.push_back(c);
  return out;
}

std::vector<std::string> familyNames() {
  return {"factorial", "order-factorial", "power0", "power1", "power2", "power3", "unit"};
}

namespace {

template <typename Scalar>
Scalar hbarScale(const Scalar& hbar, int order) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    if (order % 2 == 0) return detail::ipow(hbar, order / 2);
    if (hbar == 1) return Scalar(1);
    throw std::invalid_argument("exact families need hbar = 1 for odd orders");
  } else {
    using std::pow;
    return pow(hbar, Scalar(order) / Scalar(2));
  }
}

template <typename Scalar>
Scalar factorialOf(int n) {
  Scalar r(1);
  for (int i = 2; i <= n; ++i) r *= Scalar(i);
  return r;
}

// x^(x-k), read as 1 at x = 0.
template <typename Scalar>
Scalar selfPower(int x, int k) {
  if (x == 0) return Scalar(1);
  const int e = x - k;
  if (e >= 0) return detail::ipow(Scalar(x), e);
  return Scalar(Scalar(1) / detail::ipow(Scalar(x), -e));
}

}  // namespace

template <typename Scalar>
MomentFamily<Scalar> namedFamily(const std::string& name, const Scalar& hbar) {
  std::function<Scalar(int, int)> base;
  if (name == "factorial") base = [](int a, int b) -> Scalar { return factorialOf<Scalar>(a) * factorialOf<Scalar>(b); };
  else if (name == "order-factorial") base = [](int a, int b) -> Scalar { return factorialOf<Scalar>(a + b); };
  else if (name == "unit") base = [](int, int) -> Scalar { return Scalar(1); };
  else if (name.size() == 6 && name.rfind("power", 0) == 0 && name[5] >= '0' && name[5] <= '3') {
    const int k = name[5] - '0';
    base = [k](int a, int b) -> Scalar { return selfPower<Scalar>(a, k) * selfPower<Scalar>(b, k); };
  } else {
    throw InvalidFamilyError("unknown family '" + name + "'");
  }
  return {name, [base, hbar](int a, int b) -> Scalar { return base(a, b) * hbarScale(hbar, a + b); }};
}

template MomentFamily<double> namedFamily<double>(const std::string&, const double&);
template MomentFamily<Rational> namedFamily<Rational>(const std::string&, const Rational&);

bool AppendixReport::allFound() const {
  return std::all_of(entries.begin(), entries.end(), [](const AppendixEntry& e) { return e.found; });
}

namespace {

struct AppendixText {
  const char* label;
  const char* lhs;
  const char* rhs;
};

// Explicit uncertainty relations with squared G[2,2] and G[3,3] on the left.
const AppendixText kAppendix[] = {
    {"G22 #1", "1/4*hbar^4 + G[2,2]^2", "G[2,0]*G[2,4] + hbar^2*(3*G[0,2]*G[2,0] - G[2,2])"},
    {"G22 #2", "1/4*hbar^4 + G[2,2]^2", "G[2,0]*G[2,4] + hbar^2*(G[0,2]*G[2,0] + G[2,2] - 4*G[1,1]^2)"},
    {"G22 #3", "1/4*hbar^4 + G[2,2]^2", "G[0,4]*G[4,0] + hbar^2*(G[2,2] - 4*G[1,1]^2)"},
    {"G22 #4", "1/4*hbar^4 + G[2,2]^2", "G[0,2]*G[4,2] + hbar^2*(3*G[0,2]*G[2,0] - G[2,2])"},
    {"G22 #5", "1/4*hbar^4 + G[2,2]^2", "G[0,2]*G[4,2] + hbar^2*(G[0,2]*G[2,0] + G[2,2] - 4*G[1,1]^2)"},
    {"G33 #1", "9/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(3*G[0,2]*G[2,0] - 9/4*(G[1,1]^2 + G[2,2])) + "
     "hbar^2*(-9/4*G[2,2]^2 + 3*G[2,0]*G[2,4] - 3*G[1,1]*G[3,3] + G[0,2]*G[4,2])"},
    {"G33 #2", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-9/4*G[1,1]^2 + 3*G[0,2]*G[2,0] - 1/4*G[2,2]) + "
     "hbar^2*(-1/4*G[2,2]^2 + 3*G[2,0]*G[2,4] - 3*G[1,1]*G[3,3] + G[0,2]*G[4,2])"},
    {"G33 #3", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-1/4*G[1,1]^2 + G[0,2]*G[2,0] - 3/4*G[2,2]) + "
     "hbar^2*(-9/4*G[2,2]^2 + G[2,0]*G[2,4] - G[1,1]*G[3,3] + G[0,2]*G[4,2])"},
    {"G33 #4", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-1/4*G[1,1]^2 + G[0,2]*G[2,0] - 5/4*G[2,2]) + "
     "hbar^2*(-25/4*G[2,2]^2 + G[2,0]*G[2,4] + G[1,1]*G[3,3] + G[0,2]*G[4,2])"},
    {"G33 #5", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-25/4*G[1,1]^2 + G[0,2]*G[2,0] + 7/4*G[2,2]) + "
     "hbar^2*(-49/4*G[2,2]^2 + G[2,0]*G[2,4] + 5*G[1,1]*G[3,3] + G[0,2]*G[4,2])"},
    {"G33 #6", "9/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(3*G[0,2]*G[2,0] - 9/4*(G[1,1]^2 + G[2,2])) + "
     "hbar^2*(-9/4*G[2,2]^2 + G[2,0]*G[2,4] - 3*G[1,1]*G[3,3] + 3*G[0,2]*G[4,2])"},
    {"G33 #7", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-9/4*G[1,1]^2 + 3*G[0,2]*G[2,0] - 1/4*G[2,2]) + "
     "hbar^2*(-1/4*G[2,2]^2 + G[2,0]*G[2,4] - 3*G[1,1]*G[3,3] + 3*G[0,2]*G[4,2])"},
    {"G33 #8", "1/16*hbar^6 + G[3,3]^2",
     "G[2,4]*G[4,2] + hbar^4*(-9/4*G[1,1]^2 + 9*G[0,2]*G[2,0] - 1/4*G[2,2]) + "
     "hbar^2*(-1/4*G[2,2]^2 + 3*G[2,0]*G[2,4] - 3*G[1,1]*G[3,3] + 3*G[0,2]*G[4,2])"},
    {"G33 #9", "9/16*hbar^6 + G[3,3]^2",
     "G[0,6]*G[6,0] - 27/4*hbar^4*(3*G[1,1]^2 - G[2,2]) + hbar^2*(-81/4*G[2,2]^2 + 9*G[1,1]*G[3,3])"},
};

const AppendixText kSummed = {"G22 summed", "1/4*hbar^4 + G[2,2]^2",
                              "G[2,0]*G[2,4] + 2*hbar^2*(G[2,0]*G[0,2] - G[1,1]^2)"};

MomentPoly slackOf(const AppendixText& t) { return parseMomentPoly(t.rhs) - parseMomentPoly(t.lhs); }

}  // namespace

AppendixReport verifyAppendix(const Catalog& catalog) {
  AppendixReport report;
  for (const auto& t : kAppendix) {
    AppendixEntry e;
    e.label = t.label;
    const MomentPoly slack = slackOf(t);
    e.relation = canonicalInequality(slack, "appendix", Kind::Quantum);
    if (const Inequality* hit = catalog.findBySlack(slack)) {
      e.found = true;
      e.provenance = hit->provenance;
    } else {
      std::size_t bestTerms = SIZE_MAX;
      for (const auto& x : catalog.items) {
        const std::size_t d = (x.slack() - slack).size();
        if (d < bestTerms) {
          bestTerms = d;
          e.nearest = to_string(x) + " (" + std::to_string(d) + " differing terms)";
        }
      }
    }
    report.entries.push_back(std::move(e));
  }
  report.summedHolds = report.entries[0].found && report.entries[1].found &&
                       slackOf(kAppendix[0]) + slackOf(kAppendix[1]) == Rational(2) * slackOf(kSummed);
  return report;
}

}  // namespace moments
