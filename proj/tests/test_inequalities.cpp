#include <doctest.h>

#include "moments/inequalities.hpp"
#include "oracle.hpp"

using namespace moments;

namespace {

MomentPoly G(int a, int b) { return MomentPoly::moment(a, b); }
MomentPoly C(int a, int b) { return MomentPoly::moment(a, b, Kind::Classical); }
const MomentPoly hb = MomentPoly::hbar();

const Catalog& catalog5() {
  static const Catalog cat = enumerateCatalog(5);
  return cat;
}

Inequality words(const char* f, const char* g) { return quantumIneqFromWords(OperatorWord(f), OperatorWord(g)); }

// Sets every moment to zero.
MomentPoly atOrigin(const MomentPoly& x) {
  return mapMoments(x, [](const MomentKey&) -> std::optional<MomentPoly> { return MomentPoly(); });
}

}  // namespace

TEST_CASE("classical type I") {
  const auto x = classicalIneqTypeI(1, 0, 0, 1);
  CHECK(x.slack() == C(2, 0) * C(0, 2) - C(1, 1) * C(1, 1));
  CHECK(classicalIneqTypeI(1, 0, 0, 2).slack() == C(2, 0) * C(0, 4) - pow(C(1, 2), 2));
  CHECK(classicalIneqTypeI(1, 1, 0, 1).slack() == C(2, 2) * C(0, 2) - pow(C(1, 2), 2));
  CHECK(classicalIneqTypeI(0, 0, 1, 2).slack() == C(2, 4) - pow(C(1, 2), 2));
  CHECK(classicalIneqTypeI(0, 0, 2, 1).slack() == C(4, 2) - pow(C(2, 1), 2));
  CHECK(x.kind == Kind::Classical);
}

TEST_CASE("classical type II") {
  CHECK(classicalIneqTypeII(1, 0).slack() == C(0, 2) + Rational(2) * C(1, 1) + C(2, 0));
  const MomentPoly s2 = C(0, 2) + Rational(2) * C(1, 1) + C(2, 0);
  MomentPoly r;
  for (int j = 0; j <= 4; ++j) r += oracle::binom(4, j) * C(j, 4 - j);
  CHECK(classicalIneqTypeII(2, 0).slack() == r - s2 * s2);
  CHECK_THROWS_AS(classicalIneqTypeII(1, 1), DegenerateEqualityError);
}

TEST_CASE("quantum inequalities from words") {
  const auto heis = words("P", "Q");
  CHECK(heis.lhs == Rational(1, 4) * hb * hb + G(1, 1) * G(1, 1));
  CHECK(heis.rhs == G(2, 0) * G(0, 2));
  CHECK(classifyUncertainty(heis) == IneqClass::Uncertainty);
  CHECK(to_string(heis, IneqClass::Uncertainty) ==
        "1/4*hbar^2 + 1/1*G[1,1]^2 <= 1/1*G[2,0]*G[0,2] ; provenance=f:P,g:Q ; class=uncertainty");

  for (int a = 1; a <= 3; ++a)
    for (int d = 1; d <= 3; ++d) {
      const auto x = words(std::string(a, 'P').c_str(), std::string(d, 'P').c_str());
      CHECK(x.slack() == G(2 * a, 0) * G(2 * d, 0) - pow(G(a + d, 0), 2));
      CHECK_FALSE(x.slack().hasHbar());
      if (a != d) CHECK(classifyUncertainty(x) == IneqClass::Ordinary);
    }

  CHECK(words("", "PQQ").slack() == G(2, 4) + hb * hb * G(0, 2) - pow(G(1, 2), 2));
  CHECK(words("Q", "PQ").slack() == G(0, 2) * G(2, 2) + Rational(1, 2) * hb * hb * G(0, 2) - pow(G(1, 2), 2));
  CHECK(words("P", "QQ").slack() == G(0, 4) * G(2, 0) - pow(G(1, 2), 2));
}

TEST_CASE("self pairs are equalities") {
  oracle::Gen gen(53);
  for (int i = 0; i < 40; ++i) {
    const std::string w = gen.word(1, 5);
    const auto x = words(w.c_str(), w.c_str());
    CHECK(x.slack().isZero());
    CHECK(classifyUncertainty(x) == IneqClass::Equality);
  }
}

TEST_CASE("symmetric choice") {
  CHECK(quantumIneqSymmetricChoice(0, 1).slack() == G(0, 2) + Rational(2) * G(1, 1) + G(2, 0));
  const auto x = quantumIneqSymmetricChoice(0, 2);
  CHECK_FALSE(x.slack().hasHbar());
  CHECK(relabel(x.slack(), Kind::Classical) == classicalIneqTypeII(0, 2).slack());
  CHECK_THROWS_AS(quantumIneqSymmetricChoice(1, 1), DegenerateEqualityError);
}

TEST_CASE("positivity relations") {
  const auto rel = positivityRelations(Kind::Quantum, 5);
  std::size_t expected = 0;
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; n + m <= 5; ++m)
      if (n + m >= 1) ++expected;
  CHECK(rel.size() == expected);
  for (const auto& x : rel) {
    CHECK(x.lhs.isZero());
    REQUIRE(x.rhs.size() == 1);
    for (const auto& k : x.rhs.terms().begin()->first.keys) {
      CHECK(k.a % 2 == 0);
      CHECK(k.b % 2 == 0);
    }
  }
}

TEST_CASE("small catalogs") {
  const auto c1 = enumerateCatalog(1);
  CHECK(c1.stats.words == 2);
  REQUIRE(c1.items.size() == 1);
  CHECK(c1.items[0].slack() == words("P", "Q").slack());
  CHECK(c1.classes[0] == IneqClass::Uncertainty);
  const auto a = enumerateCatalog(3, 1), b = enumerateCatalog(3, 0);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) CHECK(to_string(a.items[i]) == to_string(b.items[i]));
}

TEST_CASE("catalog structure at fifth order") {
  const Catalog& cat = catalog5();
  CHECK(cat.stats.words == 62);
  CHECK(cat.stats.pairs == 1953);
  CHECK(cat.stats.uncertainty == 160);
  CHECK(cat.items.size() == cat.stats.distinct);
  CHECK(cat.findBySlack(words("P", "Q").slack()) != nullptr);
  std::size_t unc = 0;
  for (std::size_t i = 0; i < cat.items.size(); ++i) {
    const auto& x = cat.items[i];
    CHECK(cat.classes[i] == classifyUncertainty(x));
    if (cat.classes[i] == IneqClass::Uncertainty) ++unc;
    CHECK(x.lhs.isReal());
    CHECK(x.rhs.isReal());
    // Provenance f:<word>,g:<word> fixes the grading.
    const auto& prov = x.provenance;
    const auto comma = prov.find(",g:");
    REQUIRE(comma != std::string::npos);
    const int lf = static_cast<int>(comma - 2), lg = static_cast<int>(prov.size() - comma - 3);
    CHECK(obeysGrading(x, lf, lg));
  }
  CHECK(unc == 160);
}

TEST_CASE("classical limit of the catalog") {
  const Catalog& cat = catalog5();
  const Catalog cl = classicalCatalog(cat);
  CHECK(cl.kind == Kind::Classical);
  for (const auto& x : cl.items) {
    CHECK_FALSE(x.slack().hasHbar());
    // A delta distribution satisfies every classical relation.
    const MomentPoly s = atOrigin(x.slack());
    CHECK((s.isZero() || s.coefficient(Monomial{}) >= 0));
  }
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int c = 0; c <= 2; ++c)
        for (int d = 0; d <= 2; ++d) {
          const auto x = classicalIneqTypeI(a, b, c, d);
          if (x.slack().isZero()) continue;
          CHECK(cl.findBySlack(x.slack()) != nullptr);
        }
  // Word relations at hbar = 0 are classical type I relations.
  for (const auto& w : {std::pair{"P", "Q"}, std::pair{"PQ", "QQ"}, std::pair{"PPQ", "Q"}}) {
    const auto x = words(w.first, w.second);
    const OperatorWord f(w.first), g(w.second);
    const auto t = classicalIneqTypeI(f.countP(), f.countQ(), g.countP(), g.countQ());
    CHECK(relabel(classicalLimit(x.slack()), Kind::Classical) == t.slack());
  }
}

TEST_CASE("gamma constants") {
  const Catalog& cat = catalog5();
  const Rational expected[] = {Rational(1, 4), Rational(3, 8), Rational(81, 64), Rational(9, 4), Rational(225, 16)};
  for (int n = 1; n <= 5; ++n) {
    const auto r = reduceToPurePair(cat, n);
    CHECK(r.gamma == expected[n - 1]);
    CHECK(r.relation.slack() == G(0, 2 * n) * G(2 * n, 0) - expected[n - 1] * pow(hb, 2 * n));
    CHECK_FALSE(r.sources.empty());
  }
  CHECK_THROWS_AS(reduceToPurePair(enumerateCatalog(1), 3), CoverageError);
}

TEST_CASE("equal-uncertainty constraints") {
  const auto cs = equalUncertaintyConstraints(catalog5(), 8);
  std::vector<std::string> text;
  for (const auto& c : cs) text.push_back(to_string(c));
  auto has = [&](const std::string& s) { return std::find(text.begin(), text.end(), s) != text.end(); };
  CHECK(has("g1^2 >= 1/4"));
  CHECK(has("g2 >= 6*g1^2"));
  CHECK(has("g1*g3 >= 9/4*g2^2"));
  CHECK(has("g2*g4 >= 25/14*g3^2"));
}

TEST_CASE("appendix relations") {
  const auto rep = verifyAppendix(catalog5());
  CHECK(rep.entries.size() == 14);
  for (const auto& e : rep.entries) {
    INFO(e.label, " nearest: ", e.nearest);
    CHECK(e.found);
  }
  CHECK(rep.allFound());
  CHECK(rep.summedHolds);
}

TEST_CASE("moment families") {
  const Catalog& cat = catalog5();
  const auto ineqs = cat.upToOrder(8);
  const auto cl = classicalCatalog(cat);
  const auto clIneqs = cl.upToOrder(8);

  const auto fact = checkFamily(namedFamily<Rational>("factorial", Rational(1)), ineqs, 8, Rational(1));
  CHECK(fact.allPass());
  CHECK(checkFamily(namedFamily<double>("factorial", 2.0), ineqs, 8, 2.0).allPass());

  const auto of = checkFamily(namedFamily<Rational>("order-factorial", Rational(1)), ineqs, 8, Rational(1));
  std::vector<const Inequality*> failed;
  for (const auto& e : of.entries)
    if (!e.pass) failed.push_back(e.inequality);
  REQUIRE(failed.size() == 1);
  CHECK(failed[0]->slack() == words("P", "Q").slack());
  CHECK(checkFamily(namedFamily<Rational>("order-factorial", Rational(1)), clIneqs, 8, Rational(1)).allPass());

  const auto p3q = checkFamily(namedFamily<double>("power3", 1.0), ineqs, 8, 1.0);
  const auto p3c = checkFamily(namedFamily<double>("power3", 1.0), clIneqs, 8, 1.0);
  CHECK(p3q.failures > 0);
  CHECK(p3c.failures > 0);

  // Exact and floating verdicts agree.
  for (const auto& name : familyNames()) {
    const auto e = checkFamily(namedFamily<Rational>(name, Rational(1)), ineqs, 8, Rational(1));
    const auto d = checkFamily(namedFamily<double>(name, 1.0), ineqs, 8, 1.0);
    CHECK(e.failures == d.failures);
  }
  CHECK_THROWS_AS(namedFamily<double>("nope", 1.0), InvalidFamilyError);
}

TEST_CASE("canonical form") {
  const MomentPoly slack = G(2, 0) * G(0, 2) - G(1, 1) * G(1, 1) - Rational(1, 4) * hb * hb;
  const auto x = canonicalInequality(slack, "test", Kind::Quantum);
  CHECK(x.lhs == Rational(1, 4) * hb * hb + G(1, 1) * G(1, 1));
  CHECK(x.rhs == G(2, 0) * G(0, 2));
  CHECK(x.slack() == slack);
}
