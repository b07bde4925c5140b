#include <doctest.h>

#include "moments/opalgebra.hpp"
#include "oracle.hpp"

using namespace moments;

namespace {

MomentPoly G(int a, int b) { return MomentPoly::moment(a, b); }
const MomentPoly hb = MomentPoly::hbar();
const MomentPoly I = MomentPoly::imag();

OperatorSum word(const char* w, const MomentPoly& c = 1) { return OperatorSum(OperatorWord(w), c); }

}  // namespace

TEST_CASE("words") {
  CHECK(OperatorWord("PQQ").adjoint() == OperatorWord("QQP"));
  CHECK(OperatorWord("PQQ").countQ() == 2);
  CHECK(OperatorWord("PQ") + OperatorWord("Q") == OperatorWord("PQQ"));
  CHECK(allWords(3).size() == 8);
  CHECK(allWords(0).size() == 1);
  CHECK_THROWS_AS(OperatorWord("PX"), ParseError);
}

TEST_CASE("commutator reduction") {
  CHECK(commutatorReduce(word("PQ")) == word("QP") + word("", -hb * I));
  CHECK(commutatorReduce(word("QP")) == word("QP"));
  CHECK(commutatorReduce(word("PPQ")) == word("QPP") + word("P", Rational(-2) * hb * I));
  CHECK(commutatorReduce(commutator(word("Q"), word("P"))) == word("", hb * I));
  const OperatorSum x = word("PQPQ") + word("QQP", Rational(3));
  const OperatorSum reduced = commutatorReduce(x);
  for (const auto& [w, c] : reduced.terms()) {
    const auto& s = w.letters();
    CHECK(s.find("PQ") == std::string::npos);
  }
}

TEST_CASE("weyl ordering") {
  CHECK(weylMoment(1, 1) == word("PQ", Rational(1, 2)) + word("QP", Rational(1, 2)));
  CHECK(weylMoment(2, 0) == word("PP"));
  CHECK(weylMoment(1, 2) ==
        word("PQQ", Rational(1, 3)) + word("QPQ", Rational(1, 3)) + word("QQP", Rational(1, 3)));
  for (int n = 0; n <= 10; ++n)
    for (int a = 0; a <= n; ++a) CHECK(toMoments(weylMoment(a, n - a)) == G(a, n - a));
}

TEST_CASE("expectation values") {
  CHECK(toMoments(OperatorWord("PQ")) == G(1, 1) - Rational(1, 2) * hb * I);
  CHECK(toMoments(OperatorWord("QP")) == G(1, 1) + Rational(1, 2) * hb * I);
  CHECK(toMoments(OperatorWord("PP")) == G(2, 0));
  CHECK(toMoments(OperatorWord("")) == MomentPoly(1));
  CHECK(toMoments(OperatorWord("P")) == MomentPoly());

  auto pq = expectationOfProduct(OperatorWord("P"), OperatorWord("Q"));
  CHECK(pq.re == G(1, 1));
  CHECK(pq.im == Rational(-1, 2) * hb);
  auto pp = expectationOfProduct(OperatorWord("P"), OperatorWord("P"));
  CHECK(pp.re == G(2, 0));
  CHECK(pp.im.isZero());
  auto self = expectationOfProduct(OperatorWord("PQ"), OperatorWord("PQ"));
  CHECK(self.im.isZero());
  const MomentPoly g22 = G(2, 2);
  CHECK(self.re.coefficient(g22.terms().begin()->first) == 1);
  CHECK(self.re.hasHbar());
}

TEST_CASE("star-product oracle agrees on every word up to length 7") {
  for (int n = 0; n <= 7; ++n)
    for (const auto& w : allWords(n)) {
      INFO(w.letters());
      CHECK(toMoments(w) == oracle::wordExpectation(w.letters()));
    }
}

TEST_CASE("star-product oracle on random longer words") {
  oracle::Gen gen(23);
  for (int i = 0; i < 20; ++i) {
    const std::string w = gen.word(8, 10);
    INFO(w);
    CHECK(toMoments(OperatorWord(w)) == oracle::wordExpectation(w));
  }
}

TEST_CASE("conjugation symmetry") {
  oracle::Gen gen(29);
  for (int i = 0; i < 100; ++i) {
    const OperatorWord f(gen.word(0, 5)), g(gen.word(0, 5));
    const auto fg = expectationOfProduct(f, g), gf = expectationOfProduct(g, f);
    CHECK(fg.re == gf.re);
    CHECK(fg.im == -gf.im);
    CHECK(expectationOfProduct(f, f).im.isZero());
  }
}

TEST_CASE("ordering is irrelevant without hbar") {
  for (int n = 2; n <= 6; ++n)
    for (const auto& w : allWords(n))
      CHECK(classicalLimit(toMoments(w)) == G(w.countP(), w.countQ()));
}

TEST_CASE("sums") {
  const OperatorSum x = word("PQ") + word("QP");
  CHECK(toMoments(x) == Rational(2) * G(1, 1));
  CHECK((word("P") * word("Q")) == word("PQ"));
  CHECK(x.adjoint() == x);
  CHECK((word("PQ", I)).adjoint() == word("QP", -I));
}
