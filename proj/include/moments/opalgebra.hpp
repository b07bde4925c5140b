#pragma once

// Words in the centered operators P = (p^ - p) and Q = (q^ - q) with
// [Q, P] = i*hbar, and their expectation values in Weyl-ordered moments.

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "moments/symcore.hpp"

namespace moments {

class OperatorWord {
 public:
  OperatorWord() = default;
  /// Letters must be 'P' or 'Q'; anything else is a ParseError.
  explicit OperatorWord(std::string_view letters);

  const std::string& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int countP() const;
  int countQ() const;
  /// Both letters are self-adjoint, so the adjoint reverses the word.
  OperatorWord adjoint() const;

  friend OperatorWord operator+(const OperatorWord& x, const OperatorWord& y);
  friend auto operator<=>(const OperatorWord&, const OperatorWord&) = default;
  friend bool operator==(const OperatorWord&, const OperatorWord&) = default;

 private:
  std::string letters_;
};

/// Every word of exactly `length` letters, in lexicographic order.
std::vector<OperatorWord> allWords(int length);

class OperatorSum {
 public:
  using Terms = std::map<OperatorWord, MomentPoly>;

  OperatorSum() = default;
  explicit OperatorSum(const OperatorWord& w, const MomentPoly& c = 1);

  const Terms& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  void add(const OperatorWord& w, const MomentPoly& c);
  /// Conjugates coefficients and reverses words.
  OperatorSum adjoint() const;

  OperatorSum& operator+=(const OperatorSum& y);
  OperatorSum& operator-=(const OperatorSum& y);
  friend OperatorSum operator+(OperatorSum x, const OperatorSum& y) { return x += y; }
  friend OperatorSum operator-(OperatorSum x, const OperatorSum& y) { return x -= y; }
  friend OperatorSum operator*(const OperatorSum& x, const OperatorSum& y);
  friend OperatorSum operator*(const MomentPoly& c, const OperatorSum& x);
  friend bool operator==(const OperatorSum&, const OperatorSum&) = default;

 private:
  Terms terms_;
};

std::string to_string(const OperatorSum& x);

OperatorSum commutator(const OperatorSum& x, const OperatorSum& y);

/// Rewrites every word into Q...QP...P using PQ = QP - i*hbar.
OperatorSum commutatorReduce(const OperatorSum& x);

/// Totally symmetric ordering of `a` P-letters and `b` Q-letters.
OperatorSum weylMoment(int a, int b);

/// Expectation value in quantum moments G[a,b]. Conversions of normal-ordered
/// monomials are cached process-wide.
MomentPoly toMoments(const OperatorSum& x);
MomentPoly toMoments(const OperatorWord& w);

/// <f^dagger g> split into real and imaginary parts.
RealImagPair expectationOfProduct(const OperatorWord& f, const OperatorWord& g);
RealImagPair expectationOfProduct(const OperatorSum& f, const OperatorSum& g);

}  // namespace moments
