#include "moments/opalgebra.hpp"

#include <algorithm>
#include <mutex>
#include <shared_mutex>

namespace moments {

OperatorWord::OperatorWord(std::string_view letters) : letters_(letters) {
  for (std::size_t i = 0; i < letters_.size(); ++i)
    if (letters_[i] != 'P' && letters_[i] != 'Q')
      throw ParseError(i, std::string("operator words use only P and Q, got '") + letters_[i] + "'");
}

int OperatorWord::countP() const { return static_cast<int>(std::count(letters_.begin(), letters_.end(), 'P')); }
int OperatorWord::countQ() const { return static_cast<int>(std::count(letters_.begin(), letters_.end(), 'Q')); }

OperatorWord OperatorWord::adjoint() const {
  OperatorWord r;
  r.letters_.assign(letters_.rbegin(), letters_.rend());
  return r;
}

OperatorWord operator+(const OperatorWord& x, const OperatorWord& y) {
  OperatorWord r;
  r.letters_ = x.letters_ + y.letters_;
  return r;
}

std::vector<OperatorWord> allWords(int length) {
  std::vector<OperatorWord> out;
  if (length < 0) return out;
  const unsigned n = 1u << length;
  out.reserve(n);
  for (unsigned mask = 0; mask < n; ++mask) {
    std::string s(static_cast<std::size_t>(length), 'P');
    for (int i = 0; i < length; ++i)
      if (mask & (1u << (length - 1 - i))) s[static_cast<std::size_t>(i)] = 'Q';
    out.emplace_back(s);
  }
  return out;
}

OperatorSum::OperatorSum(const OperatorWord& w, const MomentPoly& c) { add(w, c); }

void OperatorSum::add(const OperatorWord& w, const MomentPoly& c) {
  if (c.isZero()) return;
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second.isZero()) terms_.erase(it);
  }
}

OperatorSum OperatorSum::adjoint() const {
  OperatorSum r;
  for (const auto& [w, c] : terms_) r.add(w.adjoint(), conjugate(c));
  return r;
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& y) {
  for (const auto& [w, c] : y.terms_) add(w, c);
  return *this;
}

OperatorSum& OperatorSum::operator-=(const OperatorSum& y) {
  for (const auto& [w, c] : y.terms_) add(w, -c);
  return *this;
}

OperatorSum operator*(const OperatorSum& x, const OperatorSum& y) {
  OperatorSum r;
  for (const auto& [wx, cx] : x.terms_)
    for (const auto& [wy, cy] : y.terms_) r.add(wx + wy, cx * cy);
  return r;
}

OperatorSum operator*(const MomentPoly& c, const OperatorSum& x) {
  OperatorSum r;
  for (const auto& [w, v] : x.terms_) r.add(w, c * v);
  return r;
}

std::string to_string(const OperatorSum& x) {
  if (x.isZero()) return "0";
  std::string out;
  for (const auto& [w, c] : x.terms()) {
    if (!out.empty()) out += " + ";
    out += "(" + to_string(c) + ")*" + (w.empty() ? std::string("1") : w.letters());
  }
  return out;
}

OperatorSum commutator(const OperatorSum& x, const OperatorSum& y) { return x * y - y * x; }

namespace {

// Normal-ordered form Q^k P^l keyed by (k, l).
using NormalForm = std::map<std::pair<int, int>, MomentPoly>;

void accumulate(NormalForm& nf, std::pair<int, int> key, const MomentPoly& c) {
  if (c.isZero()) return;
  auto [it, inserted] = nf.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second.isZero()) nf.erase(it);
  }
}

NormalForm normalForm(const OperatorWord& w) {
  static const MomentPoly minusIHbar = -(MomentPoly::imag() * MomentPoly::hbar());
  NormalForm nf{{{0, 0}, MomentPoly(1)}};
  for (char letter : w.letters()) {
    NormalForm next;
    for (const auto& [kl, c] : nf) {
      auto [k, l] = kl;
      if (letter == 'P') {
        accumulate(next, {k, l + 1}, c);
      } else {
        // P^l Q = Q P^l - i hbar l P^(l-1)
        accumulate(next, {k + 1, l}, c);
        if (l > 0) accumulate(next, {k, l - 1}, c * minusIHbar * Rational(l));
      }
    }
    nf = std::move(next);
  }
  return nf;
}

OperatorWord normalWord(int k, int l) { return OperatorWord(std::string(k, 'Q') + std::string(l, 'P')); }

NormalForm weylNormalForm(int a, int b) {
  std::string s = std::string(a, 'P') + std::string(b, 'Q');
  NormalForm nf;
  Integer count = 0;
  do {
    for (const auto& [kl, c] : normalForm(OperatorWord(s))) accumulate(nf, kl, c);
    ++count;
  } while (std::next_permutation(s.begin(), s.end()));
  Rational inv(Integer(1), count);
  for (auto& [kl, c] : nf) c *= inv;
  return nf;
}

class NormalMomentCache {
 public:
  // <Q^k P^l> in Weyl moments.
  MomentPoly get(int k, int l) {
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find({k, l});
      if (it != table_.end()) return it->second;
    }
    // Weyl(l, k) = Q^k P^l + lower-order normal monomials.
    MomentPoly r = MomentPoly::moment(l, k);
    for (const auto& [kl, c] : weylNormalForm(l, k)) {
      if (kl == std::pair{k, l}) continue;
      r -= c * get(kl.first, kl.second);
    }
    std::unique_lock lock(mutex_);
    return table_.try_emplace({k, l}, std::move(r)).first->second;
  }

 private:
  std::shared_mutex mutex_;
  std::map<std::pair<int, int>, MomentPoly> table_;
};

NormalMomentCache& normalMoments() {
  static NormalMomentCache cache;
  return cache;
}

}  // namespace

OperatorSum commutatorReduce(const OperatorSum& x) {
  OperatorSum r;
  for (const auto& [w, c] : x.terms())
    for (const auto& [kl, v] : normalForm(w)) r.add(normalWord(kl.first, kl.second), c * v);
  return r;
}

OperatorSum weylMoment(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("weylMoment indices must be non-negative");
  std::string s = std::string(a, 'P') + std::string(b, 'Q');
  OperatorSum r;
  std::vector<std::string> orderings;
  do orderings.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));
  const Rational w(Integer(1), Integer(static_cast<long>(orderings.size())));
  for (const auto& o : orderings) r.add(OperatorWord(o), MomentPoly(w));
  return r;
}

MomentPoly toMoments(const OperatorWord& w) {
  MomentPoly r;
  for (const auto& [kl, c] : normalForm(w)) r += c * normalMoments().get(kl.first, kl.second);
  return r;
}

MomentPoly toMoments(const OperatorSum& x) {
  MomentPoly r;
  for (const auto& [w, c] : x.terms()) r += c * toMoments(w);
  return r;
}

RealImagPair expectationOfProduct(const OperatorWord& f, const OperatorWord& g) {
  return split(toMoments(f.adjoint() + g));
}

RealImagPair expectationOfProduct(const OperatorSum& f, const OperatorSum& g) {
  return split(toMoments(f.adjoint() * g));
}

}  // namespace moments
