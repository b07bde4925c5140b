#include "moments/symcore.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace moments {

std::string_view to_string(Kind kind) { return kind == Kind::Quantum ? "quantum" : "classical"; }

Kind parseKind(std::string_view text) {
  if (text == "quantum") return Kind::Quantum;
  if (text == "classical") return Kind::Classical;
  throw std::invalid_argument("unknown kind '" + std::string(text) + "'");
}

std::string to_string(const MomentKey& key) {
  return (key.kind == Kind::Quantum ? "G[" : "C[") + std::to_string(key.a) + "," + std::to_string(key.b) + "]";
}

std::string to_string(const Variable& v) {
  switch (v.tag) {
    case Variable::Tag::Q: return "q";
    case Variable::Tag::P: return "p";
    case Variable::Tag::Moment: break;
  }
  return to_string(v.key);
}

int Monomial::momentOrder() const {
  int s = 0;
  for (const auto& k : keys) s += k.order();
  return s;
}

int Monomial::power(const Variable& v) const {
  switch (v.tag) {
    case Variable::Tag::Q: return q;
    case Variable::Tag::P: return p;
    case Variable::Tag::Moment: break;
  }
  return static_cast<int>(std::count(keys.begin(), keys.end(), v.key));
}

std::strong_ordering operator<=>(const Monomial& x, const Monomial& y) {
  if (auto c = x.momentOrder() <=> y.momentOrder(); c != 0) return c;
  if (auto c = x.q <=> y.q; c != 0) return c;
  if (auto c = x.p <=> y.p; c != 0) return c;
  if (auto c = x.hbar <=> y.hbar; c != 0) return c;
  if (auto c = x.energy <=> y.energy; c != 0) return c;
  if (auto c = std::lexicographical_compare_three_way(x.keys.begin(), x.keys.end(), y.keys.begin(),
                                                       y.keys.end());
      c != 0)
    return c;
  return x.imaginary <=> y.imaginary;
}

namespace {

// Folds order-0 factors into 1; returns false if the monomial vanishes.
bool normalize(Monomial& m) {
  std::vector<MomentKey> kept;
  kept.reserve(m.keys.size());
  for (const auto& k : m.keys) {
    if (k.a < 0 || k.b < 0 || k.order() == 1) return false;
    if (k.order() > 0) kept.push_back(k);
  }
  std::sort(kept.begin(), kept.end());
  m.keys = std::move(kept);
  return true;
}

Monomial product(const Monomial& x, const Monomial& y, bool& negate) {
  Monomial r;
  r.q = x.q + y.q;
  r.p = x.p + y.p;
  r.hbar = x.hbar + y.hbar;
  r.energy = x.energy + y.energy;
  negate = x.imaginary && y.imaginary;
  r.imaginary = x.imaginary != y.imaginary;
  r.keys.reserve(x.keys.size() + y.keys.size());
  std::merge(x.keys.begin(), x.keys.end(), y.keys.begin(), y.keys.end(), std::back_inserter(r.keys));
  return r;
}

}  // namespace

MomentPoly::MomentPoly(const Rational& c) {
  if (c != 0) {
    auto it = terms_.emplace(Monomial{}, c).first;
    it->second.canonicalize();
  }
}

MomentPoly MomentPoly::monomial(Monomial m, const Rational& c) {
  MomentPoly r;
  r.addTerm(std::move(m), c);
  return r;
}

MomentPoly MomentPoly::moment(int a, int b, Kind kind) {
  Monomial m;
  m.keys.push_back({a, b, kind});
  return monomial(std::move(m));
}

MomentPoly MomentPoly::q(int power) {
  Monomial m;
  m.q = power;
  return monomial(m);
}

MomentPoly MomentPoly::p(int power) {
  Monomial m;
  m.p = power;
  return monomial(m);
}

MomentPoly MomentPoly::hbar(int power) {
  Monomial m;
  m.hbar = power;
  return monomial(m);
}

MomentPoly MomentPoly::energy(int power) {
  Monomial m;
  m.energy = power;
  return monomial(m);
}

MomentPoly MomentPoly::imag() {
  Monomial m;
  m.imaginary = true;
  return monomial(m);
}

MomentPoly MomentPoly::variable(const Variable& v) {
  switch (v.tag) {
    case Variable::Tag::Q: return q();
    case Variable::Tag::P: return p();
    case Variable::Tag::Moment: break;
  }
  return moment(v.key);
}

void MomentPoly::addTerm(Monomial m, const Rational& c) {
  if (c == 0 || !normalize(m)) return;
  auto [it, inserted] = terms_.try_emplace(std::move(m), c);
  if (inserted) {
    it->second.canonicalize();
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

bool MomentPoly::isConstant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Monomial{});
}

bool MomentPoly::isReal() const {
  return std::none_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.imaginary; });
}

bool MomentPoly::hasHbar() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.hbar != 0; });
}

bool MomentPoly::hasMoments() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.hasMoments(); });
}

int MomentPoly::maxMomentOrder() const {
  int r = 0;
  for (const auto& [m, c] : terms_)
    for (const auto& k : m.keys) r = std::max(r, k.order());
  return r;
}

Rational MomentPoly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

MomentPoly& MomentPoly::operator+=(const MomentPoly& y) {
  for (const auto& [m, c] : y.terms_) addTerm(m, c);
  return *this;
}

MomentPoly& MomentPoly::operator-=(const MomentPoly& y) {
  for (const auto& [m, c] : y.terms_) addTerm(m, -c);
  return *this;
}

MomentPoly& MomentPoly::operator*=(const MomentPoly& y) {
  *this = *this * y;
  return *this;
}

MomentPoly& MomentPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  Rational f(c);
  f.canonicalize();
  for (auto& [m, v] : terms_) v *= f;
  return *this;
}

MomentPoly MomentPoly::operator-() const {
  MomentPoly r = *this;
  for (auto& [m, v] : r.terms_) v = -v;
  return r;
}

MomentPoly operator*(const MomentPoly& x, const MomentPoly& y) {
  MomentPoly r;
  for (const auto& [mx, cx] : x.terms_) {
    for (const auto& [my, cy] : y.terms_) {
      bool negate = false;
      Monomial m = product(mx, my, negate);
      Rational c = cx * cy;
      if (negate) c = -c;
      r.addTerm(std::move(m), c);
    }
  }
  return r;
}

bool operator<(const MomentPoly& x, const MomentPoly& y) {
  return std::lexicographical_compare(x.terms_.begin(), x.terms_.end(), y.terms_.begin(), y.terms_.end(),
                                      [](const auto& s, const auto& t) {
                                        if (auto c = s.first <=> t.first; c != 0) return c < 0;
                                        return s.second < t.second;
                                      });
}

MomentPoly pow(const MomentPoly& x, int n) {
  if (n < 0) throw std::invalid_argument("negative power of a polynomial");
  MomentPoly r(1);
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

RealImagPair split(const MomentPoly& x) {
  RealImagPair z;
  for (const auto& [m, c] : x.terms()) {
    if (m.imaginary) {
      Monomial r = m;
      r.imaginary = false;
      z.im.addTerm(std::move(r), c);
    } else {
      z.re.addTerm(m, c);
    }
  }
  return z;
}

MomentPoly join(const RealImagPair& z) { return z.re + MomentPoly::imag() * z.im; }

MomentPoly conjugate(const MomentPoly& x) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) r.addTerm(m, m.imaginary ? Rational(-c) : c);
  return r;
}

MomentPoly derivative(const MomentPoly& x, const Variable& v) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    const int n = m.power(v);
    if (n == 0) continue;
    Monomial d = m;
    switch (v.tag) {
      case Variable::Tag::Q: --d.q; break;
      case Variable::Tag::P: --d.p; break;
      case Variable::Tag::Moment: d.keys.erase(std::find(d.keys.begin(), d.keys.end(), v.key)); break;
    }
    r.addTerm(std::move(d), c * n);
  }
  return r;
}

MomentPoly truncate(const MomentPoly& x, int order) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    if (std::all_of(m.keys.begin(), m.keys.end(), [&](const MomentKey& k) { return k.order() <= order; }))
      r.addTerm(m, c);
  }
  return r;
}

MomentPoly classicalLimit(const MomentPoly& x) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms())
    if (m.hbar == 0) r.addTerm(m, c);
  return r;
}

MomentPoly divideByHbar(const MomentPoly& x) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    if (m.hbar == 0) throw std::domain_error("term without hbar cannot be divided by hbar: " + to_string(m));
    Monomial d = m;
    --d.hbar;
    r.addTerm(std::move(d), c);
  }
  return r;
}

MomentPoly relabel(const MomentPoly& x, Kind kind) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    Monomial d = m;
    for (auto& k : d.keys) k.kind = kind;
    r.addTerm(std::move(d), c);
  }
  return r;
}

MomentPoly mapMoments(const MomentPoly& x,
                      const std::function<std::optional<MomentPoly>(const MomentKey&)>& fn) {
  std::map<MomentKey, std::optional<MomentPoly>> memo;
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    Monomial rest = m;
    rest.keys.clear();
    MomentPoly term = MomentPoly::monomial(rest, c);
    for (const auto& k : m.keys) {
      auto it = memo.find(k);
      if (it == memo.end()) it = memo.emplace(k, fn(k)).first;
      term *= it->second ? *it->second : MomentPoly::moment(k);
      if (term.isZero()) break;
    }
    r += term;
  }
  return r;
}

MomentPoly substitute(const MomentPoly& x, const Variable& v, const MomentPoly& value) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    const int n = m.power(v);
    if (n == 0) {
      r.addTerm(m, c);
      continue;
    }
    Monomial rest = m;
    switch (v.tag) {
      case Variable::Tag::Q: rest.q = 0; break;
      case Variable::Tag::P: rest.p = 0; break;
      case Variable::Tag::Moment: std::erase(rest.keys, v.key); break;
    }
    r += MomentPoly::monomial(rest, c) * pow(value, n);
  }
  return r;
}

MomentPoly setHbar(const MomentPoly& x, const Rational& value) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    Monomial rest = m;
    rest.hbar = 0;
    Rational f = c;
    for (int i = 0; i < m.hbar; ++i) f *= value;
    r.addTerm(std::move(rest), f);
  }
  return r;
}

MomentPoly setEnergy(const MomentPoly& x, const MomentPoly& value) {
  MomentPoly r;
  for (const auto& [m, c] : x.terms()) {
    Monomial rest = m;
    rest.energy = 0;
    r += MomentPoly::monomial(rest, c) * pow(value, m.energy);
  }
  return r;
}

std::vector<Variable> variables(const MomentPoly& x) {
  std::vector<Variable> vs;
  for (const auto& [m, c] : x.terms()) {
    if (m.q) vs.push_back(Variable::q());
    if (m.p) vs.push_back(Variable::p());
    for (const auto& k : m.keys) vs.push_back(Variable::moment(k));
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

// ---------------------------------------------------------------------------
// Text format

std::string to_string(const Rational& c) { return c.get_num().get_str() + "/" + c.get_den().get_str(); }

namespace {

void appendPower(std::string& out, std::string_view sym, int n) {
  if (n == 0) return;
  out += '*';
  out += sym;
  if (n != 1) {
    out += '^';
    out += std::to_string(n);
  }
}

}  // namespace

std::string to_string(const Monomial& m) {
  std::string out;
  if (m.imaginary) out += "*i";
  appendPower(out, "hbar", m.hbar);
  appendPower(out, "E", m.energy);
  appendPower(out, "q", m.q);
  appendPower(out, "p", m.p);
  for (std::size_t i = 0; i < m.keys.size();) {
    std::size_t j = i;
    while (j < m.keys.size() && m.keys[j] == m.keys[i]) ++j;
    appendPower(out, to_string(m.keys[i]), static_cast<int>(j - i));
    i = j;
  }
  return out.empty() ? out : out.substr(1);
}

std::string to_string(const MomentPoly& x) {
  if (x.isZero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : x.terms()) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) out += '-';
    } else {
      out += c < 0 ? " - " : " + ";
    }
    out += to_string(mag);
    std::string factors = to_string(m);
    if (!factors.empty()) {
      out += '*';
      out += factors;
    }
    first = false;
  }
  return out;
}

Rational parseRational(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  std::string digits;
  int scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits += text[i++];
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits += text[i++];
      --scale;
      any = true;
    }
  }
  if (!any) throw ParseError(i, "expected a number in '" + std::string(text) + "'");
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    std::string ed;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ed += text[i++];
    if (ed.empty()) throw ParseError(i, "malformed exponent");
    scale += eneg ? -std::stoi(ed) : std::stoi(ed);
  }
  Rational r{Integer(digits, 10)};
  if (i < text.size() && text[i] == '/') {
    ++i;
    std::string den;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) den += text[i++];
    if (den.empty()) throw ParseError(i, "expected denominator");
    Integer d(den, 10);
    if (d == 0) throw ParseError(i, "zero denominator");
    r /= Rational(d);
  }
  if (i != text.size()) throw ParseError(i, "unexpected character in number '" + std::string(text) + "'");
  Integer ten(10);
  Integer factor;
  mpz_pow_ui(factor.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(scale < 0 ? -scale : scale));
  if (scale < 0) r /= Rational(factor);
  if (scale > 0) r *= Rational(factor);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

namespace {

class PolyParser {
 public:
  explicit PolyParser(std::string_view s) : s_(s) {}

  MomentPoly parseAll() {
    MomentPoly r = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(pos_, std::string("unexpected '") + s_[pos_] + "'");
    return r;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
  }
  bool startsWith(std::string_view w) const { return s_.substr(pos_, w.size()) == w; }

  int integer() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError(pos_, "expected integer");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }

  MomentPoly expr() {
    MomentPoly r;
    bool negate = false;
    if (accept('-'))
      negate = true;
    else
      accept('+');
    MomentPoly t = term();
    r = negate ? -t : t;
    for (;;) {
      if (accept('+'))
        r += term();
      else if (accept('-'))
        r -= term();
      else
        break;
    }
    return r;
  }

  MomentPoly term() {
    MomentPoly r = factor();
    while (accept('*')) r *= factor();
    return r;
  }

  MomentPoly factor() {
    MomentPoly base = primary();
    if (accept('^')) return pow(base, integer());
    return base;
  }

  MomentPoly number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ + 1 < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E') &&
        (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
         ((s_[pos_ + 1] == '-' || s_[pos_ + 1] == '+') && pos_ + 2 < s_.size() &&
          std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))))) {
      pos_ += 2;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && s_[pos_] == '/') {
      ++pos_;
      std::size_t d = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (d == pos_) throw ParseError(pos_, "expected denominator");
    }
    try {
      return MomentPoly(parseRational(s_.substr(start, pos_ - start)));
    } catch (const ParseError& e) {
      throw ParseError(start + e.position, "malformed number");
    }
  }

  MomentPoly primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError(pos_, "unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      MomentPoly r = expr();
      expect(')');
      return r;
    }
    if (startsWith("hbar")) {
      pos_ += 4;
      return MomentPoly::hbar();
    }
    if (c == 'G' || c == 'C') {
      ++pos_;
      expect('[');
      int a = integer();
      expect(',');
      int b = integer();
      expect(']');
      return MomentPoly::moment(a, b, c == 'G' ? Kind::Quantum : Kind::Classical);
    }
    ++pos_;
    switch (c) {
      case 'q': return MomentPoly::q();
      case 'p': return MomentPoly::p();
      case 'E': return MomentPoly::energy();
      case 'i': return MomentPoly::imag();
      default: break;
    }
    throw ParseError(pos_ - 1, std::string("unknown symbol '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

MomentPoly parseMomentPoly(std::string_view text) { return PolyParser(text).parseAll(); }

}  // namespace moments
