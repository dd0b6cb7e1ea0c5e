#include "ffext/curves.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ffext {

BivariatePoly::BivariatePoly(Field field, Terms terms) : field_(std::move(field)) {
  for (const auto& [e, c] : terms) {
    if (c != field_.zero()) terms_.emplace(e, c);
  }
  if (terms_.empty()) throw Error(ErrorCode::ZeroPolynomial, "polynomial is identically zero");
  for (const auto& [e, c] : terms_) degree_ = std::max(degree_, e.first + e.second);
  if (degree_ >= field_.p()) {
    throw Error(ErrorCode::DegreeExceedsCharacteristic,
                "degree " + std::to_string(degree_) + " is not below the characteristic " + std::to_string(field_.p()));
  }
}

BivariatePoly BivariatePoly::norm(const Field& field, std::uint32_t n) {
  return BivariatePoly(field, {{{n, 0}, field.one()}, {{0, n}, field.one()}});
}

BivariatePoly BivariatePoly::diagonal(const Field& field, Elem a1, Elem a2, std::uint32_t d) {
  return BivariatePoly(field, {{{d, 0}, a1}, {{0, d}, a2}});
}

Elem BivariatePoly::coeff(std::uint32_t i, std::uint32_t j) const noexcept {
  const auto it = terms_.find({i, j});
  return it == terms_.end() ? field_.zero() : it->second;
}

Elem BivariatePoly::eval(PlanePoint x) const noexcept {
  Elem acc = field_.zero();
  for (const auto& [e, c] : terms_) {
    acc = field_.add(acc, field_.mul(c, field_.mul(field_.pow(x.x1, e.first), field_.pow(x.x2, e.second))));
  }
  return acc;
}

std::vector<Elem> BivariatePoly::eval_plane() const {
  const std::uint32_t q = field_.q();
  const std::uint32_t d = degree_;
  // powers[a][i] = a^i
  std::vector<Elem> powers(static_cast<std::size_t>(q) * (d + 1));
  for (std::uint32_t a = 0; a < q; ++a) {
    Elem cur = field_.one();
    for (std::uint32_t i = 0; i <= d; ++i) {
      powers[static_cast<std::size_t>(a) * (d + 1) + i] = cur;
      cur = field_.mul(cur, Elem{a});
    }
  }
  std::vector<Elem> out(static_cast<std::size_t>(q) * q, field_.zero());
  for (std::uint32_t x1 = 0; x1 < q; ++x1) {
    for (std::uint32_t x2 = 0; x2 < q; ++x2) {
      Elem acc = field_.zero();
      for (const auto& [e, c] : terms_) {
        const Elem m = field_.mul(powers[static_cast<std::size_t>(x1) * (d + 1) + e.first],
                                  powers[static_cast<std::size_t>(x2) * (d + 1) + e.second]);
        acc = field_.add(acc, field_.mul(c, m));
      }
      out[static_cast<std::size_t>(x1) * q + x2] = acc;
    }
  }
  return out;
}

BivariatePoly BivariatePoly::minus_constant(Elem c) const {
  Terms t = terms_;
  t[{0, 0}] = field_.sub(coeff(0, 0), c);
  return BivariatePoly(field_, std::move(t));
}

namespace {

std::string coefficient_text(const Field& f, Elem c) {
  if (f.in_prime_subfield(c)) return std::to_string(c.v);
  const auto cs = f.coeffs(c);
  std::string s = "{";
  for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "," : "") + std::to_string(cs[i]);
  return s + "}";
}

std::string monomial_text(std::uint32_t i, std::uint32_t j) {
  std::string s;
  auto var = [&](const char* name, std::uint32_t e) {
    if (e == 0) return;
    if (!s.empty()) s += "*";
    s += name;
    if (e > 1) s += "^" + std::to_string(e);
  };
  var("x1", i);
  var("x2", j);
  return s;
}

}  // namespace

std::string BivariatePoly::to_string() const {
  // Descending total degree, then descending x1 exponent.
  std::vector<std::pair<Exponents, Elem>> ordered(terms_.begin(), terms_.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    const auto da = a.first.first + a.first.second, db = b.first.first + b.first.second;
    if (da != db) return da > db;
    return a.first.first > b.first.first;
  });
  const std::uint32_t p = field_.p();
  std::string out;
  for (const auto& [e, c] : ordered) {
    bool negative = false;
    std::string coef;
    if (field_.in_prime_subfield(c) && c.v > p / 2) {
      negative = true;
      coef = std::to_string(p - c.v);
    } else {
      coef = coefficient_text(field_, c);
    }
    const std::string mono = monomial_text(e.first, e.second);
    std::string term;
    if (mono.empty()) {
      term = coef;
    } else if (coef == "1") {
      term = mono;
    } else {
      term = coef + "*" + mono;
    }
    if (out.empty()) {
      out = negative ? "-" + term : term;
    } else {
      out += negative ? " - " : " + ";
      out += term;
    }
  }
  return out;
}

namespace {

constexpr std::uint32_t kMaxIntermediateDegree = 128;
constexpr std::uint32_t kMaxExponent = 64;

// Sparse polynomial without the nonzero/degree invariants, used while parsing.
struct RawPoly {
  BivariatePoly::Terms terms;
};

class PolyParser {
 public:
  PolyParser(std::string_view text, const Field& field) : s_(text), f_(field) {}

  RawPoly parse() {
    RawPoly r = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RawPoly add(const RawPoly& a, const RawPoly& b, bool subtract) const {
    RawPoly r = a;
    for (const auto& [e, c] : b.terms) {
      const Elem prev = r.terms.count(e) ? r.terms[e] : f_.zero();
      const Elem next = subtract ? f_.sub(prev, c) : f_.add(prev, c);
      if (next == f_.zero()) {
        r.terms.erase(e);
      } else {
        r.terms[e] = next;
      }
    }
    return r;
  }

  RawPoly mul(const RawPoly& a, const RawPoly& b, std::size_t at) const {
    RawPoly r;
    for (const auto& [ea, ca] : a.terms) {
      for (const auto& [eb, cb] : b.terms) {
        const BivariatePoly::Exponents e{ea.first + eb.first, ea.second + eb.second};
        if (e.first + e.second > kMaxIntermediateDegree) {
          throw ParseError(at, "intermediate degree exceeds " + std::to_string(kMaxIntermediateDegree));
        }
        const Elem prev = r.terms.count(e) ? r.terms[e] : f_.zero();
        const Elem next = f_.add(prev, f_.mul(ca, cb));
        if (next == f_.zero()) {
          r.terms.erase(e);
        } else {
          r.terms[e] = next;
        }
      }
    }
    return r;
  }

  RawPoly constant(Elem c) const {
    RawPoly r;
    if (c != f_.zero()) r.terms[{0, 0}] = c;
    return r;
  }

  RawPoly expr() {
    RawPoly acc = term();
    for (;;) {
      if (accept('+')) {
        acc = add(acc, term(), false);
      } else if (accept('-')) {
        acc = add(acc, term(), true);
      } else {
        return acc;
      }
    }
  }

  RawPoly term() {
    RawPoly acc = unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (!accept('*')) return acc;
      acc = mul(acc, unary(), at);
    }
  }

  RawPoly unary() {
    if (accept('-')) return add(RawPoly{}, unary(), true);
    if (accept('+')) return unary();
    return power();
  }

  RawPoly power() {
    RawPoly base = atom();
    skip_ws();
    const std::size_t at = pos_;
    if (!accept('^')) return base;
    skip_ws();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected exponent");
    std::uint64_t e = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      e = e * 10 + static_cast<std::uint64_t>(s_[pos_] - '0');
      if (e > kMaxExponent) throw ParseError(at, "exponent exceeds " + std::to_string(kMaxExponent));
      ++pos_;
    }
    RawPoly r = constant(f_.one());
    for (std::uint64_t i = 0; i < e; ++i) r = mul(r, base, at);
    return r;
  }

  RawPoly atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      const auto p = static_cast<std::int64_t>(f_.p());
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        v = (v * 10 + (s_[pos_] - '0')) % p;
        ++pos_;
      }
      return constant(f_.from_int(v));
    }
    if (c == 'x') {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '1' || s_[pos_] == '2')) {
        const bool first = s_[pos_] == '1';
        ++pos_;
        if (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
          fail("unknown variable");
        }
        RawPoly r;
        r.terms[first ? BivariatePoly::Exponents{1, 0} : BivariatePoly::Exponents{0, 1}] = f_.one();
        return r;
      }
      fail("expected variable x1 or x2");
    }
    if (c == '(') {
      ++pos_;
      RawPoly inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '{') {
      ++pos_;
      std::vector<std::uint32_t> coords;
      for (;;) {
        skip_ws();
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected coordinate");
        std::uint64_t v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          v = (v * 10 + static_cast<std::uint64_t>(s_[pos_] - '0')) % f_.p();
          ++pos_;
        }
        coords.push_back(static_cast<std::uint32_t>(v));
        if (accept(',')) continue;
        if (accept('}')) break;
        fail("expected ',' or '}'");
      }
      if (coords.size() != f_.k()) fail("element literal needs exactly k coordinates");
      return constant(f_.from_coeffs(coords));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const Field& f_;
  std::size_t pos_ = 0;
};

}  // namespace

BivariatePoly parse_poly(std::string_view text, const Field& field) {
  RawPoly raw = PolyParser(text, field).parse();
  return BivariatePoly(field, std::move(raw.terms));
}

Variety::Variety(BivariatePoly poly) : poly_(std::move(poly)) {
  const auto values = poly_.eval_plane();
  member_.assign(values.size(), 0);
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (values[i] == field().zero()) {
      indices_.push_back(i);
      member_[i] = 1;
    }
  }
}

std::vector<PlanePoint> Variety::points() const {
  std::vector<PlanePoint> pts;
  pts.reserve(indices_.size());
  for (std::uint32_t i : indices_) pts.push_back(point_at(field(), i));
  return pts;
}

Variety variety_of(const BivariatePoly& poly) { return Variety(poly); }

std::vector<Line> all_lines(const Field& field) {
  const std::uint32_t q = field.q();
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(q) * q + q);
  // x1 = c
  for (std::uint32_t c = 0; c < q; ++c) lines.push_back({field.one(), field.zero(), Elem{c}});
  // a x1 + x2 = c
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t c = 0; c < q; ++c) lines.push_back({Elem{a}, field.one(), Elem{c}});
  }
  return lines;
}

std::vector<PlanePoint> points_on(const Field& field, Line line) {
  const std::uint32_t q = field.q();
  std::vector<PlanePoint> pts;
  pts.reserve(q);
  if (line.b == field.zero()) {
    const Elem x1 = field.div(line.c, line.a);
    for (std::uint32_t t = 0; t < q; ++t) pts.push_back({x1, Elem{t}});
  } else {
    const Elem binv = field.inv(line.b);
    for (std::uint32_t t = 0; t < q; ++t) {
      const Elem x2 = field.mul(binv, field.sub(line.c, field.mul(line.a, Elem{t})));
      pts.push_back({Elem{t}, x2});
    }
  }
  return pts;
}

std::string to_string(const Field& field, Line line) {
  std::ostringstream os;
  if (line.b == field.zero()) {
    os << "x1 = " << field.to_string(field.div(line.c, line.a));
  } else {
    // x2 = -a x1 + c
    os << "x2 = " << field.to_string(field.neg(line.a)) << "*x1 + " << field.to_string(line.c);
  }
  return os.str();
}

namespace {

Line line_through(const Field& f, PlanePoint u, PlanePoint v) {
  if (u.x1 == v.x1) return {f.one(), f.zero(), u.x1};
  // slope s = (v2 - u2)/(v1 - u1); x2 = s x1 + (u2 - s u1) -> (-s) x1 + x2 = c
  const Elem s = f.div(f.sub(v.x2, u.x2), f.sub(v.x1, u.x1));
  const Elem c = f.sub(u.x2, f.mul(s, u.x1));
  return {f.neg(s), f.one(), c};
}

}  // namespace

std::optional<Line> contains_line(const BivariatePoly& poly) {
  const Variety v(poly);
  const Field& f = poly.field();
  if (v.cardinality() < f.q()) return std::nullopt;
  for (const Line& line : all_lines(f)) {
    bool all = true;
    for (const PlanePoint& x : points_on(f, line)) {
      if (!v.contains(x)) {
        all = false;
        break;
      }
    }
    if (all) return line;
  }
  return std::nullopt;
}

std::vector<Line> lines_meeting(const Variety& v, std::size_t min_points) {
  const Field& f = v.field();
  const auto pts = v.points();
  std::set<Line> seen;
  std::vector<Line> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Line l = line_through(f, pts[i], pts[j]);
      if (!seen.insert(l).second) continue;
      std::size_t count = 0;
      for (const PlanePoint& x : points_on(f, l)) count += v.contains(x) ? 1 : 0;
      if (count >= min_points) out.push_back(l);
    }
  }
  if (min_points <= 1) {
    for (const Line& l : all_lines(f)) {
      if (seen.count(l)) continue;
      for (const PlanePoint& x : points_on(f, l)) {
        if (v.contains(x)) {
          out.push_back(l);
          break;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

IntersectionCount intersect_count(const Variety& a, const Variety& b) {
  if (!(a.field() == b.field())) throw Error(ErrorCode::FieldMismatch, "varieties over different fields");
  IntersectionCount r;
  const auto ia = a.indices(), ib = b.indices();
  std::size_t i = 0, j = 0;
  while (i < ia.size() && j < ib.size()) {
    if (ia[i] < ib[j]) {
      ++i;
    } else if (ib[j] < ia[i]) {
      ++j;
    } else {
      ++r.count;
      ++i;
      ++j;
    }
  }
  r.bezout_bound = static_cast<std::uint64_t>(a.poly().degree()) * b.poly().degree();
  r.shared_component = r.count > r.bezout_bound;
  return r;
}

Complex variety_character_sum(const Variety& v, PlanePoint m) {
  const Field& f = v.field();
  Complex acc{};
  for (std::uint32_t i : v.indices()) acc += f.chi(dot(f, point_at(f, i), m));
  return acc;
}

KatzProfile katz_profile(const Variety& v) {
  const Field& f = v.field();
  const auto idx = v.indices();
  const std::vector<Complex> w(idx.size(), Complex{1.0, 0.0});
  std::vector<std::uint32_t> outputs;
  outputs.reserve(plane_size(f) - 1);
  for (std::uint32_t i = 1; i < plane_size(f); ++i) outputs.push_back(i);
  const auto sums = character_transform(f, idx, w, outputs, +1);
  KatzProfile prof;
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    const double a = std::abs(sums[o]);
    if (a > prof.max_abs) {
      prof.max_abs = a;
      prof.argmax = point_at(f, outputs[o]);
    }
  }
  prof.constant = prof.max_abs / std::sqrt(static_cast<double>(f.q()));
  return prof;
}

double schwartz_zippel_margin(const Variety& v) {
  const std::uint32_t d = v.poly().degree();
  if (d == 0) return 0.0;  // nonzero constant: empty zero set
  return static_cast<double>(v.cardinality()) / (static_cast<double>(d) * v.field().q());
}

nlohmann::json to_json(const Variety& v) {
  nlohmann::json pts = nlohmann::json::array();
  for (const PlanePoint& x : v.points()) pts.push_back({x.x1.v, x.x2.v});
  const auto line = contains_line(v.poly());
  return {{"poly_text", v.poly().to_string()},
          {"q", v.field().q()},
          {"points", std::move(pts)},
          {"cardinality", v.cardinality()},
          {"contains_line", line ? nlohmann::json(to_string(v.field(), *line)) : nlohmann::json(nullptr)}};
}

}  // namespace ffext

namespace ffext {

namespace {

// Univariate polynomials over F_q, coefficients low to high, no trailing zeros.
using Upoly = std::vector<Elem>;

void trim(Upoly& a) {
  while (!a.empty() && a.back() == Elem{0}) a.pop_back();
}

Upoly u_sub(const Field& f, const Upoly& a, const Upoly& b) {
  Upoly out(std::max(a.size(), b.size()), f.zero());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = f.sub(out[i], b[i]);
  trim(out);
  return out;
}

Upoly u_mul(const Field& f, const Upoly& a, const Upoly& b) {
  if (a.empty() || b.empty()) return {};
  Upoly out(a.size() + b.size() - 1, f.zero());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = f.add(out[i + j], f.mul(a[i], b[j]));
  }
  trim(out);
  return out;
}

// Quotient and remainder of a by nonzero b.
std::pair<Upoly, Upoly> u_divmod(const Field& f, Upoly a, const Upoly& b) {
  if (a.size() < b.size()) return {{}, a};
  Upoly quo(a.size() - b.size() + 1, f.zero());
  const Elem lead_inv = f.inv(b.back());
  for (std::size_t shift = quo.size(); shift-- > 0;) {
    const Elem c = f.mul(a[shift + b.size() - 1], lead_inv);
    quo[shift] = c;
    for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] = f.sub(a[shift + j], f.mul(c, b[j]));
  }
  trim(a);
  trim(quo);
  return {quo, a};
}

Upoly u_gcd(const Field& f, Upoly a, Upoly b) {
  while (!b.empty()) {
    Upoly r = u_divmod(f, a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    const Elem inv = f.inv(a.back());
    for (Elem& c : a) c = f.mul(c, inv);
  }
  return a;
}

// Polynomials in x2 with coefficients in F_q[x1], low to high in x2.
using Bpoly = std::vector<Upoly>;

void trim(Bpoly& a) {
  while (!a.empty() && a.back().empty()) a.pop_back();
}

Bpoly to_bpoly(const BivariatePoly& p) {
  Bpoly out;
  for (const auto& [e, c] : p.terms()) {
    if (out.size() <= e.second) out.resize(e.second + 1);
    Upoly& u = out[e.second];
    if (u.size() <= e.first) u.resize(e.first + 1, Elem{0});
    u[e.first] = c;
  }
  for (Upoly& u : out) trim(u);
  trim(out);
  return out;
}

Upoly content(const Field& f, const Bpoly& a) {
  Upoly g;
  for (const Upoly& c : a) g = u_gcd(f, g, c);
  return g;
}

Bpoly primitive_part(const Field& f, const Bpoly& a) {
  const Upoly c = content(f, a);
  Bpoly out;
  for (const Upoly& coef : a) out.push_back(u_divmod(f, coef, c).first);
  trim(out);
  return out;
}

// lc(b)^(deg a - deg b + 1) a mod b, in x2.
Bpoly pseudo_remainder(const Field& f, Bpoly a, const Bpoly& b) {
  const Upoly& lb = b.back();
  while (!a.empty() && a.size() >= b.size()) {
    const Upoly la = a.back();
    const std::size_t shift = a.size() - b.size();
    for (Upoly& c : a) c = u_mul(f, c, lb);
    for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] = u_sub(f, a[shift + j], u_mul(f, la, b[j]));
    trim(a);
  }
  return a;
}

}  // namespace

bool shares_component(const BivariatePoly& a, const BivariatePoly& b) {
  if (!(a.field() == b.field())) throw Error(ErrorCode::FieldMismatch, "polynomials over different fields");
  const Field& f = a.field();
  Bpoly pa = to_bpoly(a);
  Bpoly pb = to_bpoly(b);
  if (u_gcd(f, content(f, pa), content(f, pb)).size() > 1) return true;
  pa = primitive_part(f, pa);
  pb = primitive_part(f, pb);
  if (pa.size() < pb.size()) std::swap(pa, pb);
  while (pb.size() > 1) {
    Bpoly r = pseudo_remainder(f, pa, pb);
    pa = std::move(pb);
    pb = r.empty() ? Bpoly{} : primitive_part(f, r);
  }
  // pb empty: pa is the gcd up to units; pb constant in x2 and primitive: coprime
  return pb.empty() && pa.size() > 1;
}

BivariatePoly random_poly(const Field& field, std::uint32_t max_degree, Rng& rng) {
  if (max_degree >= field.p()) throw Error(ErrorCode::DegreeExceedsCharacteristic, "degree must stay below p");
  for (;;) {
    const auto d = static_cast<std::uint32_t>(rng.below(max_degree + 1));
    BivariatePoly::Terms terms;
    for (std::uint32_t i = 0; i <= d; ++i) {
      for (std::uint32_t j = 0; i + j <= d; ++j) {
        // each monomial present with probability 1/2
        if (rng.below(2) == 0) continue;
        const Elem c{static_cast<std::uint32_t>(rng.below(field.q()))};
        if (c != field.zero()) terms[{i, j}] = c;
      }
    }
    if (!terms.empty()) return BivariatePoly(field, std::move(terms));
  }
}

}  // namespace ffext
