#include "ffext/finite_field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ffext {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::EvenCharacteristic: return "EvenCharacteristic";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegreeExceedsCharacteristic: return "DegreeExceedsCharacteristic";
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::FieldMismatch: return "FieldMismatch";
    case ErrorCode::EmptyVariety: return "EmptyVariety";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::WrongPolynomial: return "WrongPolynomial";
    case ErrorCode::ZeroFrequency: return "ZeroFrequency";
    case ErrorCode::NonDiagonalPolynomial: return "NonDiagonalPolynomial";
    case ErrorCode::WrongResidueClass: return "WrongResidueClass";
    case ErrorCode::ZeroRadius: return "ZeroRadius";
    case ErrorCode::BadSizes: return "BadSizes";
    case ErrorCode::EmptySet: return "EmptySet";
  }
  return "Unknown";
}

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::pair<std::uint32_t, std::uint32_t> prime_power_decompose(std::uint64_t q) noexcept {
  if (q < 2) return {0, 0};
  std::uint64_t p = 0;
  for (std::uint64_t d = 2; d * d <= q; ++d) {
    if (q % d == 0) {
      p = d;
      break;
    }
  }
  if (p == 0) return {static_cast<std::uint32_t>(q), 1};
  std::uint32_t k = 0;
  while (q % p == 0) {
    q /= p;
    ++k;
  }
  if (q != 1) return {0, 0};
  return {static_cast<std::uint32_t>(p), k};
}

namespace {

using Poly = std::vector<std::uint32_t>;  // F_p[x], low to high degree

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// Remainder of a modulo a monic b.
Poly poly_mod(Poly a, const Poly& b, std::uint32_t p) {
  trim(a);
  const std::size_t db = b.size() - 1;
  while (a.size() > db) {
    const std::uint32_t lead = a.back();
    const std::size_t shift = a.size() - 1 - db;
    for (std::size_t i = 0; i <= db; ++i) {
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + static_cast<std::uint64_t>(p - lead) * b[i]) % p);
    }
    trim(a);
  }
  return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      c[i + j] = static_cast<std::uint32_t>((c[i + j] + static_cast<std::uint64_t>(a[i]) * b[j]) % p);
    }
  }
  return poly_mod(std::move(c), m, p);
}

// Monic polynomial of the given degree whose lower coefficients are the
// base-p digits of `code`, with c_0 the most significant digit so that
// increasing codes enumerate in lexicographic (c_0, c_1, ...) order.
Poly monic_from_code(std::uint64_t code, std::uint32_t degree, std::uint32_t p) {
  Poly f(degree + 1, 0);
  f[degree] = 1;
  for (std::uint32_t i = degree; i-- > 0;) {
    f[i] = static_cast<std::uint32_t>(code % p);
    code /= p;
  }
  return f;
}

bool is_irreducible(const Poly& f, std::uint32_t p) {
  const std::uint32_t k = static_cast<std::uint32_t>(f.size() - 1);
  for (std::uint32_t d = 1; d <= k / 2; ++d) {
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < d; ++i) count *= p;
    for (std::uint64_t code = 0; code < count; ++code) {
      if (poly_mod(f, monic_from_code(code, d, p), p).empty()) return false;
    }
  }
  return true;
}

}  // namespace

struct Field::Tables {
  std::uint32_t p = 0;
  std::uint32_t k = 0;
  std::uint32_t q = 0;
  Poly modulus;
  std::vector<std::uint32_t> pow_p;       // p^i, i < k
  std::vector<std::uint32_t> log;         // log[a], a != 0
  std::vector<std::uint32_t> antilog;     // antilog[i] for i < 2(q-1)
  std::vector<std::uint16_t> add_table;   // q*q when q is small, empty otherwise
  std::vector<std::uint32_t> neg;
  std::vector<std::uint32_t> trace;
  std::vector<Complex> roots;

  std::uint32_t digit_add(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t out = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint32_t da = (a / pow_p[i]) % p;
      const std::uint32_t db = (b / pow_p[i]) % p;
      out += ((da + db) % p) * pow_p[i];
    }
    return out;
  }
};

namespace {

std::uint32_t index_of(const Poly& c, const std::vector<std::uint32_t>& pow_p) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * pow_p[i];
  return v;
}

Poly coeffs_of(std::uint32_t v, std::uint32_t p, std::uint32_t k) {
  Poly c(k, 0);
  for (std::uint32_t i = 0; i < k; ++i) {
    c[i] = v % p;
    v /= p;
  }
  return c;
}

}  // namespace

Field Field::create(std::uint32_t p, std::uint32_t k, std::uint32_t cap) {
  if (!is_prime(p)) throw Error(ErrorCode::NotPrime, std::to_string(p) + " is not prime");
  if (p == 2) throw Error(ErrorCode::EvenCharacteristic, "characteristic 2 is not supported");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "extension degree must be at least 1");
  std::uint64_t q64 = 1;
  for (std::uint32_t i = 0; i < k; ++i) {
    q64 *= p;
    if (q64 > cap) {
      throw Error(ErrorCode::CapExceeded,
                  std::to_string(p) + "^" + std::to_string(k) + " exceeds cap " + std::to_string(cap));
    }
  }

  auto t = std::make_shared<Tables>();
  t->p = p;
  t->k = k;
  t->q = static_cast<std::uint32_t>(q64);
  const std::uint32_t q = t->q;
  t->pow_p.resize(k);
  for (std::uint32_t i = 0, v = 1; i < k; ++i, v *= p) t->pow_p[i] = v;

  const std::uint64_t candidates = q64;  // p^k monic polynomials of degree k
  for (std::uint64_t code = 0; code < candidates; ++code) {
    Poly f = monic_from_code(code, k, p);
    if (is_irreducible(f, p)) {
      t->modulus = std::move(f);
      break;
    }
  }

  // Multiplicative group: find the smallest-index primitive element.
  t->log.assign(q, 0);
  t->antilog.assign(2 * (q - 1), 0);
  for (std::uint32_t g = 1; g < q; ++g) {
    const Poly gp = coeffs_of(g, p, k);
    Poly cur{1};
    std::uint32_t order = 0;
    do {
      cur = poly_mulmod(cur, gp, t->modulus, p);
      ++order;
    } while (!(cur.size() == 1 && cur[0] == 1) && order < q);
    if (order != q - 1) continue;
    cur = Poly{1};
    for (std::uint32_t i = 0; i < q - 1; ++i) {
      Poly padded = cur;
      padded.resize(k, 0);
      t->antilog[i] = index_of(padded, t->pow_p);
      cur = poly_mulmod(cur, gp, t->modulus, p);
    }
    break;
  }
  for (std::uint32_t i = 0; i < q - 1; ++i) {
    t->antilog[i + q - 1] = t->antilog[i];
    t->log[t->antilog[i]] = i;
  }

  if (q <= 1024) {
    t->add_table.resize(static_cast<std::size_t>(q) * q);
    for (std::uint32_t a = 0; a < q; ++a) {
      for (std::uint32_t b = 0; b < q; ++b) {
        t->add_table[static_cast<std::size_t>(a) * q + b] = static_cast<std::uint16_t>(t->digit_add(a, b));
      }
    }
  }
  t->neg.resize(q);
  for (std::uint32_t a = 0; a < q; ++a) {
    std::uint32_t out = 0;
    for (std::uint32_t i = 0; i < k; ++i) out += ((p - (a / t->pow_p[i]) % p) % p) * t->pow_p[i];
    t->neg[a] = out;
  }

  t->roots.resize(p);
  for (std::uint32_t j = 0; j < p; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(p);
    t->roots[j] = Complex(std::cos(angle), std::sin(angle));
  }

  Field field(t);
  // Tr(a) = a + a^p + ... + a^{p^{k-1}} lands in F_p, i.e. index < p.
  t->trace.resize(q);
  for (std::uint32_t a = 0; a < q; ++a) {
    Elem acc{0};
    Elem frob{a};
    for (std::uint32_t i = 0; i < k; ++i) {
      acc = field.add(acc, frob);
      frob = field.pow(frob, p);
    }
    t->trace[a] = acc.v;
  }
  return field;
}

Field Field::of_order(std::uint32_t q, std::uint32_t cap) {
  const auto [p, k] = prime_power_decompose(q);
  if (p == 0) throw Error(ErrorCode::NotPrime, std::to_string(q) + " is not a prime power");
  return create(p, k, cap);
}

std::uint32_t Field::p() const noexcept { return t_->p; }
std::uint32_t Field::k() const noexcept { return t_->k; }
std::uint32_t Field::q() const noexcept { return t_->q; }

std::span<const std::uint32_t> Field::modulus() const noexcept { return t_->modulus; }

std::string Field::modulus_string() const {
  if (t_->k == 1) return "x";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = t_->modulus.size(); i-- > 0;) {
    const std::uint32_t c = t_->modulus[i];
    if (c == 0) continue;
    if (!first) os << " + ";
    first = false;
    if (i == 0) {
      os << c;
    } else {
      if (c != 1) os << c << "*";
      os << "x";
      if (i > 1) os << "^" << i;
    }
  }
  return os.str();
}

Elem Field::element(std::uint32_t index) const {
  if (index >= t_->q) throw Error(ErrorCode::InvalidArgument, "element index out of range");
  return Elem{index};
}

Elem Field::from_int(std::int64_t n) const noexcept {
  const auto p = static_cast<std::int64_t>(t_->p);
  return Elem{static_cast<std::uint32_t>(((n % p) + p) % p)};
}

Elem Field::from_coeffs(std::span<const std::uint32_t> c) const {
  if (c.size() != t_->k) throw Error(ErrorCode::InvalidArgument, "expected k coefficients");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] >= t_->p) throw Error(ErrorCode::InvalidArgument, "coefficient out of range");
    v += c[i] * t_->pow_p[i];
  }
  return Elem{v};
}

std::vector<std::uint32_t> Field::coeffs(Elem a) const { return coeffs_of(a.v, t_->p, t_->k); }

Elem Field::add(Elem a, Elem b) const noexcept {
  if (t_->k == 1) return Elem{(a.v + b.v) % t_->p};
  if (!t_->add_table.empty()) return Elem{t_->add_table[static_cast<std::size_t>(a.v) * t_->q + b.v]};
  return Elem{t_->digit_add(a.v, b.v)};
}

Elem Field::neg(Elem a) const noexcept { return Elem{t_->neg[a.v]}; }

Elem Field::sub(Elem a, Elem b) const noexcept { return add(a, neg(b)); }

Elem Field::mul(Elem a, Elem b) const noexcept {
  if (a.v == 0 || b.v == 0) return Elem{0};
  return Elem{t_->antilog[t_->log[a.v] + t_->log[b.v]]};
}

Elem Field::inv(Elem a) const {
  if (a.v == 0) throw Error(ErrorCode::ZeroInverse, "inverse of zero");
  const std::uint32_t l = t_->log[a.v];
  return Elem{t_->antilog[(t_->q - 1 - l) % (t_->q - 1)]};
}

Elem Field::div(Elem a, Elem b) const { return mul(a, inv(b)); }

Elem Field::pow(Elem a, std::uint64_t e) const noexcept {
  if (e == 0) return one();
  if (a.v == 0) return zero();
  const std::uint64_t l = (static_cast<std::uint64_t>(t_->log[a.v]) * (e % (t_->q - 1))) % (t_->q - 1);
  return Elem{t_->antilog[l]};
}

std::uint32_t Field::trace(Elem a) const noexcept { return t_->trace[a.v]; }

const Complex& Field::root_of_unity(std::uint32_t j) const noexcept { return t_->roots[j % t_->p]; }

int Field::eta(Elem a) const noexcept {
  if (a.v == 0) return 0;
  return pow(a, (t_->q - 1) / 2) == one() ? 1 : -1;
}

Complex Field::gauss_sum() const {
  Complex sum{0.0, 0.0};
  for (std::uint32_t t = 1; t < t_->q; ++t) {
    sum += static_cast<double>(eta(Elem{t})) * chi(Elem{t});
  }
  return sum;
}

Complex Field::gauss_sum_closed_form() const {
  const double root_q = std::sqrt(static_cast<double>(t_->q));
  const double sign = (t_->k % 2 == 1) ? 1.0 : -1.0;  // (-1)^{k-1}
  if (t_->p % 4 == 1) return Complex(sign * root_q, 0.0);
  // i^k cycles through 1, i, -1, -i
  static constexpr double re[4] = {1.0, 0.0, -1.0, 0.0};
  static constexpr double im[4] = {0.0, 1.0, 0.0, -1.0};
  const std::uint32_t r = t_->k % 4;
  return Complex(sign * re[r] * root_q, sign * im[r] * root_q);
}

Elem Field::generator() const noexcept { return Elem{t_->antilog[1 % (t_->q - 1)]}; }

std::uint32_t Field::log(Elem a) const {
  if (a.v == 0) throw Error(ErrorCode::InvalidArgument, "log of zero");
  return t_->log[a.v];
}

std::string Field::to_string(Elem a) const {
  if (t_->k == 1) return std::to_string(a.v);
  const auto c = coeffs(a);
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << ")";
  return os.str();
}

}  // namespace ffext
