#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ffext/error.hpp"

namespace ffext {

using Complex = std::complex<double>;

/// An element of F_q, stored as its index in the canonical ordering
/// index = c_0 + c_1 p + ... + c_{k-1} p^{k-1}, where (c_i) are the
/// coordinates in the power basis of the field modulus.
struct Elem {
  std::uint32_t v = 0;

  friend constexpr bool operator==(Elem, Elem) = default;
  friend constexpr auto operator<=>(Elem, Elem) = default;
};

struct Tolerances {
  double identity = 1e-9;
  double estimate = 1e-6;
};

/// F_q for q = p^k with p odd. A Field is a cheap handle onto immutable
/// shared tables, so copies are free and safe to share across threads.
class Field {
 public:
  static constexpr std::uint32_t kDefaultCap = 1u << 14;

  /// Builds F_{p^k} using the lexicographically smallest monic irreducible
  /// modulus of degree k (coefficients compared from degree 0 upward).
  static Field create(std::uint32_t p, std::uint32_t k = 1, std::uint32_t cap = kDefaultCap);

  /// Builds F_q from its order; q must be an odd prime power.
  static Field of_order(std::uint32_t q, std::uint32_t cap = kDefaultCap);

  std::uint32_t p() const noexcept;
  std::uint32_t k() const noexcept;
  std::uint32_t q() const noexcept;

  /// Modulus coefficients, low to high degree; size k + 1 and monic.
  std::span<const std::uint32_t> modulus() const noexcept;
  std::string modulus_string() const;

  Elem zero() const noexcept { return Elem{0}; }
  Elem one() const noexcept { return Elem{1}; }
  Elem element(std::uint32_t index) const;
  /// Image of an integer in the prime subfield.
  Elem from_int(std::int64_t n) const noexcept;
  Elem from_coeffs(std::span<const std::uint32_t> coeffs) const;
  std::vector<std::uint32_t> coeffs(Elem a) const;
  bool in_prime_subfield(Elem a) const noexcept { return a.v < p(); }

  Elem add(Elem a, Elem b) const noexcept;
  Elem sub(Elem a, Elem b) const noexcept;
  Elem neg(Elem a) const noexcept;
  Elem mul(Elem a, Elem b) const noexcept;
  Elem inv(Elem a) const;
  Elem div(Elem a, Elem b) const;
  Elem pow(Elem a, std::uint64_t e) const noexcept;

  /// Absolute trace to F_p, returned as an integer in [0, p).
  std::uint32_t trace(Elem a) const noexcept;
  /// Tr(a * b); the phase index of chi(a * b).
  std::uint32_t trace_product(Elem a, Elem b) const noexcept { return trace(mul(a, b)); }

  /// exp(2 pi i j / p) for j in [0, p).
  const Complex& root_of_unity(std::uint32_t j) const noexcept;
  /// Canonical additive character exp(2 pi i Tr(a) / p).
  const Complex& chi(Elem a) const noexcept { return root_of_unity(trace(a)); }
  /// Quadratic character: 0 at 0, +1 on nonzero squares, -1 otherwise.
  int eta(Elem a) const noexcept;

  /// Sum over t != 0 of eta(t) chi(t), by direct summation.
  Complex gauss_sum() const;
  /// (-1)^{k-1} sqrt(q) when p = 1 mod 4, (-1)^{k-1} i^k sqrt(q) when p = 3 mod 4.
  Complex gauss_sum_closed_form() const;

  /// A generator of the multiplicative group.
  Elem generator() const noexcept;
  /// Discrete log base generator(); a must be nonzero.
  std::uint32_t log(Elem a) const;

  std::string to_string(Elem a) const;

  friend bool operator==(const Field& a, const Field& b) noexcept {
    return a.t_ == b.t_ || (a.p() == b.p() && a.k() == b.k());
  }

 private:
  struct Tables;
  explicit Field(std::shared_ptr<const Tables> t) : t_(std::move(t)) {}
  std::shared_ptr<const Tables> t_;
};

bool is_prime(std::uint64_t n) noexcept;

/// Returns (p, k) with q = p^k, or nullopt-like (0, 0) if q is not a prime power.
std::pair<std::uint32_t, std::uint32_t> prime_power_decompose(std::uint64_t q) noexcept;

}  // namespace ffext
