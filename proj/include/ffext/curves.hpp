#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffext/finite_field.hpp"
#include "ffext/plane_fourier.hpp"
#include "ffext/rng.hpp"

namespace ffext {

/// A nonzero polynomial in F_q[x1, x2] with degree below the characteristic.
class BivariatePoly {
 public:
  using Exponents = std::pair<std::uint32_t, std::uint32_t>;
  using Terms = std::map<Exponents, Elem>;

  /// Zero coefficients are dropped. Throws ZeroPolynomial or
  /// DegreeExceedsCharacteristic.
  BivariatePoly(Field field, Terms terms);

  /// x1^n + x2^n.
  static BivariatePoly norm(const Field& field, std::uint32_t n);
  /// a1 x1^d + a2 x2^d.
  static BivariatePoly diagonal(const Field& field, Elem a1, Elem a2, std::uint32_t d);

  const Field& field() const noexcept { return field_; }
  const Terms& terms() const noexcept { return terms_; }
  std::uint32_t degree() const noexcept { return degree_; }
  Elem coeff(std::uint32_t i, std::uint32_t j) const noexcept;

  Elem eval(PlanePoint x) const noexcept;
  /// P at every plane point, in canonical order.
  std::vector<Elem> eval_plane() const;

  /// P - c (used for level sets P = c).
  BivariatePoly minus_constant(Elem c) const;

  /// Canonical text, accepted back by parse_poly.
  std::string to_string() const;

  friend bool operator==(const BivariatePoly& a, const BivariatePoly& b) {
    return a.field_ == b.field_ && a.terms_ == b.terms_;
  }

 private:
  Field field_;
  Terms terms_;
  std::uint32_t degree_ = 0;
};

/// Parses integer-coefficient polynomials in x1, x2 with + - * ^ and
/// parentheses. Coefficients reduce mod p; "{c0,c1,...}" denotes a field
/// element by its power-basis coordinates.
BivariatePoly parse_poly(std::string_view text, const Field& field);

/// The zero set of a polynomial, found by exhaustive enumeration.
class Variety {
 public:
  explicit Variety(BivariatePoly poly);

  const BivariatePoly& poly() const noexcept { return poly_; }
  const Field& field() const noexcept { return poly_.field(); }
  /// Plane indices of the points, sorted ascending.
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }
  std::vector<PlanePoint> points() const;
  std::size_t cardinality() const noexcept { return indices_.size(); }
  bool contains(PlanePoint x) const noexcept { return member_[point_index(field(), x)] != 0; }
  bool contains_index(std::uint32_t i) const noexcept { return member_[i] != 0; }

 private:
  BivariatePoly poly_;
  std::vector<std::uint32_t> indices_;
  std::vector<char> member_;
};

Variety variety_of(const BivariatePoly& poly);

/// The affine line {x : a x1 + b x2 = c}, normalized so the first nonzero
/// of (a, b) is 1.
struct Line {
  Elem a;
  Elem b;
  Elem c;

  friend constexpr bool operator==(Line, Line) = default;
  friend constexpr auto operator<=>(Line, Line) = default;
};

/// All q^2 + q affine lines of the plane.
std::vector<Line> all_lines(const Field& field);
std::vector<PlanePoint> points_on(const Field& field, Line line);
std::string to_string(const Field& field, Line line);

/// A line on which the polynomial vanishes identically, if any. Since
/// deg P < p <= q, vanishing at all q points of a line means its linear form
/// divides P, so this detects exactly the presence of a linear factor.
std::optional<Line> contains_line(const BivariatePoly& poly);

/// Lines meeting the variety in at least `min_points` points.
std::vector<Line> lines_meeting(const Variety& v, std::size_t min_points = 2);

struct IntersectionCount {
  std::size_t count = 0;
  std::uint64_t bezout_bound = 0;
  /// Raised when count exceeds deg(a) * deg(b): the curves share a component.
  bool shared_component = false;
};

IntersectionCount intersect_count(const Variety& a, const Variety& b);

/// sum_{x in V} chi(x.m).
Complex variety_character_sum(const Variety& v, PlanePoint m);

struct KatzProfile {
  double max_abs = 0.0;       // max over m != 0 of |sum_{x in V} chi(x.m)|
  PlanePoint argmax{};
  double constant = 0.0;      // max_abs / sqrt(q)
};

KatzProfile katz_profile(const Variety& v);

/// |V| / (deg P * q); at most 1 by Schwartz-Zippel.
double schwartz_zippel_margin(const Variety& v);

nlohmann::json to_json(const Variety& v);

/// True when P and Q have a nonconstant common factor in F_q[x1, x2],
/// decided algebraically (content gcd in F_q[x1], then a primitive
/// pseudo-remainder sequence in x2), without enumerating points.
bool shares_component(const BivariatePoly& a, const BivariatePoly& b);

/// A random nonzero polynomial of total degree at most `max_degree` (< p).
BivariatePoly random_poly(const Field& field, std::uint32_t max_degree, Rng& rng);

}  // namespace ffext
