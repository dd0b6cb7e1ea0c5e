#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffext/finite_field.hpp"

namespace ffext {

/// Which measure a plane function lives under: the normalized counting
/// measure dx of the function space, or the counting measure dm of the
/// frequency space. Transforms and norms dispatch on this tag.
enum class Space { Function, Frequency };

std::string_view to_string(Space s) noexcept;
Space space_from_string(std::string_view s);

struct PlanePoint {
  Elem x1;
  Elem x2;

  friend constexpr bool operator==(PlanePoint, PlanePoint) = default;
  friend constexpr auto operator<=>(PlanePoint, PlanePoint) = default;
};

// Row-major canonical order: index = x1 * q + x2.
inline std::uint32_t point_index(const Field& f, PlanePoint x) noexcept { return x.x1.v * f.q() + x.x2.v; }
inline PlanePoint point_at(const Field& f, std::uint32_t index) noexcept {
  return PlanePoint{Elem{index / f.q()}, Elem{index % f.q()}};
}
inline std::uint32_t plane_size(const Field& f) noexcept { return f.q() * f.q(); }

Elem dot(const Field& f, PlanePoint a, PlanePoint b) noexcept;
PlanePoint add(const Field& f, PlanePoint a, PlanePoint b) noexcept;
PlanePoint sub(const Field& f, PlanePoint a, PlanePoint b) noexcept;
PlanePoint neg(const Field& f, PlanePoint a) noexcept;

/// Largest q for which plane-level operations (transforms, tables) are built.
inline constexpr std::uint32_t kPlaneCap = 1024;

/// Tr(a*b) for every pair of field elements, so that the phase of
/// chi(m.x) is (T[m1][x1] + T[m2][x2]) mod p. One table per field, shared.
class PhaseTable {
 public:
  static std::shared_ptr<const PhaseTable> of(const Field& field);

  std::uint32_t operator()(Elem a, Elem b) const noexcept {
    return trace_[static_cast<std::size_t>(a.v) * q_ + b.v];
  }
  /// Phase index of chi(y.x), in [0, p).
  std::uint32_t dot_phase(std::uint32_t y_index, std::uint32_t x_index) const noexcept {
    const std::uint32_t y1 = y_index / q_, y2 = y_index % q_;
    const std::uint32_t x1 = x_index / q_, x2 = x_index % q_;
    const std::uint32_t s = trace_[static_cast<std::size_t>(y1) * q_ + x1] + trace_[static_cast<std::size_t>(y2) * q_ + x2];
    return s >= p_ ? s - p_ : s;
  }

  explicit PhaseTable(const Field& field);

 private:
  std::uint32_t q_;
  std::uint32_t p_;
  std::vector<std::uint16_t> trace_;
};

/// A complex-valued function on F_q^2, tagged with its measure. Immutable.
class PlaneFunction {
 public:
  PlaneFunction(Field field, Space space);
  PlaneFunction(Field field, Space space, std::vector<Complex> values);
  /// With an explicit support list; values must vanish off it.
  PlaneFunction(Field field, Space space, std::vector<Complex> values, std::vector<std::uint32_t> support);

  static PlaneFunction constant(Field field, Space space, Complex value);
  static PlaneFunction point_mass(Field field, Space space, PlanePoint at, Complex value = 1.0);
  static PlaneFunction indicator(Field field, Space space, std::span<const PlanePoint> points);
  static PlaneFunction indicator_indices(Field field, Space space, std::span<const std::uint32_t> indices);

  const Field& field() const noexcept { return field_; }
  Space space() const noexcept { return space_; }
  std::span<const Complex> values() const noexcept { return values_; }
  const Complex& operator[](std::uint32_t index) const noexcept { return values_[index]; }
  const Complex& operator()(PlanePoint x) const noexcept { return values_[point_index(field_, x)]; }
  const std::optional<std::vector<std::uint32_t>>& support() const noexcept { return support_; }

  /// Indices where the function may be nonzero: the support list when
  /// present, otherwise a scan for exactly nonzero entries.
  std::vector<std::uint32_t> nonzero_indices() const;

  PlaneFunction conj() const;
  PlaneFunction retagged(Space space) const;

 private:
  Field field_;
  Space space_;
  std::vector<Complex> values_;
  std::optional<std::vector<std::uint32_t>> support_;
};

/// f^(m) = q^-2 sum_x chi(-m.x) f(x). Input must be dx-tagged.
PlaneFunction forward_ft(const PlaneFunction& f);
/// f(x) = sum_m chi(m.x) g(m). Input must be dm-tagged.
PlaneFunction inverse_ft(const PlaneFunction& g);
/// g^(x) = sum_m chi(-x.m) g(m), no normalization. Input must be dm-tagged.
PlaneFunction dual_ft(const PlaneFunction& g);
/// (f*h)(y) = q^-2 sum_x f(y-x) h(x). Both dx-tagged.
PlaneFunction convolve(const PlaneFunction& f, const PlaneFunction& h);

/// L^p norm under the tagged measure; exponent in [1, inf].
double norm_lp(const PlaneFunction& f, double exponent);

/// sum_j w_j chi(sign * y.x_j) for each output index y. Indices are plane
/// indices in canonical order. This is the kernel under every transform.
std::vector<Complex> character_transform(const Field& field, std::span<const std::uint32_t> points,
                                         std::span<const Complex> weights,
                                         std::span<const std::uint32_t> outputs, int sign);

nlohmann::json to_json(const PlaneFunction& f);
PlaneFunction plane_function_from_json(const nlohmann::json& j);
/// CSV with header "x1,x2,re,im"; coordinates are element indices.
std::string to_csv(const PlaneFunction& f);

}  // namespace ffext
