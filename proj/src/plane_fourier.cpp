#include "ffext/plane_fourier.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ffext {

std::string_view to_string(Space s) noexcept { return s == Space::Function ? "dx" : "dm"; }

Space space_from_string(std::string_view s) {
  if (s == "dx") return Space::Function;
  if (s == "dm") return Space::Frequency;
  throw Error(ErrorCode::InvalidArgument, "unknown space tag '" + std::string(s) + "'");
}

Elem dot(const Field& f, PlanePoint a, PlanePoint b) noexcept {
  return f.add(f.mul(a.x1, b.x1), f.mul(a.x2, b.x2));
}
PlanePoint add(const Field& f, PlanePoint a, PlanePoint b) noexcept { return {f.add(a.x1, b.x1), f.add(a.x2, b.x2)}; }
PlanePoint sub(const Field& f, PlanePoint a, PlanePoint b) noexcept { return {f.sub(a.x1, b.x1), f.sub(a.x2, b.x2)}; }
PlanePoint neg(const Field& f, PlanePoint a) noexcept { return {f.neg(a.x1), f.neg(a.x2)}; }

PhaseTable::PhaseTable(const Field& field) : q_(field.q()), p_(field.p()) {
  if (q_ > kPlaneCap) {
    throw Error(ErrorCode::CapExceeded, "plane operations require q <= " + std::to_string(kPlaneCap));
  }
  trace_.resize(static_cast<std::size_t>(q_) * q_);
  for (std::uint32_t a = 0; a < q_; ++a) {
    for (std::uint32_t b = 0; b < q_; ++b) {
      trace_[static_cast<std::size_t>(a) * q_ + b] = static_cast<std::uint16_t>(field.trace_product(Elem{a}, Elem{b}));
    }
  }
}

std::shared_ptr<const PhaseTable> PhaseTable::of(const Field& field) {
  static std::mutex mu;
  static std::map<std::pair<std::uint32_t, std::uint32_t>, std::shared_ptr<const PhaseTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{field.p(), field.k()}];
  if (!slot) slot = std::make_shared<const PhaseTable>(field);
  return slot;
}

PlaneFunction::PlaneFunction(Field field, Space space)
    : field_(std::move(field)), space_(space), values_(plane_size(field_), Complex{}) {
  support_ = std::vector<std::uint32_t>{};
}

PlaneFunction::PlaneFunction(Field field, Space space, std::vector<Complex> values)
    : field_(std::move(field)), space_(space), values_(std::move(values)) {
  if (values_.size() != plane_size(field_)) {
    throw Error(ErrorCode::InvalidArgument, "plane function needs exactly q^2 values");
  }
  for (const Complex& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::InvalidArgument, "plane function values must be finite");
    }
  }
}

PlaneFunction::PlaneFunction(Field field, Space space, std::vector<Complex> values, std::vector<std::uint32_t> support)
    : PlaneFunction(std::move(field), space, std::move(values)) {
  std::vector<char> on(values_.size(), 0);
  for (std::uint32_t i : support) {
    if (i >= values_.size()) throw Error(ErrorCode::InvalidArgument, "support index out of range");
    on[i] = 1;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!on[i] && values_[i] != Complex{}) {
      throw Error(ErrorCode::SupportViolation, "value is nonzero off the declared support");
    }
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  support_ = std::move(support);
}

PlaneFunction PlaneFunction::constant(Field field, Space space, Complex value) {
  const std::uint32_t n = plane_size(field);
  return PlaneFunction(std::move(field), space, std::vector<Complex>(n, value));
}

PlaneFunction PlaneFunction::point_mass(Field field, Space space, PlanePoint at, Complex value) {
  std::vector<Complex> v(plane_size(field), Complex{});
  const std::uint32_t idx = point_index(field, at);
  v[idx] = value;
  return PlaneFunction(std::move(field), space, std::move(v), {idx});
}

PlaneFunction PlaneFunction::indicator(Field field, Space space, std::span<const PlanePoint> points) {
  std::vector<std::uint32_t> idx;
  idx.reserve(points.size());
  for (const PlanePoint& x : points) idx.push_back(point_index(field, x));
  return indicator_indices(std::move(field), space, idx);
}

PlaneFunction PlaneFunction::indicator_indices(Field field, Space space, std::span<const std::uint32_t> indices) {
  std::vector<Complex> v(plane_size(field), Complex{});
  for (std::uint32_t i : indices) {
    if (i >= v.size()) throw Error(ErrorCode::InvalidArgument, "point index out of range");
    v[i] = 1.0;
  }
  return PlaneFunction(std::move(field), space, std::move(v), std::vector<std::uint32_t>(indices.begin(), indices.end()));
}

std::vector<std::uint32_t> PlaneFunction::nonzero_indices() const {
  if (support_) return *support_;
  std::vector<std::uint32_t> idx;
  for (std::uint32_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != Complex{}) idx.push_back(i);
  }
  return idx;
}

PlaneFunction PlaneFunction::conj() const {
  std::vector<Complex> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::conj(values_[i]);
  if (support_) return PlaneFunction(field_, space_, std::move(v), *support_);
  return PlaneFunction(field_, space_, std::move(v));
}

PlaneFunction PlaneFunction::retagged(Space space) const {
  PlaneFunction out = *this;
  out.space_ = space;
  return out;
}

std::vector<Complex> character_transform(const Field& field, std::span<const std::uint32_t> points,
                                         std::span<const Complex> weights,
                                         std::span<const std::uint32_t> outputs, int sign) {
  const auto table = PhaseTable::of(field);
  const std::uint32_t p = field.p();
  std::vector<Complex> roots(p);
  for (std::uint32_t j = 0; j < p; ++j) {
    roots[j] = field.root_of_unity(sign >= 0 ? j : (p - j) % p);
  }
  std::vector<Complex> out(outputs.size());
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    Complex acc{};
    for (std::size_t j = 0; j < points.size(); ++j) {
      acc += weights[j] * roots[table->dot_phase(outputs[o], points[j])];
    }
    out[o] = acc;
  }
  return out;
}

namespace {

void require_space(const PlaneFunction& f, Space expected, const char* op) {
  if (f.space() != expected) {
    throw Error(ErrorCode::SpaceMismatch, std::string(op) + " expects a " + std::string(to_string(expected)) +
                                              "-tagged function, got " + std::string(to_string(f.space())));
  }
}

PlaneFunction transform(const PlaneFunction& f, int sign, double scale, Space out_space) {
  const Field& field = f.field();
  const auto nz = f.nonzero_indices();
  std::vector<Complex> w(nz.size());
  for (std::size_t i = 0; i < nz.size(); ++i) w[i] = f[nz[i]];
  std::vector<std::uint32_t> all(plane_size(field));
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  auto out = character_transform(field, nz, w, all, sign);
  if (scale != 1.0) {
    for (Complex& v : out) v *= scale;
  }
  return PlaneFunction(field, out_space, std::move(out));
}

}  // namespace

PlaneFunction forward_ft(const PlaneFunction& f) {
  require_space(f, Space::Function, "forward_ft");
  const double q = f.field().q();
  return transform(f, -1, 1.0 / (q * q), Space::Frequency);
}

PlaneFunction inverse_ft(const PlaneFunction& g) {
  require_space(g, Space::Frequency, "inverse_ft");
  return transform(g, +1, 1.0, Space::Function);
}

PlaneFunction dual_ft(const PlaneFunction& g) {
  require_space(g, Space::Frequency, "dual_ft");
  return transform(g, -1, 1.0, Space::Function);
}

PlaneFunction convolve(const PlaneFunction& f, const PlaneFunction& h) {
  require_space(f, Space::Function, "convolve");
  require_space(h, Space::Function, "convolve");
  if (!(f.field() == h.field())) throw Error(ErrorCode::FieldMismatch, "convolve over different fields");
  const Field& field = f.field();
  const double q = field.q();
  const auto nf = f.nonzero_indices();
  const auto nh = h.nonzero_indices();
  std::vector<Complex> out(plane_size(field), Complex{});
  // (f*h)(y) = q^-2 sum_x f(y-x) h(x): every pair (u, x) with u = y - x
  // contributes f(u) h(x) at y = u + x.
  for (std::uint32_t iu : nf) {
    const PlanePoint u = point_at(field, iu);
    for (std::uint32_t ix : nh) {
      const PlanePoint x = point_at(field, ix);
      out[point_index(field, add(field, u, x))] += f[iu] * h[ix];
    }
  }
  const double scale = 1.0 / (q * q);
  for (Complex& v : out) v *= scale;
  return PlaneFunction(field, Space::Function, std::move(out));
}

double norm_lp(const PlaneFunction& f, double exponent) {
  if (!(exponent >= 1.0)) throw Error(ErrorCode::BadExponent, "exponent must be >= 1");
  const auto vals = f.values();
  if (std::isinf(exponent)) {
    double m = 0.0;
    for (const Complex& v : vals) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  for (const Complex& v : vals) sum += std::pow(std::abs(v), exponent);
  if (f.space() == Space::Function) sum /= static_cast<double>(vals.size());
  return std::pow(sum, 1.0 / exponent);
}

nlohmann::json to_json(const PlaneFunction& f) {
  nlohmann::json values = nlohmann::json::array();
  for (const Complex& v : f.values()) values.push_back({v.real(), v.imag()});
  const auto mod = f.field().modulus();
  return {{"p", f.field().p()},
          {"k", f.field().k()},
          {"modulus", std::vector<std::uint32_t>(mod.begin(), mod.end())},
          {"space", std::string(to_string(f.space()))},
          {"values", std::move(values)}};
}

PlaneFunction plane_function_from_json(const nlohmann::json& j) {
  const Field field = Field::create(j.at("p").get<std::uint32_t>(), j.at("k").get<std::uint32_t>());
  if (j.contains("modulus")) {
    const auto mod = j.at("modulus").get<std::vector<std::uint32_t>>();
    const auto ours = field.modulus();
    if (!std::equal(mod.begin(), mod.end(), ours.begin(), ours.end())) {
      throw Error(ErrorCode::FieldMismatch, "serialized modulus differs from the canonical one");
    }
  }
  const Space space = space_from_string(j.at("space").get<std::string>());
  const auto& vals = j.at("values");
  std::vector<Complex> v;
  v.reserve(vals.size());
  for (const auto& pair : vals) v.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  return PlaneFunction(field, space, std::move(v));
}

std::string to_csv(const PlaneFunction& f) {
  std::ostringstream os;
  os.precision(17);
  os << "x1,x2,re,im\n";
  const Field& field = f.field();
  for (std::uint32_t i = 0; i < plane_size(field); ++i) {
    const PlanePoint x = point_at(field, i);
    os << x.x1.v << ',' << x.x2.v << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
  return os.str();
}

}  // namespace ffext
