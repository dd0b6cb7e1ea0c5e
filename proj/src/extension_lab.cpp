#include "ffext/extension_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "ffext/format.hpp"
#include "ffext/rng.hpp"

namespace ffext {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_exponent(double e, const char* name) {
  if (!(e >= 1.0)) throw Error(ErrorCode::BadExponent, std::string(name) + " must lie in [1, inf]");
}

PlaneFunction make_density(const Variety& v) {
  if (v.cardinality() == 0) throw Error(ErrorCode::EmptyVariety, "surface measure needs a nonempty variety");
  const double q = v.field().q();
  const double w = q * q / static_cast<double>(v.cardinality());
  std::vector<Complex> values(plane_size(v.field()), Complex{});
  for (std::uint32_t i : v.indices()) values[i] = w;
  return PlaneFunction(v.field(), Space::Function, std::move(values),
                       std::vector<std::uint32_t>(v.indices().begin(), v.indices().end()));
}

}  // namespace

SurfaceMeasure::SurfaceMeasure(Variety variety) : variety_(std::move(variety)), density_(make_density(variety_)) {}

double SurfaceMeasure::total_mass() const {
  double sum = 0.0;
  for (std::uint32_t i : variety_.indices()) sum += density_[i].real();
  const double q = field().q();
  return sum / (q * q);
}

PlaneFunction extend(std::span<const Complex> f_on_v, const SurfaceMeasure& sigma) {
  if (f_on_v.size() != sigma.size()) {
    throw Error(ErrorCode::SupportViolation, "function on V must have exactly |V| values");
  }
  const Field& field = sigma.field();
  std::vector<std::uint32_t> all(plane_size(field));
  std::iota(all.begin(), all.end(), 0u);
  auto out = character_transform(field, sigma.variety().indices(), f_on_v, all, +1);
  const double inv_n = 1.0 / static_cast<double>(sigma.size());
  for (Complex& v : out) v *= inv_n;
  return PlaneFunction(field, Space::Frequency, std::move(out));
}

PlaneFunction extend(const PlaneFunction& f, const SurfaceMeasure& sigma) {
  if (f.space() != Space::Function) throw Error(ErrorCode::SpaceMismatch, "extend expects a dx-tagged function");
  if (!(f.field() == sigma.field())) throw Error(ErrorCode::FieldMismatch, "extend over different fields");
  for (std::uint32_t i : f.nonzero_indices()) {
    if (f[i] != Complex{} && !sigma.variety().contains_index(i)) {
      throw Error(ErrorCode::SupportViolation, "function is nonzero off the variety");
    }
  }
  std::vector<Complex> on_v;
  on_v.reserve(sigma.size());
  for (std::uint32_t i : sigma.variety().indices()) on_v.push_back(f[i]);
  return extend(on_v, sigma);
}

double norm_on_variety(std::span<const Complex> f, double p) {
  check_exponent(p, "p");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const Complex& v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (const Complex& v : f) sum += std::norm(v);
    return std::sqrt(sum / static_cast<double>(f.size()));
  }
  for (const Complex& v : f) sum += std::pow(std::abs(v), p);
  return std::pow(sum / static_cast<double>(f.size()), 1.0 / p);
}

namespace {

double counting_norm(std::span<const Complex> g, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (const Complex& v : g) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  if (r == 4.0) {
    for (const Complex& v : g) {
      const double a = std::norm(v);
      sum += a * a;
    }
    return std::pow(sum, 0.25);
  }
  if (r == 2.0) {
    for (const Complex& v : g) sum += std::norm(v);
    return std::sqrt(sum);
  }
  for (const Complex& v : g) sum += std::pow(std::abs(v), r);
  return std::pow(sum, 1.0 / r);
}

}  // namespace

double rstar_ratio(std::span<const Complex> f_on_v, const SurfaceMeasure& sigma, double p, double r) {
  check_exponent(p, "p");
  check_exponent(r, "r");
  const double denom = norm_on_variety(f_on_v, p);
  if (denom == 0.0) throw Error(ErrorCode::ZeroFunction, "ratio undefined for f = 0");
  const PlaneFunction ext = extend(f_on_v, sigma);
  return counting_norm(ext.values(), r) / denom;
}

namespace {

class DirectObjective final : public ExtensionObjective {
 public:
  DirectObjective(const SurfaceMeasure& sigma, double r)
      : n_(sigma.size()), m_(plane_size(sigma.field())), r_(r), roots_(sigma.field().p()), ext_(m_), weight_(m_) {
    check_exponent(r, "r");
    const Field& field = sigma.field();
    for (std::uint32_t j = 0; j < roots_.size(); ++j) roots_[j] = field.root_of_unity(j);
    const auto table = PhaseTable::of(field);
    const auto idx = sigma.variety().indices();
    phase_.resize(m_ * n_);
    for (std::size_t m = 0; m < m_; ++m) {
      for (std::size_t j = 0; j < n_; ++j) {
        phase_[m * n_ + j] = static_cast<std::uint16_t>(table->dot_phase(static_cast<std::uint32_t>(m), idx[j]));
      }
    }
  }

  double value(std::span<const Complex> f) override {
    compute_extension(f);
    return counting_norm(ext_, r_);
  }

  double value_and_gradient(std::span<const Complex> f, std::span<Complex> grad) override {
    compute_extension(f);
    const double val = counting_norm(ext_, r_);
    if (std::isinf(r_)) {
      std::size_t best = 0;
      for (std::size_t m = 1; m < m_; ++m) {
        if (std::abs(ext_[m]) > std::abs(ext_[best])) best = m;
      }
      std::fill(weight_.begin(), weight_.end(), Complex{});
      weight_[best] = ext_[best];
    } else {
      for (std::size_t m = 0; m < m_; ++m) {
        const double a = std::abs(ext_[m]);
        weight_[m] = (r_ == 2.0 ? 1.0 : (a == 0.0 ? 0.0 : std::pow(a, r_ - 2.0))) * ext_[m];
      }
    }
    const double scale = (std::isinf(r_) ? 1.0 : r_ / 2.0) / static_cast<double>(n_);
    std::fill(grad.begin(), grad.end(), Complex{});
    for (std::size_t m = 0; m < m_; ++m) {
      if (weight_[m] == Complex{}) continue;
      const std::uint16_t* row = &phase_[m * n_];
      for (std::size_t j = 0; j < n_; ++j) grad[j] += weight_[m] * std::conj(roots_[row[j]]);
    }
    for (Complex& g : grad) g *= scale;
    return val;
  }

 private:
  void compute_extension(std::span<const Complex> f) {
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t m = 0; m < m_; ++m) {
      const std::uint16_t* row = &phase_[m * n_];
      Complex acc{};
      for (std::size_t j = 0; j < n_; ++j) acc += roots_[row[j]] * f[j];
      ext_[m] = acc * inv_n;
    }
  }

  std::size_t n_;
  std::size_t m_;
  double r_;
  std::vector<Complex> roots_;
  std::vector<std::uint16_t> phase_;  // phase of chi(m . v_j), row-major by m
  std::vector<Complex> ext_;
  std::vector<Complex> weight_;
};

class EnergyObjective final : public ExtensionObjective {
 public:
  explicit EnergyObjective(const SurfaceMeasure& sigma) : n_(sigma.size()) {
    const Field& field = sigma.field();
    const auto idx = sigma.variety().indices();
    std::vector<std::uint32_t> compact(plane_size(field), kUnset);
    slot_.resize(n_ * n_);
    std::uint32_t slots = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const PlanePoint a = point_at(field, idx[i]);
      for (std::size_t j = 0; j < n_; ++j) {
        const std::uint32_t s = point_index(field, add(field, a, point_at(field, idx[j])));
        if (compact[s] == kUnset) compact[s] = slots++;
        slot_[i * n_ + j] = compact[s];
      }
    }
    g_.resize(slots);
    const double q = field.q();
    const double n = static_cast<double>(n_);
    scale_ = q * q / (n * n * n * n);
  }

  double value(std::span<const Complex> f) override { return std::pow(scale_ * pair_sums(f), 0.25); }

  double value_and_gradient(std::span<const Complex> f, std::span<Complex> grad) override {
    const double total = pair_sums(f);
    for (std::size_t a = 0; a < n_; ++a) {
      Complex acc{};
      const std::uint32_t* row = &slot_[a * n_];
      for (std::size_t b = 0; b < n_; ++b) acc += g_[row[b]] * std::conj(f[b]);
      grad[a] = 2.0 * scale_ * acc;
    }
    return std::pow(scale_ * total, 0.25);
  }

 private:
  static constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();

  // Fills g(s) = sum_{a+b=s} f(a) f(b) and returns sum_s |g(s)|^2.
  double pair_sums(std::span<const Complex> f) {
    std::fill(g_.begin(), g_.end(), Complex{});
    for (std::size_t a = 0; a < n_; ++a) {
      const std::uint32_t* row = &slot_[a * n_];
      const Complex fa = f[a];
      for (std::size_t b = 0; b < n_; ++b) g_[row[b]] += fa * f[b];
    }
    double total = 0.0;
    for (const Complex& v : g_) total += std::norm(v);
    return total;
  }

  std::size_t n_;
  std::vector<std::uint32_t> slot_;
  std::vector<Complex> g_;
  double scale_ = 0.0;
};

}  // namespace

std::unique_ptr<ExtensionObjective> make_direct_objective(const SurfaceMeasure& sigma, double r) {
  return std::make_unique<DirectObjective>(sigma, r);
}

std::unique_ptr<ExtensionObjective> make_energy_objective(const SurfaceMeasure& sigma) {
  return std::make_unique<EnergyObjective>(sigma);
}

namespace {

// Counts objective evaluations for reporting.
class CountingObjective {
 public:
  explicit CountingObjective(std::unique_ptr<ExtensionObjective> inner) : inner_(std::move(inner)) {}
  double value(std::span<const Complex> f) {
    ++evaluations;
    return inner_->value(f);
  }
  double value_and_gradient(std::span<const Complex> f, std::span<Complex> grad) {
    ++evaluations;
    return inner_->value_and_gradient(f, grad);
  }
  std::size_t evaluations = 0;

 private:
  std::unique_ptr<ExtensionObjective> inner_;
};

bool normalize(std::vector<Complex>& f, double p) {
  const double nrm = norm_on_variety(f, p);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
  for (Complex& v : f) v /= nrm;
  return true;
}

void project_nonneg(std::vector<Complex>& f) {
  for (Complex& v : f) v = Complex(std::max(v.real(), 0.0), 0.0);
}

struct AscentResult {
  double ratio = 0.0;
  std::vector<Complex> f;
};

// Projected gradient ascent on N(f) over the unit L^p(V, dsigma) sphere.
// Each step moves along the tangential part of the gradient with backtracking
// from the initial step, then renormalizes.
AscentResult ascend(CountingObjective& obj, std::vector<Complex> f, double p, const AscentOptions& opt, bool nonneg) {
  if (nonneg) project_nonneg(f);
  if (!normalize(f, p)) return {};
  const std::size_t n = f.size();
  std::vector<Complex> grad(n), cand(n);
  double current = obj.value(f);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    obj.value_and_gradient(f, grad);
    double ff = 0.0;
    Complex gf{};
    for (std::size_t j = 0; j < n; ++j) {
      ff += std::norm(f[j]);
      gf += grad[j] * std::conj(f[j]);
    }
    const double gnorm_raw = std::sqrt(std::accumulate(grad.begin(), grad.end(), 0.0,
                                                       [](double s, const Complex& g) { return s + std::norm(g); }));
    if (!(gnorm_raw > 0.0)) break;
    const double along = gf.real() / ff;
    double dnorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      grad[j] -= along * f[j];
      dnorm += std::norm(grad[j]);
    }
    dnorm = std::sqrt(dnorm);
    if (dnorm <= 1e-12 * gnorm_raw) break;  // stationary on the sphere
    const double dscale = std::sqrt(static_cast<double>(n)) / dnorm;

    bool improved = false;
    double next = current;
    for (double step = opt.initial_step; step >= 1e-6; step *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) cand[j] = f[j] + step * dscale * grad[j];
      if (nonneg) project_nonneg(cand);
      if (!normalize(cand, p)) continue;
      const double v = obj.value(cand);
      if (v > current) {
        improved = true;
        next = v;
        break;
      }
    }
    if (!improved) break;
    const double gain = next - current;
    f.swap(cand);
    current = next;
    if (gain < opt.tolerance) break;
  }
  return {current, std::move(f)};
}

struct Start {
  std::string origin;
  std::vector<Complex> f;
  bool climb = true;
};

std::unique_ptr<ExtensionObjective> make_objective(const SurfaceMeasure& sigma, double r, ObjectiveKind kind) {
  if (kind == ObjectiveKind::Energy || (kind == ObjectiveKind::Auto && r == 4.0)) {
    if (r != 4.0) throw Error(ErrorCode::BadExponent, "energy objective requires r = 4");
    return make_energy_objective(sigma);
  }
  return make_direct_objective(sigma, r);
}

}  // namespace

std::vector<Complex> line_indicator(const SurfaceMeasure& sigma, Line line) {
  const Field& f = sigma.field();
  const auto idx = sigma.variety().indices();
  std::vector<Complex> out(idx.size(), Complex{});
  for (const PlanePoint& x : points_on(f, line)) {
    const std::uint32_t i = point_index(f, x);
    const auto it = std::lower_bound(idx.begin(), idx.end(), i);
    if (it != idx.end() && *it == i) out[static_cast<std::size_t>(it - idx.begin())] = 1.0;
  }
  return out;
}

RstarEstimate estimate_rstar(const SurfaceMeasure& sigma, double p, double r, const AscentOptions& opt) {
  check_exponent(p, "p");
  check_exponent(r, "r");
  const std::size_t n = sigma.size();
  const Field& field = sigma.field();
  Rng rng(derive_seed(opt.seed, field.q(), n));

  std::vector<Start> starts;
  // Point masses are stationary points of the constrained problem, so they
  // are evaluated as candidates but not climbed from.
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Complex> f(n, Complex{});
    f[j] = 1.0;
    starts.push_back({"point_mass:" + std::to_string(j), std::move(f), false});
  }
  starts.push_back({"constant", std::vector<Complex>(n, Complex{1.0, 0.0}), true});

  // Rich lines (three or more points of V), most populated first.
  {
    std::vector<std::pair<std::size_t, Line>> rich;
    for (const Line& l : lines_meeting(sigma.variety(), 3)) {
      const auto ind = line_indicator(sigma, l);
      const auto cnt = static_cast<std::size_t>(std::count(ind.begin(), ind.end(), Complex{1.0, 0.0}));
      rich.emplace_back(cnt, l);
    }
    std::stable_sort(rich.begin(), rich.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (rich.size() > opt.rich_line_starts) rich.resize(opt.rich_line_starts);
    for (const auto& [cnt, l] : rich) {
      starts.push_back({"line:" + to_string(field, l), line_indicator(sigma, l), true});
    }
  }
  // Seeded two-point secants.
  if (n >= 2) {
    for (std::size_t s = 0; s < opt.secant_starts; ++s) {
      const std::size_t a = rng.below(n);
      std::size_t b = rng.below(n - 1);
      if (b >= a) ++b;
      std::vector<Complex> f(n, Complex{});
      f[a] = f[b] = 1.0;
      starts.push_back({"secant:" + std::to_string(a) + "," + std::to_string(b), std::move(f), true});
    }
  }
  for (std::size_t s = 0; s < opt.restarts; ++s) {
    std::vector<Complex> f(n);
    for (Complex& v : f) v = Complex(rng.symmetric(), rng.symmetric());
    starts.push_back({"random:" + std::to_string(s), std::move(f), true});
  }

  std::vector<AscentResult> results(starts.size());
  std::vector<std::size_t> evals(std::max(1u, opt.threads), 0);
  auto worker = [&](unsigned t, unsigned stride) {
    CountingObjective obj(make_objective(sigma, r, opt.objective));
    for (std::size_t i = t; i < starts.size(); i += stride) {
      if (starts[i].climb) {
        results[i] = ascend(obj, starts[i].f, p, opt, false);
      } else {
        std::vector<Complex> f = starts[i].f;
        if (normalize(f, p)) results[i] = {obj.value(f), std::move(f)};
      }
    }
    evals[t] = obj.evaluations;
  };
  const unsigned threads = std::max(1u, opt.threads);
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (auto& th : pool) th.join();
  }

  RstarEstimate est;
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].ratio > results[best].ratio) best = i;
  }
  est.ratio = results[best].ratio;
  est.witness = results[best].f;
  est.witness_origin = starts[best].origin;
  est.ascents = static_cast<std::size_t>(std::count_if(starts.begin(), starts.end(), [](const Start& s) { return s.climb; }));
  est.evaluations = std::accumulate(evals.begin(), evals.end(), std::size_t{0});

  // Best nonnegative real witness, climbed from |best| and from the constant.
  {
    CountingObjective obj(make_objective(sigma, r, opt.objective));
    std::vector<Complex> mod(n);
    for (std::size_t j = 0; j < n; ++j) mod[j] = std::abs(est.witness[j]);
    AscentResult a = ascend(obj, mod, p, opt, true);
    AscentResult b = ascend(obj, std::vector<Complex>(n, Complex{1.0, 0.0}), p, opt, true);
    const AscentResult& pick = a.ratio >= b.ratio ? a : b;
    est.nonneg_ratio = pick.ratio;
    est.nonneg_witness.resize(n);
    for (std::size_t j = 0; j < n; ++j) est.nonneg_witness[j] = pick.f.empty() ? 0.0 : pick.f[j].real();
    est.evaluations += obj.evaluations;
  }

  if (field.q() <= 5 && n <= opt.exhaustive_max_points) {
    CountingObjective obj(make_objective(sigma, r, opt.objective));
    std::vector<int> digits(n, 0);
    std::vector<Complex> f(n);
    double floor = 0.0;
    for (;;) {
      std::size_t pos = 0;
      while (pos < n && digits[pos] == 1) digits[pos++] = -1;
      if (pos == n) break;
      ++digits[pos];
      for (std::size_t j = 0; j < n; ++j) f[j] = static_cast<double>(digits[j]);
      const double nrm = norm_on_variety(f, p);
      if (nrm == 0.0) continue;
      floor = std::max(floor, obj.value(f) / nrm);
    }
    est.exhaustive_floor = floor;
    est.evaluations += obj.evaluations;
  }
  return est;
}

namespace {

std::vector<std::uint32_t> sum_counts(const Variety& v) {
  const Field& f = v.field();
  std::vector<std::uint32_t> counts(plane_size(f), 0);
  const auto pts = v.points();
  for (const PlanePoint& a : pts) {
    for (const PlanePoint& b : pts) ++counts[point_index(f, add(f, a, b))];
  }
  return counts;
}

}  // namespace

std::uint64_t additive_energy(const Variety& v) {
  std::uint64_t e = 0;
  for (std::uint32_t c : sum_counts(v)) e += static_cast<std::uint64_t>(c) * c;
  return e;
}

AutocorrelationProfile autocorrelation_profile(const Variety& v) {
  AutocorrelationProfile prof;
  // #{x in V : a - x in V} = #{(x, y) in V^2 : x + y = a}
  prof.counts = sum_counts(v);
  const Field& f = v.field();
  const std::uint32_t d = v.poly().degree();
  prof.threshold = d * d;
  for (std::uint32_t i = 0; i < prof.counts.size(); ++i) {
    const std::uint32_t c = prof.counts[i];
    if (c > prof.max) {
      prof.second_max = prof.max;
      prof.max = c;
      prof.argmax = point_at(f, i);
    } else if (c > prof.second_max) {
      prof.second_max = c;
    }
    if (c > prof.threshold) {
      prof.exceptional.push_back(point_at(f, i));
    } else {
      prof.max_off_exceptional = std::max(prof.max_off_exceptional, c);
    }
  }
  return prof;
}

double rstar_upper_bound_2_4(const Variety& v) {
  if (v.cardinality() == 0) throw Error(ErrorCode::EmptyVariety, "bound needs a nonempty variety");
  auto counts = sum_counts(v);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    best = std::min(best, static_cast<double>(k) + counts[k]);
    if (static_cast<double>(k) >= best) break;
  }
  const double q = v.field().q();
  const double n = static_cast<double>(v.cardinality());
  return std::pow(q * q / (n * n) * best, 0.25);
}

double constant_function_ratio_2_4(const Variety& v) {
  if (v.cardinality() == 0) throw Error(ErrorCode::EmptyVariety, "ratio needs a nonempty variety");
  const double q = v.field().q();
  const double n = static_cast<double>(v.cardinality());
  return std::pow(q * q * static_cast<double>(additive_energy(v)) / (n * n * n * n), 0.25);
}

NecessaryConditions necessary_conditions(double p, double r, double s, int alpha) {
  if (!(p >= 1.0) || !(r >= 1.0)) throw Error(ErrorCode::BadRange, "p and r must lie in [1, inf]");
  if (!(s > 0.0 && s < 2.0)) throw Error(ErrorCode::BadRange, "s must lie in (0, 2)");
  if (alpha != 0 && alpha != 1) throw Error(ErrorCode::BadRange, "alpha must be 0 or 1");
  if (alpha == 1 && s < 1.0) throw Error(ErrorCode::BadRange, "a variety containing a line has s >= 1");
  constexpr double slack = 1e-12;
  auto holds = [&](double bound) { return std::isinf(r) || (!std::isinf(bound) && r >= bound - slack); };

  NecessaryConditions nc;
  nc.bound_dimension = 4.0 / s;
  // 2p / (s (p - 1)); p = 1 forces r = inf, p = inf gives 2 / s.
  if (p == 1.0) {
    nc.bound_point = kInf;
  } else if (std::isinf(p)) {
    nc.bound_point = 2.0 / s;
  } else {
    nc.bound_point = 2.0 * p / (s * (p - 1.0));
  }
  nc.admissible = holds(nc.bound_dimension) && holds(nc.bound_point);
  if (alpha == 1) {
    const double a = 1.0;
    double bound;
    if (p == 1.0 || s - a <= 0.0) {
      bound = kInf;
    } else if (std::isinf(p)) {
      bound = (2.0 - a) / (s - a);
    } else {
      bound = p * (2.0 - a) / ((p - 1.0) * (s - a));
    }
    nc.bound_subspace = bound;
    nc.admissible = nc.admissible && holds(bound);
  }
  return nc;
}

double dual_exponent(double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::BadExponent, "exponent must lie in [1, inf]");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double restriction_ratio(const PlaneFunction& g, const SurfaceMeasure& sigma, double p, double r) {
  if (g.space() != Space::Frequency) throw Error(ErrorCode::SpaceMismatch, "restriction_ratio expects a dm-tagged g");
  if (!(g.field() == sigma.field())) throw Error(ErrorCode::FieldMismatch, "restriction over different fields");
  const double rp = dual_exponent(r);
  const double pp = dual_exponent(p);
  const double denom = norm_lp(g, rp);
  if (denom == 0.0) throw Error(ErrorCode::ZeroFunction, "ratio undefined for g = 0");
  const auto nz = g.nonzero_indices();
  std::vector<Complex> w(nz.size());
  for (std::size_t i = 0; i < nz.size(); ++i) w[i] = g[nz[i]];
  const auto on_v = character_transform(g.field(), nz, w, sigma.variety().indices(), -1);
  return norm_on_variety(on_v, pp) / denom;
}

std::vector<std::vector<std::size_t>> component_overlaps(std::span<const Variety> components) {
  std::vector<std::vector<std::size_t>> out(components.size(), std::vector<std::size_t>(components.size(), 0));
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (std::size_t j = 0; j < components.size(); ++j) {
      out[i][j] = i == j ? components[i].cardinality() : intersect_count(components[i], components[j]).count;
    }
  }
  return out;
}

ExtensionReport analyze_extension(const BivariatePoly& poly, double p, double r, const AscentOptions& options) {
  ExtensionReport rep;
  const Field& field = poly.field();
  rep.q = field.q();
  rep.poly_text = poly.to_string();
  rep.p_exp = p;
  rep.r_exp = r;
  rep.seed = options.seed;
  Variety v = variety_of(poly);
  rep.cardinality = v.cardinality();
  const auto line = contains_line(poly);
  rep.contains_line = line.has_value();
  if (line) rep.line_witness = to_string(field, *line);

  const SurfaceMeasure sigma(v);
  const RstarEstimate est = estimate_rstar(sigma, p, r, options);
  rep.rstar_lower = est.ratio;
  rep.rstar_nonneg = est.nonneg_ratio;
  rep.exhaustive_floor = est.exhaustive_floor;
  if (r == 4.0) rep.rstar_energy_bound = constant_function_ratio_2_4(v);
  if (p >= 2.0 && r >= 4.0) rep.rstar_upper_bound = rstar_upper_bound_2_4(v);

  std::vector<Complex> delta(sigma.size(), Complex{});
  delta[0] = 1.0;
  rep.point_mass_ratio = rstar_ratio(delta, sigma, p, r);
  if (line) rep.line_test_ratio = rstar_ratio(line_indicator(sigma, *line), sigma, p, r);

  const auto prof = autocorrelation_profile(v);
  rep.autocorrelation_max = prof.max;
  rep.autocorrelation_off_exceptional = prof.max_off_exceptional;
  for (const PlanePoint& a : prof.exceptional) {
    rep.exceptional_points.emplace_back(a, prof.counts[point_index(field, a)]);
  }
  return rep;
}

nlohmann::json to_json(const ExtensionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json exc = nlohmann::json::array();
  for (const auto& [a, c] : r.exceptional_points) exc.push_back({{"point", {a.x1.v, a.x2.v}}, {"count", c}});
  return {{"q", r.q},
          {"poly", r.poly_text},
          {"cardinality", r.cardinality},
          {"contains_line", r.contains_line},
          {"line_witness", r.line_witness ? nlohmann::json(*r.line_witness) : nlohmann::json(nullptr)},
          {"p_exp", r.p_exp},
          {"r_exp", r.r_exp},
          {"rstar_lower", r.rstar_lower},
          {"rstar_nonneg", r.rstar_nonneg},
          {"exhaustive_floor", opt(r.exhaustive_floor)},
          {"rstar_energy_bound", opt(r.rstar_energy_bound)},
          {"rstar_upper_bound", opt(r.rstar_upper_bound)},
          {"point_mass_ratio", r.point_mass_ratio},
          {"line_test_ratio", opt(r.line_test_ratio)},
          {"autocorrelation_max", r.autocorrelation_max},
          {"autocorrelation_off_exceptional", r.autocorrelation_off_exceptional},
          {"exceptional_points", std::move(exc)},
          {"seed", r.seed}};
}

std::string extension_csv_header() {
  return "q,poly,cardinality,contains_line,p_exp,r_exp,rstar_lower,rstar_nonneg,exhaustive_floor,"
         "rstar_energy_bound,rstar_upper_bound,point_mass_ratio,line_test_ratio,autocorrelation_max,"
         "autocorrelation_off_exceptional,exceptional_count,seed";
}

std::string to_csv_row(const ExtensionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  std::string row;
  row += std::to_string(r.q) + ",";
  row += csv_quote(r.poly_text) + ",";
  row += std::to_string(r.cardinality) + ",";
  row += std::string(r.contains_line ? "1" : "0") + ",";
  row += format_real(r.p_exp) + "," + format_real(r.r_exp) + ",";
  row += format_real(r.rstar_lower) + "," + format_real(r.rstar_nonneg) + ",";
  row += opt(r.exhaustive_floor) + "," + opt(r.rstar_energy_bound) + "," + opt(r.rstar_upper_bound) + ",";
  row += format_real(r.point_mass_ratio) + "," + opt(r.line_test_ratio) + ",";
  row += std::to_string(r.autocorrelation_max) + "," + std::to_string(r.autocorrelation_off_exceptional) + ",";
  row += std::to_string(r.exceptional_points.size()) + "," + std::to_string(r.seed);
  return row;
}

}  // namespace ffext
