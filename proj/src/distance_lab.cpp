#include "ffext/distance_lab.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "ffext/format.hpp"

namespace ffext {

struct LevelSetFamily::State {
  explicit State(BivariatePoly p) : poly(std::move(p)) {}

  BivariatePoly poly;
  std::vector<Elem> values;
  std::vector<std::vector<std::uint32_t>> levels;
  bool circle = false;
  std::optional<DiagonalForm> diagonal;
  std::once_flag ft_once;
  std::vector<std::vector<Complex>> ft;
};

LevelSetFamily::LevelSetFamily(BivariatePoly poly) : state_(std::make_shared<State>(std::move(poly))) {
  State& s = *state_;
  const Field& f = s.poly.field();
  s.values = s.poly.eval_plane();
  s.levels.assign(f.q(), {});
  for (std::uint32_t i = 0; i < s.values.size(); ++i) s.levels[s.values[i].v].push_back(i);
  s.circle = s.poly == BivariatePoly::norm(f, 2);

  const auto& terms = s.poly.terms();
  if (terms.size() == 2) {
    const auto& [e1, c1] = *terms.begin();
    const auto& [e2, c2] = *std::next(terms.begin());
    // map order puts (0, d) before (d, 0)
    if (e1.first == 0 && e2.second == 0 && e1.second == e2.first && e1.second >= 1) {
      s.diagonal = DiagonalForm{c2, c1, e1.second};
    }
  }
}

LevelSetFamily LevelSetFamily::circle(const Field& field) { return LevelSetFamily(BivariatePoly::norm(field, 2)); }

LevelSetFamily LevelSetFamily::diagonal(const Field& field, Elem a1, Elem a2, std::uint32_t d) {
  return LevelSetFamily(BivariatePoly::diagonal(field, a1, a2, d));
}

const Field& LevelSetFamily::field() const noexcept { return state_->poly.field(); }
const BivariatePoly& LevelSetFamily::poly() const noexcept { return state_->poly; }
bool LevelSetFamily::is_circle() const noexcept { return state_->circle; }
std::optional<LevelSetFamily::DiagonalForm> LevelSetFamily::diagonal_form() const noexcept { return state_->diagonal; }
std::span<const Elem> LevelSetFamily::values() const noexcept { return state_->values; }

std::span<const std::uint32_t> LevelSetFamily::level(Elem t) const {
  if (t.v >= field().q()) throw Error(ErrorCode::InvalidArgument, "level value outside the field");
  return state_->levels[t.v];
}

Variety LevelSetFamily::level_variety(Elem t) const { return Variety(poly().minus_constant(t)); }

std::span<const Complex> LevelSetFamily::level_ft(Elem t) const {
  State& s = *state_;
  std::call_once(s.ft_once, [&s] {
    const Field& f = s.poly.field();
    const double q = f.q();
    std::vector<std::uint32_t> all(plane_size(f));
    std::iota(all.begin(), all.end(), 0u);
    s.ft.resize(f.q());
    for (std::uint32_t t = 0; t < f.q(); ++t) {
      const auto& lv = s.levels[t];
      const std::vector<Complex> ones(lv.size(), Complex{1.0, 0.0});
      s.ft[t] = character_transform(f, lv, ones, all, -1);
      for (Complex& v : s.ft[t]) v /= q * q;
    }
  });
  if (t.v >= field().q()) throw Error(ErrorCode::InvalidArgument, "level value outside the field");
  return s.ft[t.v];
}

PointSetPair make_pair(const Field& field, std::vector<PlanePoint> E, std::vector<PlanePoint> F, std::string source) {
  if (E.empty() || F.empty()) throw Error(ErrorCode::EmptySet, "E and F must be nonempty");
  for (const auto* set : {&E, &F}) {
    std::vector<std::uint32_t> idx;
    idx.reserve(set->size());
    for (const PlanePoint& x : *set) {
      if (x.x1.v >= field.q() || x.x2.v >= field.q()) throw Error(ErrorCode::InvalidArgument, "point outside the plane");
      idx.push_back(point_index(field, x));
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      throw Error(ErrorCode::InvalidArgument, "point sets must not repeat points");
    }
  }
  return PointSetPair{field, std::move(E), std::move(F), std::move(source)};
}

std::uint64_t NuFunction::total() const { return std::accumulate(values.begin(), values.end(), std::uint64_t{0}); }

namespace {

void require_same_field(const PointSetPair& pair, const LevelSetFamily& fam) {
  if (!(pair.field == fam.field())) throw Error(ErrorCode::FieldMismatch, "point sets and family over different fields");
}

void require_circle(const LevelSetFamily& fam) {
  if (!fam.is_circle()) throw Error(ErrorCode::WrongPolynomial, "operation defined for x1^2 + x2^2 only");
}

std::vector<Complex> indicator_ft(const Field& f, std::span<const PlanePoint> set) {
  std::vector<std::uint32_t> idx;
  idx.reserve(set.size());
  for (const PlanePoint& x : set) idx.push_back(point_index(f, x));
  const PlaneFunction ft = forward_ft(PlaneFunction::indicator_indices(f, Space::Function, idx));
  return {ft.values().begin(), ft.values().end()};
}

// conj(E^)(m) F^(m) at every frequency.
std::vector<Complex> pair_spectrum(const PointSetPair& pair) {
  const auto e = indicator_ft(pair.field, pair.E);
  const auto f = indicator_ft(pair.field, pair.F);
  std::vector<Complex> a(e.size());
  for (std::size_t m = 0; m < a.size(); ++m) a[m] = std::conj(e[m]) * f[m];
  return a;
}

std::uint32_t diff_index(const Field& f, PlanePoint x, PlanePoint y) { return point_index(f, sub(f, x, y)); }

}  // namespace

NuFunction counting_function(const PointSetPair& pair, const LevelSetFamily& fam) {
  require_same_field(pair, fam);
  const Field& f = pair.field;
  const auto values = fam.values();
  NuFunction nu;
  nu.values.assign(f.q(), 0);
  for (const PlanePoint& x : pair.E) {
    for (const PlanePoint& y : pair.F) ++nu.values[values[diff_index(f, x, y)].v];
  }
  return nu;
}

std::vector<double> counting_function_fourier(const PointSetPair& pair, const LevelSetFamily& fam) {
  require_same_field(pair, fam);
  const Field& f = pair.field;
  const double q = f.q();
  const auto a = pair_spectrum(pair);
  std::vector<double> out(f.q());
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto vt = fam.level_ft(Elem{t});
    Complex acc{};
    for (std::size_t m = 0; m < a.size(); ++m) acc += a[m] * vt[m];
    out[t] = (q * q * q * q * acc).real();
  }
  return out;
}

std::vector<Elem> distance_set(const PointSetPair& pair, std::uint32_t n) {
  const Field& f = pair.field;
  if (n < 2 || n >= f.p()) throw Error(ErrorCode::BadExponent, "distance exponent must satisfy 2 <= n < p");
  const auto values = BivariatePoly::norm(f, n).eval_plane();
  std::vector<char> seen(f.q(), 0);
  std::uint32_t found = 0;
  for (const PlanePoint& x : pair.E) {
    for (const PlanePoint& y : pair.F) {
      const std::uint32_t t = values[diff_index(f, x, y)].v;
      if (!seen[t]) {
        seen[t] = 1;
        if (++found == f.q()) break;
      }
    }
    if (found == f.q()) break;
  }
  std::vector<Elem> out;
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    if (seen[t]) out.push_back(Elem{t});
  }
  return out;
}

Complex sphere_ft_explicit(const LevelSetFamily& fam, Elem t, PlanePoint m) {
  require_circle(fam);
  const Field& f = fam.field();
  const double q = f.q();
  const Complex g = f.gauss_sum_closed_form();
  const Elem norm_m = fam.values()[point_index(f, m)];
  const Elem four = f.from_int(4);
  Complex sum{};
  for (std::uint32_t s = 1; s < f.q(); ++s) {
    const Elem se{s};
    sum += f.chi(f.add(f.div(norm_m, f.mul(four, se)), f.mul(se, t)));
  }
  Complex value = g * g * sum / (q * q * q);
  if (m.x1 == f.zero() && m.x2 == f.zero()) value += 1.0 / q;
  return value;
}

Complex KeylemmaSum::reconstructed() const { return first_piece + second_piece; }

namespace {

// S_t = sum_{P(x) = t} chi(-x.m) for every t, by direct summation.
std::vector<Complex> level_character_sums(const LevelSetFamily& fam, PlanePoint m) {
  const Field& f = fam.field();
  const std::uint32_t mi = point_index(f, m);
  std::vector<Complex> s(f.q());
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto lv = fam.level(Elem{t});
    const std::vector<Complex> ones(lv.size(), Complex{1.0, 0.0});
    const std::uint32_t out[] = {mi};
    s[t] = character_transform(f, lv, ones, out, -1)[0];
  }
  return s;
}

void require_nonzero(const Field& f, PlanePoint m) {
  if (m.x1 == f.zero() && m.x2 == f.zero()) throw Error(ErrorCode::ZeroFrequency, "frequency must be nonzero");
}

}  // namespace

KeylemmaSum keylemma_sum(const LevelSetFamily& fam, PlanePoint m) {
  const Field& f = fam.field();
  require_nonzero(f, m);
  const auto form = fam.diagonal_form();
  if (!form || form->d < 2) {
    throw Error(ErrorCode::NonDiagonalPolynomial, "key sum needs a1 x1^d + a2 x2^d with a1 a2 != 0, d >= 2");
  }
  const double q = f.q();
  const std::uint32_t mi = point_index(f, m);
  KeylemmaSum out;
  for (std::uint32_t t = 0; t < f.q(); ++t) out.value += fam.level_ft(Elem{t})[mi] * static_cast<double>(fam.level_size(Elem{t}));
  const auto s = level_character_sums(fam, m);
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const double r = static_cast<double>(fam.level_size(Elem{t})) - q;
    out.first_piece += q * s[t];
    out.second_piece += r * s[t];
  }
  out.first_piece /= q * q;
  out.second_piece /= q * q;
  return out;
}

Complex constant_weight_sum(const LevelSetFamily& fam, PlanePoint m, Complex w) {
  const std::uint32_t mi = point_index(fam.field(), m);
  Complex acc{};
  for (std::uint32_t t = 0; t < fam.field().q(); ++t) acc += w * fam.level_ft(Elem{t})[mi];
  return acc;
}

DoubleDecay double_decay_sum(const LevelSetFamily& fam, PlanePoint m, PlanePoint xi) {
  require_circle(fam);
  const Field& f = fam.field();
  require_nonzero(f, m);
  require_nonzero(f, xi);
  const double q = f.q();
  const std::uint32_t mi = point_index(f, m);
  const std::uint32_t xii = point_index(f, xi);
  DoubleDecay out;
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto vt = fam.level_ft(Elem{t});
    out.lhs += vt[mi] * vt[xii];
  }
  const Elem diff = f.sub(fam.values()[mi], fam.values()[xii]);
  for (std::uint32_t s = 1; s < f.q(); ++s) out.rhs += f.chi(f.mul(Elem{s}, diff));
  out.rhs /= q * q * q;
  return out;
}

NuZeroDecomposition nu_zero_decomposition(const PointSetPair& pair, const LevelSetFamily& fam) {
  require_circle(fam);
  require_same_field(pair, fam);
  const Field& f = pair.field;
  if (f.q() % 4 != 1) throw Error(ErrorCode::WrongResidueClass, "zero-distance identity needs q = 1 (mod 4)");
  const double q = f.q();
  NuZeroDecomposition out;
  out.direct = counting_function(pair, fam).values[0];
  out.mass_term = static_cast<double>(pair.E.size()) * static_cast<double>(pair.F.size()) / q;
  const auto a = pair_spectrum(pair);
  const auto values = fam.values();
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (values[m] == f.zero()) out.null_cone_term += a[m];
    out.full_term += a[m];
  }
  out.null_cone_term *= q * q * q;
  out.full_term *= q * q;
  return out;
}

namespace {

double restriction_scale(double q, std::size_t h) { return std::pow(q, -3.0) * std::pow(static_cast<double>(h), 1.5); }

std::vector<std::uint32_t> set_indices(const Field& f, std::span<const PlanePoint> H) {
  std::vector<std::uint32_t> idx;
  idx.reserve(H.size());
  for (const PlanePoint& x : H) idx.push_back(point_index(f, x));
  return idx;
}

}  // namespace

RestrictionEnergy restriction_energy(std::span<const PlanePoint> H, const LevelSetFamily& fam, Elem t) {
  const Field& f = fam.field();
  if (H.empty()) throw Error(ErrorCode::EmptySet, "H must be nonempty");
  if (fam.is_circle() && t == f.zero()) throw Error(ErrorCode::ZeroRadius, "t = 0 is excluded for the circle");
  const double q = f.q();
  const auto idx = set_indices(f, H);
  const std::vector<Complex> ones(idx.size(), Complex{1.0, 0.0});
  const auto h = character_transform(f, idx, ones, fam.level(t), -1);
  RestrictionEnergy out;
  for (const Complex& v : h) out.energy += std::norm(v);
  out.energy /= q * q * q * q;
  out.ratio = out.energy / restriction_scale(q, H.size());
  return out;
}

RestrictionProfile restriction_profile(std::span<const PlanePoint> H, const LevelSetFamily& fam) {
  const Field& f = fam.field();
  if (H.empty()) throw Error(ErrorCode::EmptySet, "H must be nonempty");
  const double q = f.q();
  const auto idx = set_indices(f, H);
  const std::vector<Complex> ones(idx.size(), Complex{1.0, 0.0});
  std::vector<std::uint32_t> all(plane_size(f));
  std::iota(all.begin(), all.end(), 0u);
  const auto h = character_transform(f, idx, ones, all, -1);
  RestrictionProfile out;
  out.energies.assign(f.q(), 0.0);
  const auto values = fam.values();
  for (std::size_t m = 0; m < h.size(); ++m) {
    if (values[m] != f.zero()) out.energies[values[m].v] += std::norm(h[m]);
  }
  const double scale = restriction_scale(q, H.size());
  for (std::uint32_t t = 1; t < f.q(); ++t) {
    out.energies[t] /= q * q * q * q;
    if (out.energies[t] / scale > out.max_ratio) {
      out.max_ratio = out.energies[t] / scale;
      out.argmax = Elem{t};
    }
  }
  return out;
}

SecondMoment second_moment_decomposition(const PointSetPair& pair, const LevelSetFamily& fam) {
  require_circle(fam);
  require_same_field(pair, fam);
  const Field& f = pair.field;
  const double q = f.q();
  const double q2 = q * q;
  const double ef = static_cast<double>(pair.E.size()) * static_cast<double>(pair.F.size());
  SecondMoment out;
  for (std::uint64_t v : counting_function(pair, fam).values) out.direct += v * v;

  const auto a = pair_spectrum(pair);
  const auto values = fam.values();
  const std::size_t n = a.size();

  double size_sq = 0.0;
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const double s = static_cast<double>(fam.level_size(Elem{t}));
    size_sq += s * s;
  }
  out.I = ef * ef * size_sq / (q2 * q2);

  // II: 2 q^2 |E||F| sum_{m != 0} a(m) sum_t |V_t| V_t^(m)
  Complex ii{};
  // III: q^8 sum_t (sum_{m != 0} a(m) V_t^(m))^2
  Complex iii{};
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto vt = fam.level_ft(Elem{t});
    const double size = static_cast<double>(fam.level_size(Elem{t}));
    Complex b{};
    for (std::size_t m = 1; m < n; ++m) b += a[m] * vt[m];
    ii += size * b;
    iii += b * b;
  }
  out.II = 2.0 * q2 * ef * ii.real();
  out.III = q2 * q2 * q2 * q2 * iii.real();

  std::vector<Complex> by_norm(f.q()), by_norm_nonzero(f.q());
  Complex all_nonzero{};
  for (std::size_t m = 0; m < n; ++m) {
    by_norm[values[m].v] += a[m];
    if (m != 0) {
      by_norm_nonzero[values[m].v] += a[m];
      all_nonzero += a[m];
    }
  }
  out.III_1 = -q2 * q2 * q * (all_nonzero * all_nonzero).real();
  Complex iii2{}, main{};
  for (std::uint32_t k = 0; k < f.q(); ++k) {
    iii2 += by_norm_nonzero[k] * by_norm_nonzero[k];
    main += by_norm[k] * by_norm[k];
  }
  out.III_2 = q2 * q2 * q2 * iii2.real();
  out.main_term = q2 * q2 * q2 * main.real();
  // by_norm[0] includes m = 0, since ||0|| = 0
  out.remainder = out.I + out.II + out.III_1 + ef * ef / q2 - 2.0 * q2 * ef * by_norm[0].real();
  return out;
}

std::string to_string(SetGenerator g) {
  switch (g) {
    case SetGenerator::Uniform: return "uniform";
    case SetGenerator::LineConcentrated: return "line_concentrated";
    case SetGenerator::SubfieldGrid: return "subfield_grid";
    case SetGenerator::CircleUnion: return "circle_union";
  }
  return "unknown";
}

SetGenerator generator_from_string(std::string_view name) {
  for (SetGenerator g : {SetGenerator::Uniform, SetGenerator::LineConcentrated, SetGenerator::SubfieldGrid,
                         SetGenerator::CircleUnion}) {
    if (to_string(g) == name) return g;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown generator: " + std::string(name));
}

namespace {

class SetBuilder {
 public:
  SetBuilder(const Field& f, std::size_t size) : f_(f), size_(size), member_(plane_size(f), 0) {}
  bool full() const { return out_.size() >= size_; }
  void add(PlanePoint x) {
    if (full()) return;
    const std::uint32_t i = point_index(f_, x);
    if (!member_[i]) {
      member_[i] = 1;
      out_.push_back(x);
    }
  }
  // Adds a batch in random order so truncation does not favor a corner.
  void add_shuffled(std::vector<PlanePoint> pts, Rng& rng) {
    for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.below(i)]);
    for (const PlanePoint& x : pts) add(x);
  }
  std::vector<PlanePoint> take() { return std::move(out_); }

 private:
  const Field& f_;
  std::size_t size_;
  std::vector<char> member_;
  std::vector<PlanePoint> out_;
};

PlanePoint random_point(const Field& f, Rng& rng) {
  return point_at(f, static_cast<std::uint32_t>(rng.below(plane_size(f))));
}

}  // namespace

std::vector<PlanePoint> generate_set(const Field& field, SetGenerator gen, std::size_t size, Rng& rng) {
  const std::uint32_t q = field.q();
  if (size == 0 || size > plane_size(field)) throw Error(ErrorCode::BadSizes, "set size must lie in [1, q^2]");
  SetBuilder b(field, size);
  switch (gen) {
    case SetGenerator::Uniform: {
      // partial Fisher-Yates over plane indices
      std::vector<std::uint32_t> idx(plane_size(field));
      std::iota(idx.begin(), idx.end(), 0u);
      for (std::size_t i = 0; i < size; ++i) {
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        b.add(point_at(field, idx[i]));
      }
      break;
    }
    case SetGenerator::LineConcentrated: {
      while (!b.full()) {
        const std::uint64_t r = rng.below(static_cast<std::uint64_t>(q) * q + q);
        const Line l = r < q ? Line{field.one(), field.zero(), Elem{static_cast<std::uint32_t>(r)}}
                             : Line{Elem{static_cast<std::uint32_t>((r - q) / q)}, field.one(),
                                    Elem{static_cast<std::uint32_t>((r - q) % q)}};
        b.add_shuffled(points_on(field, l), rng);
      }
      break;
    }
    case SetGenerator::SubfieldGrid: {
      if (field.k() < 2) throw Error(ErrorCode::InvalidArgument, "subfield grid needs a proper subfield (k >= 2)");
      // translates of F_p x F_p
      const std::uint32_t p = field.p();
      while (!b.full()) {
        const PlanePoint c = random_point(field, rng);
        std::vector<PlanePoint> pts;
        pts.reserve(static_cast<std::size_t>(p) * p);
        for (std::uint32_t i = 0; i < p; ++i) {
          for (std::uint32_t j = 0; j < p; ++j) pts.push_back(add(field, c, PlanePoint{Elem{i}, Elem{j}}));
        }
        b.add_shuffled(std::move(pts), rng);
      }
      break;
    }
    case SetGenerator::CircleUnion: {
      const auto values = BivariatePoly::norm(field, 2).eval_plane();
      std::vector<std::vector<std::uint32_t>> levels(q);
      for (std::uint32_t i = 0; i < values.size(); ++i) levels[values[i].v].push_back(i);
      while (!b.full()) {
        const PlanePoint c = random_point(field, rng);
        const std::uint32_t t = 1 + static_cast<std::uint32_t>(rng.below(q - 1));
        std::vector<PlanePoint> pts;
        for (std::uint32_t i : levels[t]) pts.push_back(add(field, c, point_at(field, i)));
        b.add_shuffled(std::move(pts), rng);
      }
      break;
    }
  }
  return b.take();
}

ExperimentReport falconer_experiment(const ExperimentConfig& cfg) {
  const Field field = Field::of_order(cfg.q);
  const double q = field.q();
  const double plane = q * q;
  if (cfg.size_E == 0 || cfg.size_F == 0 || static_cast<double>(cfg.size_E) > plane ||
      static_cast<double>(cfg.size_F) > plane) {
    throw Error(ErrorCode::BadSizes, "set sizes must lie in [1, q^2]");
  }
  if (cfg.generators.empty()) throw Error(ErrorCode::InvalidArgument, "at least one generator is required");
  const double product = static_cast<double>(cfg.size_E) * static_cast<double>(cfg.size_F);
  const double threshold = std::pow(q, 8.0 / 3.0);

  struct Job {
    SetGenerator gen;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (SetGenerator g : cfg.generators) {
    for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({g, t});
  }
  ExperimentReport rep;
  rep.rows.resize(jobs.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&](unsigned w, unsigned stride) {
    try {
      for (std::size_t i = w; i < jobs.size(); i += stride) {
        ExperimentRow& row = rep.rows[i];
        row.q = field.q();
        row.residue_class = field.q() % 4;
        row.size_E = cfg.size_E;
        row.size_F = cfg.size_F;
        row.product_vs_q83 = product / threshold;
        row.generator = jobs[i].gen;
        row.trial = jobs[i].trial;
        row.seed = derive_seed(cfg.seed, field.q(), static_cast<std::uint64_t>(jobs[i].gen), jobs[i].trial);
        Rng rng(row.seed);
        auto E = generate_set(field, jobs[i].gen, cfg.size_E, rng);
        auto F = generate_set(field, jobs[i].gen, cfg.size_F, rng);
        const PointSetPair pair{field, std::move(E), std::move(F), to_string(jobs[i].gen)};
        row.distances = distance_set(pair, 2).size();
        row.ratio = static_cast<double>(row.distances) / q;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1))));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w, threads);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentSummary& s = rep.summary;
  s.above_min = s.below_min = std::numeric_limits<double>::infinity();
  for (const ExperimentRow& row : rep.rows) {
    if (product >= threshold) {
      ++s.above;
      s.above_min = std::min(s.above_min, row.ratio);
      s.above_mean += row.ratio;
    } else {
      ++s.below;
      s.below_min = std::min(s.below_min, row.ratio);
      s.below_mean += row.ratio;
    }
  }
  if (s.above) s.above_mean /= static_cast<double>(s.above); else s.above_min = 0.0;
  if (s.below) s.below_mean /= static_cast<double>(s.below); else s.below_min = 0.0;
  return rep;
}

std::string experiment_csv_header() {
  return "q,residue_class,size_E,size_F,product_vs_q83,distances,ratio,generator,seed,trial";
}

std::string to_csv_row(const ExperimentRow& r) {
  return std::to_string(r.q) + "," + std::to_string(r.residue_class) + "," + std::to_string(r.size_E) + "," +
         std::to_string(r.size_F) + "," + format_real(r.product_vs_q83) + "," + std::to_string(r.distances) + "," +
         format_real(r.ratio) + "," + to_string(r.generator) + "," + std::to_string(r.seed) + "," +
         std::to_string(r.trial);
}

nlohmann::json to_json(const ExperimentRow& r) {
  return {{"q", r.q},
          {"residue_class", r.residue_class},
          {"size_E", r.size_E},
          {"size_F", r.size_F},
          {"product_vs_q83", r.product_vs_q83},
          {"distances", r.distances},
          {"ratio", r.ratio},
          {"generator", to_string(r.generator)},
          {"seed", r.seed},
          {"trial", r.trial}};
}

nlohmann::json to_json(const ExperimentSummary& s) {
  return {{"above_threshold", {{"trials", s.above}, {"min_ratio", s.above_min}, {"mean_ratio", s.above_mean}}},
          {"below_threshold", {{"trials", s.below}, {"min_ratio", s.below_min}, {"mean_ratio", s.below_mean}}}};
}

nlohmann::json to_json(const LemmaCheck& c) {
  return {{"lemma", c.lemma},
          {"q", c.q},
          {"max_abs_value", c.max_abs_value},
          {"bound", c.bound},
          {"ratio", c.ratio},
          {"witness", c.witness}};
}

namespace {

std::string point_text(PlanePoint x) {
  return "(" + std::to_string(x.x1.v) + "," + std::to_string(x.x2.v) + ")";
}

LemmaCheck finish(std::string lemma, const Field& f, double value, double bound, std::string witness) {
  return {std::move(lemma), f.q(), value, bound, bound > 0.0 ? value / bound : 0.0, std::move(witness)};
}

}  // namespace

LemmaCheck keylemma_check(const LevelSetFamily& fam, double bound) {
  const Field& f = fam.field();
  if (!fam.diagonal_form()) throw Error(ErrorCode::NonDiagonalPolynomial, "key sum needs a diagonal polynomial");
  std::vector<double> sizes(f.q());
  for (std::uint32_t t = 0; t < f.q(); ++t) sizes[t] = static_cast<double>(fam.level_size(Elem{t}));
  std::vector<Complex> acc(plane_size(f), Complex{});
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto vt = fam.level_ft(Elem{t});
    for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += sizes[t] * vt[m];
  }
  double best = 0.0;
  std::uint32_t arg = 1;
  for (std::uint32_t m = 1; m < acc.size(); ++m) {
    if (std::abs(acc[m]) > best) {
      best = std::abs(acc[m]);
      arg = m;
    }
  }
  return finish("keylemma", f, best, bound, point_text(point_at(f, arg)));
}

LemmaCheck double_decay_check(const LevelSetFamily& fam, double tolerance) {
  require_circle(fam);
  const Field& f = fam.field();
  const double q = f.q();
  const std::uint32_t n = plane_size(f);
  // RHS depends on m, xi only through their norms
  std::vector<Complex> rhs(f.q());
  for (std::uint32_t d = 0; d < f.q(); ++d) {
    Complex acc{};
    for (std::uint32_t s = 1; s < f.q(); ++s) acc += f.chi(f.mul(Elem{s}, Elem{d}));
    rhs[d] = acc / (q * q * q);
  }
  std::vector<const Complex*> ft(f.q());
  for (std::uint32_t t = 0; t < f.q(); ++t) ft[t] = fam.level_ft(Elem{t}).data();
  const auto values = fam.values();
  double worst = 0.0;
  std::string witness = "none";
  for (std::uint32_t m = 1; m < n; ++m) {
    for (std::uint32_t x = 1; x < n; ++x) {
      Complex lhs{};
      for (std::uint32_t t = 0; t < f.q(); ++t) lhs += ft[t][m] * ft[t][x];
      const double err = std::abs(lhs - rhs[f.sub(values[m], values[x]).v]);
      if (err > worst) {
        worst = err;
        witness = point_text(point_at(f, m)) + "," + point_text(point_at(f, x));
      }
    }
  }
  return finish("double_fourier_decay", f, worst, tolerance, witness);
}

LemmaCheck explicit_formula_check(const LevelSetFamily& fam, double tolerance) {
  require_circle(fam);
  const Field& f = fam.field();
  double worst = 0.0;
  std::string witness = "none";
  for (std::uint32_t t = 0; t < f.q(); ++t) {
    const auto vt = fam.level_ft(Elem{t});
    for (std::uint32_t m = 0; m < plane_size(f); ++m) {
      const double err = std::abs(sphere_ft_explicit(fam, Elem{t}, point_at(f, m)) - vt[m]);
      if (err > worst) {
        worst = err;
        witness = "t=" + std::to_string(t) + ",m=" + point_text(point_at(f, m));
      }
    }
  }
  return finish("explicit_circle_transform", f, worst, tolerance, witness);
}

LemmaCheck level_size_check(const LevelSetFamily& fam, double bound) {
  const Field& f = fam.field();
  const double q = f.q();
  double worst = 0.0;
  std::uint32_t arg = 1;
  for (std::uint32_t t = 1; t < f.q(); ++t) {
    const double dev = std::abs(static_cast<double>(fam.level_size(Elem{t})) - q) / std::sqrt(q);
    if (dev > worst) {
      worst = dev;
      arg = t;
    }
  }
  return finish("level_size", f, worst, bound, "t=" + std::to_string(arg));
}

LemmaCheck restriction_check(const LevelSetFamily& fam, std::size_t trials, std::uint64_t seed, double bound) {
  const Field& f = fam.field();
  const double plane = plane_size(f);
  double worst = 0.0;
  std::string witness = "none";
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, f.q(), i));
    // sizes spread log-uniformly over [1, q^2]
    const auto size = static_cast<std::size_t>(
        std::clamp(std::floor(std::exp(rng.uniform() * std::log(plane))), 1.0, plane));
    const auto H = generate_set(f, SetGenerator::Uniform, size, rng);
    const auto prof = restriction_profile(H, fam);
    if (prof.max_ratio > worst) {
      worst = prof.max_ratio;
      witness = "trial=" + std::to_string(i) + ",|H|=" + std::to_string(size) + ",t=" + std::to_string(prof.argmax.v);
    }
  }
  return finish("restriction", f, worst, bound, witness);
}

}  // namespace ffext
