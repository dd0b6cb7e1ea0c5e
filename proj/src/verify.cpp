#include "ffext/verify.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ffext/curves.hpp"
#include "ffext/distance_lab.hpp"
#include "ffext/extension_lab.hpp"
#include "ffext/plane_fourier.hpp"
#include "ffext/rng.hpp"

namespace ffext {

namespace {

VerifyCheck at_most(std::string name, std::uint32_t q, double measured, double bound) {
  return {std::move(name), q, measured, bound, measured <= bound};
}

VerifyCheck at_least(std::string name, std::uint32_t q, double measured, double bound) {
  return {std::move(name), q, measured, bound, measured >= bound};
}

PlaneFunction random_function(const Field& f, Space space, Rng& rng) {
  std::vector<Complex> v(plane_size(f));
  for (Complex& c : v) c = Complex(rng.symmetric(), rng.symmetric());
  return PlaneFunction(f, space, std::move(v));
}

double max_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void fourier_suite(std::uint32_t q, const VerifyOptions& o, std::vector<VerifyCheck>& out) {
  const Field f = Field::of_order(q);
  Rng rng(derive_seed(o.seed, q, 1));
  const double tol = o.tolerances.identity;
  double plancherel = 0.0, inversion = 0.0, convolution = 0.0;
  for (std::size_t i = 0; i < o.samples; ++i) {
    const PlaneFunction g = random_function(f, Space::Function, rng);
    const PlaneFunction h = random_function(f, Space::Function, rng);
    const PlaneFunction gh = forward_ft(g);
    plancherel = std::max(plancherel, std::abs(norm_lp(g, 2) - norm_lp(gh, 2)));
    inversion = std::max(inversion, max_diff(inverse_ft(gh).values(), g.values()));
    const PlaneFunction hh = forward_ft(h);
    const PlaneFunction lhs = forward_ft(convolve(g, h));
    std::vector<Complex> rhs(plane_size(f));
    for (std::uint32_t m = 0; m < rhs.size(); ++m) rhs[m] = gh[m] * hh[m];
    convolution = std::max(convolution, max_diff(lhs.values(), rhs));
  }
  out.push_back(at_most("plancherel", q, plancherel, tol));
  out.push_back(at_most("inversion", q, inversion, tol));
  out.push_back(at_most("convolution", q, convolution, tol));
  const Complex g = f.gauss_sum();
  out.push_back(at_most("gauss_closed_form", q, std::abs(g - f.gauss_sum_closed_form()), 1e-8));
  const double qq = static_cast<double>(q) * q;
  out.push_back(at_most("gauss_fourth_power", q, std::abs(std::pow(g, 4) - qq) / qq, 1e-9));
}

void curves_suite(std::uint32_t q, const VerifyOptions& o, std::vector<VerifyCheck>& out) {
  const Field f = Field::of_order(q);
  Rng rng(derive_seed(o.seed, q, 2));
  const std::uint32_t max_deg = std::min<std::uint32_t>(4, f.p() - 1);
  double sz = 0.0;
  double bezout_violations = 0.0;
  for (std::size_t i = 0; i < o.samples; ++i) {
    const BivariatePoly a = random_poly(f, max_deg, rng);
    const BivariatePoly b = random_poly(f, max_deg, rng);
    const Variety va(a), vb(b);
    if (a.degree() > 0) sz = std::max(sz, schwartz_zippel_margin(va));
    if (a.degree() > 0 && b.degree() > 0 && !shares_component(a, b)) {
      const IntersectionCount ic = intersect_count(va, vb);
      if (ic.count > ic.bezout_bound) bezout_violations += 1.0;
    }
  }
  out.push_back(at_most("schwartz_zippel_margin", q, sz, 1.0));
  out.push_back(at_most("bezout_violations", q, bezout_violations, 0.0));
  const LevelSetFamily fam = LevelSetFamily::circle(f);
  std::size_t total = 0;
  for (std::uint32_t t = 0; t < q; ++t) total += fam.level_size(Elem{t});
  out.push_back(at_most("level_partition_defect", q, std::abs(static_cast<double>(total) - double(q) * q), 0.0));
}

void extension_suite(std::uint32_t q, const VerifyOptions& o, std::vector<VerifyCheck>& out) {
  const Field f = Field::of_order(q);
  const double qd = q;
  AscentOptions opt;
  opt.restarts = o.restarts;
  opt.seed = o.seed;
  std::vector<const char*> line_free = {"x1^2+x2^2-1", "x2-x1^2"};
  if (f.p() > 4) line_free.push_back("x1^4+x2^4-1");
  for (const char* text : line_free) {
    const Variety v(parse_poly(text, f));
    if (v.cardinality() == 0) continue;
    const SurfaceMeasure sigma(v);
    out.push_back(at_most(std::string("mass:") + text, q, std::abs(sigma.total_mass() - 1.0), o.tolerances.identity));
    const RstarEstimate est = estimate_rstar(sigma, 2.0, 4.0, opt);
    out.push_back(at_most(std::string("rstar_2_4:") + text, q, est.ratio, 3.0));
    out.push_back(at_most(std::string("rstar_below_upper_bound:") + text, q, est.ratio - rstar_upper_bound_2_4(v),
                          o.tolerances.estimate));
  }
  const BivariatePoly cross = parse_poly("x1*x2", f);
  const SurfaceMeasure sigma{Variety(cross)};
  const Line l = *contains_line(cross);
  out.push_back(at_least("line_test_ratio_over_q_quarter", q,
                         rstar_ratio(line_indicator(sigma, l), sigma, 2.0, 4.0) / std::pow(qd, 0.25), 0.5));
}

void distance_suite(std::uint32_t q, const VerifyOptions& o, std::vector<VerifyCheck>& out) {
  const Field f = Field::of_order(q);
  const LevelSetFamily fam = LevelSetFamily::circle(f);
  const double tol = o.tolerances.identity;
  out.push_back(at_most("explicit_circle_transform", q, explicit_formula_check(fam, tol).max_abs_value, tol));
  if (q >= 5) out.push_back(at_most("double_fourier_decay", q, double_decay_check(fam, tol).max_abs_value, tol));
  out.push_back(at_most("level_size_deviation", q, level_size_check(fam, 2.0).max_abs_value, 2.0));
  out.push_back(at_most("keylemma_circle", q, keylemma_check(fam, 4.0).max_abs_value, 4.0));
  Rng rng(derive_seed(o.seed, q, 4));
  double nu_mass = 0.0, nu_paths = 0.0, second = 0.0;
  for (std::size_t i = 0; i < o.samples; ++i) {
    auto E = generate_set(f, SetGenerator::Uniform, 1 + rng.below(plane_size(f)), rng);
    auto F = generate_set(f, SetGenerator::Uniform, 1 + rng.below(plane_size(f)), rng);
    const double ef = static_cast<double>(E.size()) * static_cast<double>(F.size());
    const PointSetPair pair = make_pair(f, std::move(E), std::move(F), "uniform");
    const NuFunction nu = counting_function(pair, fam);
    nu_mass = std::max(nu_mass, std::abs(static_cast<double>(nu.total()) - ef));
    const auto nf = counting_function_fourier(pair, fam);
    for (std::uint32_t t = 0; t < q; ++t) nu_paths = std::max(nu_paths, std::abs(static_cast<double>(nu.values[t]) - nf[t]));
    const SecondMoment sm = second_moment_decomposition(pair, fam);
    second = std::max(second, std::abs(sm.reconstructed() - static_cast<double>(sm.direct)) / static_cast<double>(sm.direct));
  }
  out.push_back(at_most("nu_mass_defect", q, nu_mass, 0.0));
  out.push_back(at_most("nu_fourier_path", q, nu_paths, o.tolerances.estimate));
  out.push_back(at_most("second_moment_relative", q, second, 1e-8));
  out.push_back(at_most("restriction_ratio", q, restriction_check(fam, 20 * o.samples, o.seed, 4.0).max_abs_value, 4.0));
}

}  // namespace

std::vector<VerifyCheck> run_suite(std::string_view suite, const std::vector<std::uint32_t>& qs,
                                   const VerifyOptions& options) {
  using Runner = void (*)(std::uint32_t, const VerifyOptions&, std::vector<VerifyCheck>&);
  std::vector<Runner> runners;
  if (suite == "fourier" || suite == "all") runners.push_back(fourier_suite);
  if (suite == "curves" || suite == "all") runners.push_back(curves_suite);
  if (suite == "extension" || suite == "all") runners.push_back(extension_suite);
  if (suite == "distance" || suite == "all") runners.push_back(distance_suite);
  if (runners.empty()) throw Error(ErrorCode::InvalidArgument, "unknown suite: " + std::string(suite));
  for (std::uint32_t q : qs) {
    const auto [p, k] = prime_power_decompose(q);
    if (p == 0 || p == 2) throw Error(ErrorCode::InvalidArgument, "q must be an odd prime power: " + std::to_string(q));
  }
  std::vector<VerifyCheck> out;
  for (Runner run : runners) {
    for (std::uint32_t q : qs) run(q, options, out);
  }
  return out;
}

bool all_passed(const std::vector<VerifyCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

nlohmann::json to_json(const VerifyCheck& c) {
  return {{"name", c.name}, {"q", c.q}, {"measured", c.measured}, {"bound", c.bound}, {"pass", c.pass}};
}

std::vector<std::uint32_t> odd_prime_powers(std::uint32_t lo, std::uint32_t hi) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t q = std::max<std::uint32_t>(lo, 3); q <= hi; ++q) {
    const auto [p, k] = prime_power_decompose(q);
    if (p > 2) out.push_back(q);
  }
  return out;
}

}  // namespace ffext
