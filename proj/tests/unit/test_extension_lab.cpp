#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "ffext/extension_lab.hpp"
#include "ffext/rng.hpp"
#include "oracles/naive_field.hpp"

using namespace ffext;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SurfaceMeasure measure(const char* text, std::uint32_t q) { return SurfaceMeasure(Variety(parse_poly(text, Field::of_order(q)))); }

std::vector<Complex> random_on(std::size_t n, Rng& rng) {
  std::vector<Complex> f(n);
  for (Complex& c : f) c = Complex(rng.symmetric(), rng.symmetric());
  return f;
}

// Quadruple count straight from the definition.
std::uint64_t brute_energy(const Variety& v) {
  const Field& f = v.field();
  const auto pts = v.points();
  std::uint64_t e = 0;
  for (const auto& a : pts)
    for (const auto& b : pts)
      for (const auto& c : pts)
        for (const auto& d : pts) e += add(f, a, b) == add(f, c, d);
  return e;
}

}  // namespace

TEST(ExtensionLab, MassIsOne) {
  for (std::uint32_t q : {5u, 9u, 13u, 27u}) {
    EXPECT_NEAR(measure("x1^2+x2^2-1", q).total_mass(), 1.0, 1e-12);
    EXPECT_NEAR(measure("x2-x1^2", q).total_mass(), 1.0, 1e-12);
  }
  EXPECT_THROW(measure("x1^2+1", 3), Error);  // no F_3 point: -1 is not a square
}

TEST(ExtensionLab, ExtendExamples) {
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 5);
  const std::size_t n = s.size();
  const PlaneFunction one = extend(std::vector<Complex>(n, 1.0), s);
  EXPECT_NEAR(std::abs(one[0] - 1.0), 0.0, 1e-14);
  std::vector<Complex> delta(n, 0.0);
  delta[2] = 1.0;
  const PlaneFunction spike = extend(delta, s);
  for (const Complex& v : spike.values()) EXPECT_NEAR(std::abs(v), 1.0 / double(n), 1e-14);
  // the extension of 1 is the conjugate-phase transform of the density
  const PlaneFunction ft = forward_ft(s.density());
  const Field& f = s.field();
  for (std::uint32_t m = 0; m < plane_size(f); ++m) {
    EXPECT_LE(std::abs(one[m] - ft[point_index(f, neg(f, point_at(f, m)))]), 1e-13);
  }
  EXPECT_THROW(extend(std::vector<Complex>(n + 1, 1.0), s), Error);
}

TEST(ExtensionLab, ExtendMatchesNaiveSum) {
  Rng rng(3);
  const SurfaceMeasure s = measure("x2-x1^2", 9);
  const oracle::NaiveField n(s.field());
  const auto f = random_on(s.size(), rng);
  const PlaneFunction e = extend(f, s);
  const auto idx = s.variety().indices();
  for (std::uint32_t m = 0; m < 81; ++m) {
    Complex acc{};
    for (std::size_t j = 0; j < idx.size(); ++j) acc += n.chi(n.dot(m / 9, m % 9, idx[j] / 9, idx[j] % 9)) * f[j];
    EXPECT_LE(std::abs(e[m] - acc / double(idx.size())), 1e-13);
  }
}

TEST(ExtensionLab, ExtendPlaneFunctionRejectsOffVariety) {
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 5);
  const PlaneFunction off = PlaneFunction::point_mass(s.field(), Space::Function, {Elem{2}, Elem{2}});
  try {
    extend(off, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportViolation);
  }
  const PlaneFunction on = PlaneFunction::point_mass(s.field(), Space::Function, {Elem{1}, Elem{0}});
  EXPECT_NEAR(std::abs(extend(on, s)[7]), 0.25, 1e-14);
}

TEST(ExtensionLab, PointMassRatioIsOneWhenSizeIsQ) {
  for (std::uint32_t q : {5u, 7u, 9u, 25u}) {
    const SurfaceMeasure s = measure("x2-x1^2", q);
    std::vector<Complex> delta(s.size(), 0.0);
    delta[q / 2] = 1.0;
    EXPECT_NEAR(rstar_ratio(delta, s, 2.0, 4.0), 1.0, 1e-12);
  }
}

TEST(ExtensionLab, ConstantFunctionBeatsZeroFrequencyTerm) {
  for (double p : {1.0, 2.0, 4.0}) {
    for (double r : {2.0, 4.0, 8.0, kInf}) {
      const SurfaceMeasure s = measure("x1^2+x2^2-1", 7);
      EXPECT_GE(rstar_ratio(std::vector<Complex>(s.size(), 1.0), s, p, r), 1.0 - 1e-12);
    }
  }
}

TEST(ExtensionLab, LineTestClosedForm) {
  for (std::uint32_t q : {5u, 7u, 9u, 13u, 27u}) {
    const SurfaceMeasure s = measure("x1*x2", q);
    const Line l = *contains_line(s.variety().poly());
    const double n = double(s.size());
    const double expect = std::pow(double(q), 0.25) * std::sqrt(double(q) / n);
    EXPECT_NEAR(rstar_ratio(line_indicator(s, l), s, 2.0, 4.0), expect, 1e-12) << q;
    EXPECT_GE(expect, 0.5 * std::pow(double(q), 0.25));
  }
}

TEST(ExtensionLab, RatioErrors) {
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 5);
  auto code = [&](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code([&] { rstar_ratio(std::vector<Complex>(s.size(), 0.0), s, 2, 4); }), ErrorCode::ZeroFunction);
  EXPECT_EQ(code([&] { rstar_ratio(std::vector<Complex>(s.size(), 1.0), s, 0.5, 4); }), ErrorCode::BadExponent);
  EXPECT_EQ(code([&] { restriction_ratio(PlaneFunction(s.field(), Space::Frequency), s, 2, 4); }),
            ErrorCode::ZeroFunction);
}

TEST(ExtensionLab, FourthPowerEqualsConvolutionEnergy) {
  Rng rng(17);
  for (std::uint32_t q : {5u, 7u, 9u, 11u, 13u}) {
    for (const char* text : {"x1^2+x2^2-1", "x2-x1^2"}) {
      const SurfaceMeasure s = measure(text, q);
      const auto f = random_on(s.size(), rng);
      std::vector<Complex> dens(plane_size(s.field()), 0.0);
      const auto idx = s.variety().indices();
      for (std::size_t j = 0; j < idx.size(); ++j) dens[idx[j]] = f[j] * s.density()[idx[j]];
      const PlaneFunction fs(s.field(), Space::Function, dens);
      const double conv = std::pow(norm_lp(convolve(fs, fs), 2.0), 2.0);
      const double ext = std::pow(norm_lp(extend(f, s), 4.0), 4.0);
      EXPECT_NEAR(ext, conv, 1e-9 * std::max(1.0, conv)) << text << " q=" << q;
    }
  }
}

TEST(ExtensionLab, ObjectivesAgree) {
  Rng rng(19);
  for (std::uint32_t q : {5u, 9u, 13u}) {
    const SurfaceMeasure s = measure("x1^2+x2^2-1", q);
    auto direct = make_direct_objective(s, 4.0);
    auto energy = make_energy_objective(s);
    const auto f = random_on(s.size(), rng);
    std::vector<Complex> gd(s.size()), ge(s.size());
    const double vd = direct->value_and_gradient(f, gd);
    const double ve = energy->value_and_gradient(f, ge);
    EXPECT_NEAR(vd, ve, 1e-12);
    EXPECT_NEAR(vd, rstar_ratio(f, s, 2.0, 4.0) * norm_on_variety(f, 2.0), 1e-12);
    // both gradients of N^4 w.r.t. conj f, up to positive factors: parallel
    Complex dotp{};
    double nd = 0.0, ne = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      dotp += std::conj(gd[j]) * ge[j];
      nd += std::norm(gd[j]);
      ne += std::norm(ge[j]);
    }
    EXPECT_NEAR(dotp.real() / std::sqrt(nd * ne), 1.0, 1e-10);
    EXPECT_NEAR(dotp.imag(), 0.0, 1e-10 * std::sqrt(nd * ne));
  }
}

TEST(ExtensionLab, GradientIsAscentDirection) {
  Rng rng(23);
  const SurfaceMeasure s = measure("x2-x1^2", 7);
  for (double r : {3.0, 4.0, 6.0}) {
    auto obj = make_direct_objective(s, r);
    const auto f = random_on(s.size(), rng);
    std::vector<Complex> g(s.size());
    const double v0 = obj->value_and_gradient(f, g);
    // Wirtinger gradient: d/dh N^r(f + h g) at h = 0 is 2 Re<g, g> = 2 |g|^2
    double g2 = 0.0;
    for (const Complex& c : g) g2 += std::norm(c);
    const double h = 1e-6 / std::sqrt(g2);
    std::vector<Complex> fp = f, fm = f;
    for (std::size_t j = 0; j < f.size(); ++j) {
      fp[j] += h * g[j];
      fm[j] -= h * g[j];
    }
    const double fd = (std::pow(obj->value(fp), r) - std::pow(obj->value(fm), r)) / (2.0 * h);
    EXPECT_GT(v0, 0.0);
    EXPECT_NEAR(fd, 2.0 * g2, 1e-5 * g2) << "r=" << r;
  }
}

TEST(ExtensionLab, AdditiveEnergyExamples) {
  for (std::uint32_t q : {5u, 7u, 9u, 11u}) {
    const Field f = Field::of_order(q);
    const double qd = q;
    EXPECT_EQ(additive_energy(Variety(parse_poly("x2", f))), std::uint64_t(qd * qd * qd));
    EXPECT_EQ(additive_energy(Variety(parse_poly("x2-x1^2", f))), std::uint64_t(2 * qd * qd - qd));
  }
  for (std::uint32_t q : {5u, 7u}) {
    const Variety v(parse_poly("x1^2+x2^2-1", Field::of_order(q)));
    EXPECT_EQ(additive_energy(v), brute_energy(v));
  }
}

TEST(ExtensionLab, EnergyMatchesFourthPowerOfConstant) {
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 7);
  const double n = double(s.size());
  const double l4 = std::pow(norm_lp(extend(std::vector<Complex>(s.size(), 1.0), s), 4.0), 4.0);
  EXPECT_NEAR(l4 * n * n * n * n / 49.0, double(additive_energy(s.variety())), 1e-8);
  EXPECT_NEAR(constant_function_ratio_2_4(s.variety()), rstar_ratio(std::vector<Complex>(s.size(), 1.0), s, 2, 4), 1e-12);
}

TEST(ExtensionLab, AutocorrelationExamples) {
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Variety v(parse_poly("x1^2+x2^2-1", Field::of_order(q)));
    const AutocorrelationProfile prof = autocorrelation_profile(v);
    EXPECT_EQ(prof.counts[0], v.cardinality());
    EXPECT_EQ(prof.max, v.cardinality());
    for (std::uint32_t a = 1; a < prof.counts.size(); ++a) EXPECT_LE(prof.counts[a], 2u);
    ASSERT_EQ(prof.exceptional.size(), 1u);
    EXPECT_EQ(prof.exceptional[0], PlanePoint{});
    EXPECT_LE(prof.max_off_exceptional, 4u);
  }
  const Field f = Field::of_order(11);
  const Variety par(parse_poly("x2-x1^2", f));
  const AutocorrelationProfile prof = autocorrelation_profile(par);
  EXPECT_LE(prof.max, 2u);
  EXPECT_TRUE(prof.exceptional.empty());
  // a point outside V + V gets count 0
  std::map<std::uint32_t, int> sums;
  for (const auto& a : par.points())
    for (const auto& b : par.points()) ++sums[point_index(f, add(f, a, b))];
  for (std::uint32_t i = 0; i < plane_size(f); ++i) {
    EXPECT_EQ(prof.counts[i], sums.count(i) ? std::uint32_t(sums[i]) : 0u);
  }
}

TEST(ExtensionLab, NecessaryConditions) {
  const NecessaryConditions a = necessary_conditions(2, 4, 1, 0);
  EXPECT_TRUE(a.admissible);
  EXPECT_DOUBLE_EQ(a.bound_dimension, 4.0);
  EXPECT_DOUBLE_EQ(a.bound_point, 4.0);
  EXPECT_FALSE(a.bound_subspace.has_value());
  const NecessaryConditions b = necessary_conditions(2, 4, 1, 1);
  EXPECT_FALSE(b.admissible);
  EXPECT_TRUE(std::isinf(*b.bound_subspace));
  EXPECT_TRUE(necessary_conditions(2, kInf, 1, 1).admissible);
  for (double s : {0.5, 1.0, 1.5}) EXPECT_TRUE(necessary_conditions(1, kInf, s, 0).admissible);
  EXPECT_FALSE(necessary_conditions(2, 3.9, 1, 0).admissible);
  EXPECT_THROW(necessary_conditions(2, 4, 2.5, 0), Error);
  EXPECT_THROW(necessary_conditions(0.5, 4, 1, 0), Error);
  EXPECT_THROW(necessary_conditions(2, 4, 1, 2), Error);
}

TEST(ExtensionLab, RestrictionRatioExamples) {
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 7);
  const Field& f = s.field();
  EXPECT_NEAR(restriction_ratio(PlaneFunction::point_mass(f, Space::Frequency, {Elem{3}, Elem{5}}), s, 2, 4), 1.0, 1e-12);
  const double all = restriction_ratio(PlaneFunction::constant(f, Space::Frequency, 1.0), s, 2, 4);
  AscentOptions opt;
  opt.restarts = 8;
  EXPECT_LE(all, estimate_rstar(s, 2, 4, opt).ratio + 1e-6);
  EXPECT_DOUBLE_EQ(dual_exponent(2.0), 2.0);
  EXPECT_DOUBLE_EQ(dual_exponent(4.0), 4.0 / 3.0);
  EXPECT_TRUE(std::isinf(dual_exponent(1.0)));
  EXPECT_DOUBLE_EQ(dual_exponent(kInf), 1.0);
}

TEST(ExtensionLab, RestrictionDualityOnRandomFamily) {
  // sup of the restriction ratio equals sup of the extension ratio; on any
  // family neither side may exceed the upper bound of the other
  Rng rng(41);
  const SurfaceMeasure s = measure("x2-x1^2", 7);
  const double ub = rstar_upper_bound_2_4(s.variety());
  double best = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::vector<Complex> g(plane_size(s.field()));
    for (Complex& c : g) c = Complex(rng.symmetric(), rng.symmetric());
    best = std::max(best, restriction_ratio(PlaneFunction(s.field(), Space::Frequency, g), s, 2, 4));
  }
  EXPECT_LE(best, ub + 1e-9);
}

TEST(ExtensionLab, EstimateBelowUpperBoundAndAboveFloors) {
  AscentOptions opt;
  opt.restarts = 8;
  for (std::uint32_t q : {5u, 7u, 9u, 13u}) {
    for (const char* text : {"x1^2+x2^2-1", "x2-x1^2", "x1*x2"}) {
      const SurfaceMeasure s = measure(text, q);
      const RstarEstimate est = estimate_rstar(s, 2, 4, opt);
      EXPECT_LE(est.ratio, rstar_upper_bound_2_4(s.variety()) + 1e-9) << text << q;
      EXPECT_GE(est.ratio, constant_function_ratio_2_4(s.variety()) - 1e-9);
      EXPECT_GE(est.ratio, 1.0 - 1e-12);
      EXPECT_LE(est.nonneg_ratio, est.ratio + 1e-9);
      EXPECT_NEAR(rstar_ratio(est.witness, s, 2, 4), est.ratio, 1e-9);
      if (est.exhaustive_floor) EXPECT_LE(*est.exhaustive_floor, est.ratio + 1e-9);
      if (contains_line(s.variety().poly())) {
        const Line l = *contains_line(s.variety().poly());
        EXPECT_GE(est.ratio, rstar_ratio(line_indicator(s, l), s, 2, 4) - 1e-9);
      }
    }
  }
}

TEST(ExtensionLab, ExhaustiveFloorOnlyForTinyFields) {
  AscentOptions opt;
  opt.restarts = 2;
  EXPECT_TRUE(estimate_rstar(measure("x1^2+x2^2-1", 5), 2, 4, opt).exhaustive_floor.has_value());
  EXPECT_FALSE(estimate_rstar(measure("x1^2+x2^2-1", 7), 2, 4, opt).exhaustive_floor.has_value());
}

TEST(ExtensionLab, EstimateIsDeterministicAndThreadInvariant) {
  AscentOptions opt;
  opt.restarts = 6;
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 11);
  const RstarEstimate a = estimate_rstar(s, 2, 4, opt);
  opt.threads = 3;
  const RstarEstimate b = estimate_rstar(s, 2, 4, opt);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_EQ(a.witness_origin, b.witness_origin);
}

TEST(ExtensionLab, OtherExponents) {
  AscentOptions opt;
  opt.restarts = 4;
  const SurfaceMeasure s = measure("x1^2+x2^2-1", 7);
  for (auto [p, r] : {std::pair{2.0, 6.0}, {4.0, 4.0}, {1.0, kInf}, {2.0, kInf}}) {
    const RstarEstimate est = estimate_rstar(s, p, r, opt);
    EXPECT_TRUE(std::isfinite(est.ratio));
    EXPECT_GE(est.ratio, rstar_ratio(std::vector<Complex>(s.size(), 1.0), s, p, r) - 1e-9);
  }
  // R*(1 -> inf) is exactly 1
  EXPECT_NEAR(estimate_rstar(s, 1, kInf, opt).ratio, 1.0, 1e-9);
}

TEST(ExtensionLab, ComponentOverlaps) {
  const Field f = Field::of_order(7);
  const std::vector<Variety> comps = {Variety(parse_poly("x1", f)), Variety(parse_poly("x2", f)),
                                      Variety(parse_poly("x1-x2-1", f))};
  const auto o = component_overlaps(comps);
  EXPECT_EQ(o[0][0], 7u);
  EXPECT_EQ(o[0][1], 1u);
  EXPECT_EQ(o[1][2], 1u);
  EXPECT_EQ(o[2][0], 1u);
}

TEST(ExtensionLab, ReportFields) {
  AscentOptions opt;
  opt.restarts = 4;
  const Field f = Field::of_order(7);
  const ExtensionReport rep = analyze_extension(parse_poly("x1*x2", f), 2, 4, opt);
  EXPECT_TRUE(rep.contains_line);
  ASSERT_TRUE(rep.line_test_ratio.has_value());
  ASSERT_TRUE(rep.rstar_upper_bound.has_value());
  EXPECT_LE(rep.rstar_lower, *rep.rstar_upper_bound + 1e-9);
  EXPECT_EQ(rep.cardinality, 13u);
  const nlohmann::json j = to_json(rep);
  EXPECT_EQ(j.at("cardinality"), 13);
  EXPECT_TRUE(j.at("exhaustive_floor").is_null());
  const std::string row = to_csv_row(rep);
  const std::string header = extension_csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_THROW(analyze_extension(parse_poly("x1^2+1", Field::of_order(3)), 2, 4, opt), Error);
}
