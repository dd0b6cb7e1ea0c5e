#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffext/curves.hpp"
#include "ffext/plane_fourier.hpp"
#include "ffext/rng.hpp"

namespace ffext {

/// The level sets V_t = {x : P(x) = t} of one polynomial, for every t in F_q.
/// Copies share state; transforms of the level indicators are computed once,
/// on first use.
class LevelSetFamily {
 public:
  explicit LevelSetFamily(BivariatePoly poly);
  /// P = x1^2 + x2^2.
  static LevelSetFamily circle(const Field& field);
  /// P = a1 x1^d + a2 x2^d.
  static LevelSetFamily diagonal(const Field& field, Elem a1, Elem a2, std::uint32_t d);

  const Field& field() const noexcept;
  const BivariatePoly& poly() const noexcept;
  bool is_circle() const noexcept;

  struct DiagonalForm {
    Elem a1;
    Elem a2;
    std::uint32_t d;
  };
  /// (a1, a2, d) when P = a1 x1^d + a2 x2^d with a1 a2 != 0.
  std::optional<DiagonalForm> diagonal_form() const noexcept;

  /// P at every plane index.
  std::span<const Elem> values() const noexcept;
  /// Sorted plane indices of V_t.
  std::span<const std::uint32_t> level(Elem t) const;
  std::size_t level_size(Elem t) const { return level(t).size(); }
  Variety level_variety(Elem t) const;

  /// forward_ft(indicator V_t) at every frequency index.
  std::span<const Complex> level_ft(Elem t) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

struct PointSetPair {
  Field field;
  std::vector<PlanePoint> E;
  std::vector<PlanePoint> F;
  std::string source = "literal";
};

/// Throws EmptySet if either side is empty, InvalidArgument on duplicates.
PointSetPair make_pair(const Field& field, std::vector<PlanePoint> E, std::vector<PlanePoint> F,
                       std::string source = "literal");

/// nu(t) = #{(x, y) in E x F : P(x - y) = t}, indexed by the element index of t.
struct NuFunction {
  std::vector<std::uint64_t> values;
  std::uint64_t total() const;
};

NuFunction counting_function(const PointSetPair& pair, const LevelSetFamily& fam);
/// q^4 sum_m conj(E^)(m) F^(m) V_t^(m) for every t.
std::vector<double> counting_function_fourier(const PointSetPair& pair, const LevelSetFamily& fam);

/// {x1^n + x2^n : x = e - f, e in E, f in F}, sorted. Requires 2 <= n < p.
std::vector<Elem> distance_set(const PointSetPair& pair, std::uint32_t n = 2);

/// q^-1 delta_0(m) + q^-3 G^2 sum_{s != 0} chi(||m|| / 4s + s t) for the circle family.
Complex sphere_ft_explicit(const LevelSetFamily& fam, Elem t, PlanePoint m);

struct KeylemmaSum {
  Complex value;         // sum_t V_t^(m) |V_t|, from the transforms
  Complex first_piece;   // q^-2 q sum_t sum_{P(x)=t} chi(-x.m)
  Complex second_piece;  // q^-2 sum_t R_t sum_{P(x)=t} chi(-x.m), R_t = |V_t| - q
  /// first_piece + second_piece, by direct character sums; equals value.
  Complex reconstructed() const;
};

KeylemmaSum keylemma_sum(const LevelSetFamily& fam, PlanePoint m);
/// sum_t w V_t^(m) for a constant weight w.
Complex constant_weight_sum(const LevelSetFamily& fam, PlanePoint m, Complex w);

struct DoubleDecay {
  Complex lhs;  // sum_t V_t^(m) V_t^(xi)
  Complex rhs;  // q^-3 sum_{s != 0} chi(s (||m|| - ||xi||))
};

DoubleDecay double_decay_sum(const LevelSetFamily& fam, PlanePoint m, PlanePoint xi);

struct NuZeroDecomposition {
  std::uint64_t direct = 0;
  double mass_term = 0.0;       // q^-1 |E| |F|
  Complex null_cone_term;       // q^3 sum_{||m|| = 0} conj(E^) F^
  Complex full_term;            // q^2 sum_m conj(E^) F^
  double reconstructed() const { return mass_term + null_cone_term.real() - full_term.real(); }
};

/// Circle family only, q = 1 (mod 4).
NuZeroDecomposition nu_zero_decomposition(const PointSetPair& pair, const LevelSetFamily& fam);

struct RestrictionEnergy {
  double energy = 0.0;  // sum_{m in V_t} |H^(m)|^2, H^(m) = q^-2 sum_{x in H} chi(-x.m)
  double ratio = 0.0;   // energy / (q^-3 |H|^{3/2})
};

RestrictionEnergy restriction_energy(std::span<const PlanePoint> H, const LevelSetFamily& fam, Elem t);

struct RestrictionProfile {
  std::vector<double> energies;  // by t; t = 0 left at 0
  double max_ratio = 0.0;
  Elem argmax{};
};

/// restriction_energy at every t != 0, sharing one transform of H.
RestrictionProfile restriction_profile(std::span<const PlanePoint> H, const LevelSetFamily& fam);

struct SecondMoment {
  std::uint64_t direct = 0;  // sum_t nu(t)^2
  double I = 0.0;
  double II = 0.0;
  double III = 0.0;
  double III_1 = 0.0;
  double III_2 = 0.0;
  double main_term = 0.0;   // q^6 sum_k (sum_{m in V_k} conj(E^) F^)^2
  double remainder = 0.0;   // exact value of the lower-order term
  double reconstructed() const { return I + II + III; }
};

SecondMoment second_moment_decomposition(const PointSetPair& pair, const LevelSetFamily& fam);

enum class SetGenerator { Uniform, LineConcentrated, SubfieldGrid, CircleUnion };

std::string to_string(SetGenerator g);
SetGenerator generator_from_string(std::string_view name);

/// A point set of exactly `size` distinct points.
std::vector<PlanePoint> generate_set(const Field& field, SetGenerator gen, std::size_t size, Rng& rng);

struct ExperimentConfig {
  std::uint32_t q = 0;
  std::size_t size_E = 0;
  std::size_t size_F = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 42;
  std::vector<SetGenerator> generators{SetGenerator::Uniform};
  unsigned threads = 1;
};

struct ExperimentRow {
  std::uint32_t q = 0;
  std::uint32_t residue_class = 0;  // q mod 4
  std::size_t size_E = 0;
  std::size_t size_F = 0;
  double product_vs_q83 = 0.0;      // |E||F| / q^{8/3}
  std::size_t distances = 0;
  double ratio = 0.0;               // |Delta| / q
  SetGenerator generator = SetGenerator::Uniform;
  std::uint64_t seed = 0;
  std::size_t trial = 0;
};

struct ExperimentSummary {
  std::size_t above = 0;  // trials with |E||F| >= q^{8/3}
  double above_min = 0.0;
  double above_mean = 0.0;
  std::size_t below = 0;
  double below_min = 0.0;
  double below_mean = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  ExperimentSummary summary;
};

ExperimentReport falconer_experiment(const ExperimentConfig& config);

std::string experiment_csv_header();
std::string to_csv_row(const ExperimentRow& row);
nlohmann::json to_json(const ExperimentRow& row);
nlohmann::json to_json(const ExperimentSummary& s);

/// Machine-readable outcome of one lemma check.
struct LemmaCheck {
  std::string lemma;
  std::uint32_t q = 0;
  double max_abs_value = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // max_abs_value / bound
  std::string witness;
};

nlohmann::json to_json(const LemmaCheck& c);

/// max over m != 0 of |sum_t V_t^(m) |V_t||.
LemmaCheck keylemma_check(const LevelSetFamily& fam, double bound);
/// max over m, xi != 0 of |lhs - rhs|.
LemmaCheck double_decay_check(const LevelSetFamily& fam, double tolerance);
/// max over (t, m) of |explicit - direct| for the circle family.
LemmaCheck explicit_formula_check(const LevelSetFamily& fam, double tolerance);
/// max over t != 0 of ||V_t| - q| / sqrt(q).
LemmaCheck level_size_check(const LevelSetFamily& fam, double bound);
/// Max restriction ratio over `trials` seeded random H of random size.
LemmaCheck restriction_check(const LevelSetFamily& fam, std::size_t trials, std::uint64_t seed, double bound);

}  // namespace ffext
