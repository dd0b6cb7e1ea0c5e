#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffext/curves.hpp"
#include "ffext/plane_fourier.hpp"

namespace ffext {

/// The normalized surface measure on a nonempty variety, realized as the
/// plane density (q^2 / |V|) 1_V on (F_q^2, dx).
class SurfaceMeasure {
 public:
  explicit SurfaceMeasure(Variety variety);

  const Variety& variety() const noexcept { return variety_; }
  const Field& field() const noexcept { return variety_.field(); }
  const PlaneFunction& density() const noexcept { return density_; }
  std::size_t size() const noexcept { return variety_.cardinality(); }
  /// q^-2 sum_x density(x); equals 1.
  double total_mass() const;

 private:
  Variety variety_;
  PlaneFunction density_;
};

/// (f dsigma)^v(m) = |V|^-1 sum_{x in V} chi(m.x) f(x) at every frequency.
/// `f_on_v` is indexed like variety().indices().
PlaneFunction extend(std::span<const Complex> f_on_v, const SurfaceMeasure& sigma);
/// Same, for a dx-tagged plane function that must vanish off V.
PlaneFunction extend(const PlaneFunction& f, const SurfaceMeasure& sigma);

/// (|V|^-1 sum_{x in V} |f(x)|^p)^{1/p}, or max |f| for p = inf.
double norm_on_variety(std::span<const Complex> f_on_v, double p);

/// ||(f dsigma)^v||_{L^r(dm)} / ||f||_{L^p(V, dsigma)}.
double rstar_ratio(std::span<const Complex> f_on_v, const SurfaceMeasure& sigma, double p, double r);

/// Evaluates N(f) = ||(f dsigma)^v||_{L^r(dm)} and an ascent direction for it
/// (the Wirtinger gradient of N^r with respect to conj f, up to a positive factor).
class ExtensionObjective {
 public:
  virtual ~ExtensionObjective() = default;
  virtual double value(std::span<const Complex> f) = 0;
  virtual double value_and_gradient(std::span<const Complex> f, std::span<Complex> grad) = 0;
};

/// Through the extension operator at all q^2 frequencies; any r in [1, inf].
std::unique_ptr<ExtensionObjective> make_direct_objective(const SurfaceMeasure& sigma, double r);
/// r = 4 only, through the pair-sum identity
/// ||(f dsigma)^v||_4^4 = q^2 |V|^-4 sum_s |sum_{a+b=s} f(a) f(b)|^2, O(|V|^2).
std::unique_ptr<ExtensionObjective> make_energy_objective(const SurfaceMeasure& sigma);

enum class ObjectiveKind { Auto, Direct, Energy };

struct AscentOptions {
  std::size_t restarts = 32;
  std::uint64_t seed = 42;
  std::size_t max_iterations = 200;
  double initial_step = 0.5;
  double tolerance = 1e-8;
  ObjectiveKind objective = ObjectiveKind::Auto;
  /// Exhaustive search over {-1, 0, 1}-valued f when q <= 5 and |V| is at most this.
  std::size_t exhaustive_max_points = 12;
  /// Ascents launched from the best two-point secant indicators.
  std::size_t secant_starts = 8;
  /// Cap on ascents launched from lines meeting V in three or more points.
  std::size_t rich_line_starts = 64;
  unsigned threads = 1;
};

struct RstarEstimate {
  double ratio = 0.0;
  std::vector<Complex> witness;
  std::string witness_origin;
  double nonneg_ratio = 0.0;
  std::vector<double> nonneg_witness;
  std::optional<double> exhaustive_floor;
  std::size_t ascents = 0;
  std::size_t evaluations = 0;
};

/// Lower bound on R*(p -> r) by multi-start projected gradient ascent.
RstarEstimate estimate_rstar(const SurfaceMeasure& sigma, double p, double r, const AscentOptions& options = {});

/// |{(a, b, c, d) in V^4 : a + b = c + d}|.
std::uint64_t additive_energy(const Variety& v);

struct AutocorrelationProfile {
  /// counts[a] = sum_{x in V} V(a - x), indexed by plane index of a.
  std::vector<std::uint32_t> counts;
  std::uint32_t max = 0;
  PlanePoint argmax{};
  std::uint32_t second_max = 0;
  std::uint32_t threshold = 0;  // deg(P)^2
  std::vector<PlanePoint> exceptional;
  std::uint32_t max_off_exceptional = 0;
};

AutocorrelationProfile autocorrelation_profile(const Variety& v);

/// Upper bound on R*(2 -> 4) from the representation counts r(s) of V + V:
/// R*^4 <= q^2 |V|^-2 min_k (k + r_(k+1)), with r sorted descending, since
/// |sum_{a+b=s} f(a) f(b)| <= ||f||_2^2 at every s and by Cauchy-Schwarz the
/// remaining s contribute at most max r(s) ||f||_2^4.
double rstar_upper_bound_2_4(const Variety& v);

/// ||(dsigma)^v||_4 computed from the additive energy: (q^2 E / |V|^4)^{1/4}.
double constant_function_ratio_2_4(const Variety& v);

struct NecessaryConditions {
  double bound_dimension = 0.0;               // r >= 4 / s
  double bound_point = 0.0;                   // r >= 2p / (s (p - 1))
  std::optional<double> bound_subspace;       // r >= p (2 - a) / ((p - 1)(s - a)), a = 1
  bool admissible = false;
};

NecessaryConditions necessary_conditions(double p, double r, double s, int alpha);

double dual_exponent(double p);

/// ||g^||_{L^{p'}(V, dsigma)} / ||g||_{L^{r'}(dm)} with g^ the dual transform.
double restriction_ratio(const PlaneFunction& g, const SurfaceMeasure& sigma, double p, double r);

/// Indicator of line /\ V as a function on V.
std::vector<Complex> line_indicator(const SurfaceMeasure& sigma, Line line);

/// |V_i /\ V_j| for each pair of component varieties.
std::vector<std::vector<std::size_t>> component_overlaps(std::span<const Variety> components);

struct ExtensionReport {
  std::uint32_t q = 0;
  std::string poly_text;
  std::size_t cardinality = 0;
  bool contains_line = false;
  std::optional<std::string> line_witness;
  double p_exp = 2.0;
  double r_exp = 4.0;
  double rstar_lower = 0.0;
  double rstar_nonneg = 0.0;
  std::optional<double> exhaustive_floor;
  std::optional<double> rstar_energy_bound;  // exact ratio at f = 1, from the energy
  std::optional<double> rstar_upper_bound;   // (2, 4) only
  double point_mass_ratio = 0.0;
  std::optional<double> line_test_ratio;
  std::uint32_t autocorrelation_max = 0;
  std::uint32_t autocorrelation_off_exceptional = 0;
  std::vector<std::pair<PlanePoint, std::uint32_t>> exceptional_points;
  std::uint64_t seed = 0;
};

ExtensionReport analyze_extension(const BivariatePoly& poly, double p, double r, const AscentOptions& options = {});

nlohmann::json to_json(const ExtensionReport& r);
std::string extension_csv_header();
std::string to_csv_row(const ExtensionReport& r);

}  // namespace ffext
