// ffext: finite-field extension and distance-set experiments.
//
// Exit codes: 0 success, 1 a verification check failed, 2 bad configuration
// or a library error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ffext/curves.hpp"
#include "ffext/distance_lab.hpp"
#include "ffext/extension_lab.hpp"
#include "ffext/finite_field.hpp"
#include "ffext/format.hpp"
#include "ffext/verify.hpp"

using namespace ffext;
using nlohmann::json;

namespace {

constexpr int kSchema = 1;

struct QSpec {
  std::vector<std::uint32_t> values;
  bool from_range = false;
};

// "a:b" expands to the odd prime powers in [a, b]; "a,b,c" is taken literally.
QSpec parse_qs(const std::string& text) {
  QSpec out;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const auto lo = static_cast<std::uint32_t>(std::stoul(text.substr(0, colon)));
      const auto hi = static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
      if (lo > hi) throw Error(ErrorCode::BadRange, "empty q range " + text);
      out.values = odd_prime_powers(lo, hi);
      out.from_range = true;
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.values.push_back(static_cast<std::uint32_t>(std::stoul(item)));
      }
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse q list: " + text);
  }
  if (out.values.empty()) throw Error(ErrorCode::BadRange, "no q values in " + text);
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Output {
  std::string format = "csv";
  std::string path;
  bool no_timestamp = false;
  unsigned jobs = 0;
  std::uint64_t seed = 42;

  unsigned workers() const {
    if (const char* env = std::getenv("FFEXT_JOBS")) {
      try {
        const unsigned long v = std::stoul(env);
        if (v > 0) return static_cast<unsigned>(v);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidArgument, std::string("FFEXT_JOBS is not a positive integer: ") + env);
      }
    }
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  std::string csv_preamble(const std::string& command) const {
    std::string s = "# ffext schema=" + std::to_string(kSchema) + " command=" + command + "\n";
    if (!no_timestamp) s += "# generated " + timestamp() + "\n";
    return s;
  }

  json json_envelope(const std::string& command) const {
    json j = {{"schema", kSchema}, {"command", command}, {"seed", seed}};
    if (!no_timestamp) j["generated"] = timestamp();
    return j;
  }

  void emit(const std::string& csv, const json& j) const {
    const bool want_csv = format == "csv" || format == "both";
    const bool want_json = format == "json" || format == "both";
    auto write = [](const std::string& path, const std::string& text) {
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
      f << text;
    };
    if (path.empty()) {
      if (want_csv) std::cout << csv;
      if (want_json) std::cout << j.dump(2) << "\n";
    } else if (format == "both") {
      write(path + ".csv", csv);
      write(path + ".json", j.dump(2) + "\n");
    } else {
      write(path, want_csv ? csv : j.dump(2) + "\n");
    }
  }
};

// Runs fn(i) for i in [0, n) on a pool; results land in caller-owned slots,
// so output order does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string complex_text(Complex z) { return format_real(z.real()) + (z.imag() < 0 ? "-" : "+") + format_real(std::abs(z.imag())) + "i"; }

// (-1)^{k-1} sqrt(q), times i^k when p = 3 mod 4, written out.
std::string gauss_symbolic(const Field& f) {
  int sign = f.k() % 2 == 1 ? 1 : -1;
  bool imaginary = false;
  if (f.p() % 4 == 3) {
    const std::uint32_t r = f.k() % 4;
    if (r >= 2) sign = -sign;
    imaginary = r % 2 == 1;
  }
  std::string mag;
  if (f.k() % 2 == 0) {
    std::uint64_t v = 1;
    for (std::uint32_t i = 0; i < f.k() / 2; ++i) v *= f.p();
    mag = std::to_string(v);
  } else {
    mag = "sqrt(" + std::to_string(f.q()) + ")";
  }
  return std::string(sign < 0 ? "-" : "") + (imaginary ? "i*" : "") + mag;
}

int cmd_field(const Output& out, std::uint32_t p, std::uint32_t k, std::optional<std::uint32_t> q) {
  const Field f = q ? Field::of_order(*q) : Field::create(p, k);
  const Complex direct = f.gauss_sum();
  const Complex closed = f.gauss_sum_closed_form();
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"p", std::to_string(f.p())},
      {"k", std::to_string(f.k())},
      {"q", std::to_string(f.q())},
      {"modulus", f.modulus_string()},
      {"generator", f.to_string(f.generator())},
      {"gauss_sum_direct", complex_text(direct)},
      {"gauss_sum_closed_form", complex_text(closed)},
      {"gauss_sum_symbolic", gauss_symbolic(f)},
      {"gauss_sum_abs_error", format_real(std::abs(direct - closed))},
  };
  std::string csv = out.csv_preamble("field") + "key,value\n";
  json j = out.json_envelope("field");
  for (const auto& [key, value] : rows) {
    csv += key + "," + csv_quote(value) + "\n";
    j[key] = value;
  }
  j["gauss_sum_direct"] = {direct.real(), direct.imag()};
  j["gauss_sum_closed_form"] = {closed.real(), closed.imag()};
  out.emit(csv, j);
  return 0;
}

int cmd_variety(const Output& out, std::uint32_t q, const std::string& poly_text) {
  const Field f = Field::of_order(q);
  const BivariatePoly poly = parse_poly(poly_text, f);
  const Variety v(poly);
  const auto line = contains_line(poly);
  const auto prof = autocorrelation_profile(v);
  const KatzProfile katz = katz_profile(v);
  json j = out.json_envelope("variety");
  j["q"] = q;
  j["poly"] = poly.to_string();
  j["degree"] = poly.degree();
  j["cardinality"] = v.cardinality();
  j["cardinality_over_q"] = static_cast<double>(v.cardinality()) / q;
  j["line_witness"] = line ? json(to_string(f, *line)) : json(nullptr);
  j["schwartz_zippel_margin"] = poly.degree() > 0 ? json(schwartz_zippel_margin(v)) : json(nullptr);
  j["autocorrelation_max"] = prof.max;
  j["autocorrelation_second_max"] = prof.second_max;
  j["autocorrelation_threshold"] = prof.threshold;
  j["exceptional_count"] = prof.exceptional.size();
  j["autocorrelation_off_exceptional"] = prof.max_off_exceptional;
  j["katz_max_abs"] = katz.max_abs;
  j["katz_constant"] = katz.constant;
  std::string csv = out.csv_preamble("variety") + "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "schema" || it.key() == "command" || it.key() == "generated" || it.key() == "seed") continue;
    const std::string value = it->is_string() ? it->get<std::string>() : it->is_null() ? "" : it->dump();
    csv += it.key() + "," + csv_quote(value) + "\n";
  }
  out.emit(csv, j);
  return 0;
}

int cmd_extension(const Output& out, const std::string& poly_text, const std::string& qs_text, double p_exp,
                  double r_exp, std::size_t restarts) {
  const QSpec qs = parse_qs(qs_text);
  std::vector<std::optional<ExtensionReport>> reports(qs.values.size());
  std::vector<std::string> skipped(qs.values.size());
  AscentOptions opt;
  opt.restarts = restarts;
  opt.seed = out.seed;
  parallel_for(qs.values.size(), out.workers(), [&](std::size_t i) {
    try {
      const Field f = Field::of_order(qs.values[i]);
      reports[i] = analyze_extension(parse_poly(poly_text, f), p_exp, r_exp, opt);
    } catch (const Error& e) {
      // a sweep tolerates q where the polynomial is out of range or V is empty
      if (!qs.from_range) throw;
      skipped[i] = e.what();
    }
  });
  std::string csv = out.csv_preamble("extension") + extension_csv_header() + "\n";
  json j = out.json_envelope("extension");
  j["rows"] = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i]) {
      csv += to_csv_row(*reports[i]) + "\n";
      j["rows"].push_back(to_json(*reports[i]));
    } else {
      std::cerr << "skipped q=" << qs.values[i] << ": " << skipped[i] << "\n";
    }
  }
  out.emit(csv, j);
  return 0;
}

int cmd_distance(const Output& out, const std::string& qs_text, std::optional<std::size_t> size_e,
                 std::optional<std::size_t> size_f, std::optional<double> density, std::size_t trials,
                 const std::string& generators) {
  const QSpec qs = parse_qs(qs_text);
  std::vector<SetGenerator> gens;
  {
    std::stringstream ss(generators);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) gens.push_back(generator_from_string(item));
    }
  }
  if (gens.empty()) throw Error(ErrorCode::InvalidArgument, "no generators given");
  std::vector<ExperimentReport> reports(qs.values.size());
  std::vector<ExperimentConfig> configs(qs.values.size());
  for (std::size_t i = 0; i < qs.values.size(); ++i) {
    ExperimentConfig& c = configs[i];
    c.q = qs.values[i];
    const double plane = static_cast<double>(c.q) * c.q;
    if (density) {
      if (!(*density > 0.0 && *density <= 1.0)) throw Error(ErrorCode::BadSizes, "density must lie in (0, 1]");
      c.size_E = c.size_F = static_cast<std::size_t>(std::max(1.0, std::round(*density * plane)));
    } else {
      // default sizes put |E||F| just above q^{8/3}
      const auto def = static_cast<std::size_t>(std::ceil(std::pow(c.q, 4.0 / 3.0)));
      c.size_E = size_e.value_or(def);
      c.size_F = size_f.value_or(c.size_E);
    }
    c.trials = trials;
    c.seed = out.seed;
    c.generators = gens;
    if (Field::of_order(c.q).k() < 2) {
      std::erase(c.generators, SetGenerator::SubfieldGrid);
      if (c.generators.empty()) throw Error(ErrorCode::InvalidArgument, "subfield_grid needs q = p^k with k >= 2");
    }
  }
  parallel_for(configs.size(), out.workers(), [&](std::size_t i) { reports[i] = falconer_experiment(configs[i]); });
  std::string csv = out.csv_preamble("distance") + experiment_csv_header() + "\n";
  json j = out.json_envelope("distance");
  j["rows"] = json::array();
  j["summaries"] = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const ExperimentRow& row : reports[i].rows) {
      csv += to_csv_row(row) + "\n";
      j["rows"].push_back(to_json(row));
    }
    json s = to_json(reports[i].summary);
    s["q"] = qs.values[i];
    j["summaries"].push_back(std::move(s));
  }
  out.emit(csv, j);
  return 0;
}

int cmd_verify(const Output& out, const std::string& suite, const std::string& qs_text,
               std::optional<double> tolerance, std::size_t samples) {
  const QSpec qs = parse_qs(qs_text);
  VerifyOptions opt;
  opt.seed = out.seed;
  opt.samples = samples;
  if (tolerance) opt.tolerances.identity = *tolerance;
  const auto checks = run_suite(suite, qs.values, opt);
  const bool ok = all_passed(checks);
  std::string csv = out.csv_preamble("verify") + "name,q,measured,bound,pass\n";
  json j = out.json_envelope("verify");
  j["suite"] = suite;
  j["passed"] = ok;
  j["checks"] = json::array();
  std::size_t failed = 0;
  for (const VerifyCheck& c : checks) {
    csv += csv_quote(c.name) + "," + std::to_string(c.q) + "," + format_real(c.measured) + "," +
           format_real(c.bound) + "," + (c.pass ? "1" : "0") + "\n";
    j["checks"].push_back(to_json(c));
    if (!c.pass) {
      ++failed;
      std::cerr << "FAIL " << c.name << " q=" << c.q << " measured=" << format_real(c.measured)
                << " bound=" << format_real(c.bound) << "\n";
    }
  }
  std::cerr << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  out.emit(csv, j);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-field Fourier extension and distance-set experiments"};
  app.require_subcommand(1);
  Output out;
  app.add_option("--format", out.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  app.add_option("--out", out.path, "output path (stdout when omitted); with --format both, .csv and .json are appended");
  app.add_flag("--no-timestamp", out.no_timestamp, "omit the timestamp line");
  app.add_option("--jobs", out.jobs, "worker threads (FFEXT_JOBS overrides)");
  app.add_option("--seed", out.seed, "base seed")->capture_default_str();

  auto* field = app.add_subcommand("field", "field construction facts");
  std::uint32_t p = 0, k = 1;
  std::optional<std::uint32_t> field_q;
  field->add_option("--p", p, "characteristic");
  field->add_option("--k", k, "extension degree")->capture_default_str();
  field->add_option("--q", field_q, "field order, instead of --p/--k");

  auto* variety = app.add_subcommand("variety", "point count and structure of V(P)");
  std::uint32_t variety_q = 0;
  std::string poly_text;
  variety->add_option("--q", variety_q, "field order")->required();
  variety->add_option("--poly", poly_text, "polynomial in x1, x2")->required();

  auto* extension = app.add_subcommand("extension", "R*(p -> r) estimates over a q sweep");
  std::string qs_text;
  double p_exp = 2.0, r_exp = 4.0;
  std::size_t restarts = 32;
  extension->add_option("--poly", poly_text, "polynomial in x1, x2")->required();
  extension->add_option("--q", qs_text, "q list a,b,c or range a:b")->required();
  extension->add_option("--p-exp", p_exp, "exponent p (inf allowed)")->capture_default_str();
  extension->add_option("--r-exp", r_exp, "exponent r (inf allowed)")->capture_default_str();
  extension->add_option("--restarts", restarts, "random restarts")->capture_default_str();

  auto* distance = app.add_subcommand("distance", "distance-set experiments");
  std::optional<std::size_t> size_e, size_f;
  std::optional<double> density;
  std::size_t trials = 10;
  std::string generators = "uniform";
  distance->add_option("--q", qs_text, "q list a,b,c or range a:b")->required();
  auto* se = distance->add_option("--size-e", size_e, "|E| (default ceil(q^{4/3}))");
  distance->add_option("--size-f", size_f, "|F| (default |E|)");
  distance->add_option("--density", density, "|E| = |F| = density * q^2")->excludes(se);
  distance->add_option("--trials", trials, "trials per generator")->capture_default_str();
  distance->add_option("--generator", generators,
                       "comma list of uniform, line_concentrated, subfield_grid, circle_union")
      ->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  std::string suite = "all";
  std::optional<double> tolerance;
  std::size_t samples = 10;
  std::string verify_qs = "3,5,7";
  verify->add_option("--suite", suite, "fourier, curves, extension, distance or all")
      ->check(CLI::IsMember({"fourier", "curves", "extension", "distance", "all"}))
      ->capture_default_str();
  verify->add_option("--q", verify_qs, "q list a,b,c or range a:b")->capture_default_str();
  verify->add_option("--tolerance", tolerance, "override the identity tolerance");
  verify->add_option("--samples", samples, "random samples per check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*field) {
      if (!field_q && p == 0) throw Error(ErrorCode::InvalidArgument, "field needs --p or --q");
      return cmd_field(out, p, k, field_q);
    }
    if (*variety) return cmd_variety(out, variety_q, poly_text);
    if (*extension) return cmd_extension(out, poly_text, qs_text, p_exp, r_exp, restarts);
    if (*distance) return cmd_distance(out, qs_text, size_e, size_f, density, trials, generators);
    if (*verify) return cmd_verify(out, suite, verify_qs, tolerance, samples);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
