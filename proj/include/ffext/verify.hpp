#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffext/finite_field.hpp"

namespace ffext {

struct VerifyCheck {
  std::string name;
  std::uint32_t q = 0;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  Tolerances tolerances{};
  std::uint64_t seed = 42;
  /// Random functions or polynomials drawn per q and per check.
  std::size_t samples = 10;
  std::size_t restarts = 8;
};

/// Suite names: fourier, curves, extension, distance, all.
std::vector<VerifyCheck> run_suite(std::string_view suite, const std::vector<std::uint32_t>& qs,
                                   const VerifyOptions& options = {});

bool all_passed(const std::vector<VerifyCheck>& checks);
nlohmann::json to_json(const VerifyCheck& c);

/// Odd prime powers in [lo, hi].
std::vector<std::uint32_t> odd_prime_powers(std::uint32_t lo, std::uint32_t hi);

}  // namespace ffext
