#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <set>

#include "ffext/finite_field.hpp"
#include "ffext/rng.hpp"
#include "oracles/naive_field.hpp"

using namespace ffext;

namespace {

template <typename F>
void expect_error(ErrorCode code, F&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Brute-force irreducibility: no monic factor of degree 1..k/2.
bool irreducible(const std::vector<std::uint32_t>& mod, std::uint32_t p) {
  const std::size_t k = mod.size() - 1;
  for (std::size_t d = 1; d <= k / 2; ++d) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < d; ++i) count *= p;
    for (std::uint64_t code = 0; code < count; ++code) {
      std::vector<std::int64_t> g(d + 1, 0);
      std::uint64_t c = code;
      for (std::size_t i = 0; i < d; ++i) {
        g[i] = static_cast<std::int64_t>(c % p);
        c /= p;
      }
      g[d] = 1;
      std::vector<std::int64_t> r(mod.begin(), mod.end());
      for (std::size_t top = k; top >= d; --top) {
        const std::int64_t lead = ((r[top] % p) + p) % p;
        for (std::size_t i = 0; i <= d; ++i) r[top - d + i] -= lead * g[i];
        if (top == d) break;
      }
      bool zero = true;
      for (std::size_t i = 0; i < d; ++i) zero = zero && ((r[i] % p) + p) % p == 0;
      if (zero) return false;
    }
  }
  return true;
}

const std::vector<std::pair<std::uint32_t, std::uint32_t>> kSmall = {{3, 1}, {5, 1}, {7, 1}, {3, 2}, {5, 2},
                                                                      {3, 3}, {7, 2}, {11, 1}, {13, 1}};

}  // namespace

TEST(FiniteField, PrimeFieldModulusIsX) {
  const Field f = Field::create(5, 1);
  EXPECT_EQ(f.q(), 5u);
  ASSERT_EQ(f.modulus().size(), 2u);
  EXPECT_EQ(f.modulus()[0], 0u);
  EXPECT_EQ(f.modulus()[1], 1u);
}

TEST(FiniteField, NineUsesXSquaredPlusOne) {
  const Field f = Field::create(3, 2);
  const std::vector<std::uint32_t> mod(f.modulus().begin(), f.modulus().end());
  EXPECT_EQ(mod, (std::vector<std::uint32_t>{1, 0, 1}));
  // x^2 + 1 has no root mod 3
  for (std::uint32_t x = 0; x < 3; ++x) EXPECT_NE((x * x + 1) % 3, 0u);
}

TEST(FiniteField, ModulusIsSmallestIrreducible) {
  for (auto [p, k] : kSmall) {
    if (k == 1) continue;
    const Field f = Field::create(p, k);
    const std::vector<std::uint32_t> mod(f.modulus().begin(), f.modulus().end());
    EXPECT_TRUE(irreducible(mod, p));
    // every lexicographically smaller monic polynomial is reducible
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < k; ++i) count *= p;
    for (std::uint64_t code = 0; code < count; ++code) {
      std::vector<std::uint32_t> cand(k + 1, 0);
      std::uint64_t c = code;
      for (std::uint32_t i = 0; i < k; ++i) {
        cand[i] = static_cast<std::uint32_t>(c % p);
        c /= p;
      }
      cand[k] = 1;
      bool smaller = std::lexicographical_compare(cand.begin(), cand.end(), mod.begin(), mod.end());
      if (smaller) {
        EXPECT_FALSE(irreducible(cand, p)) << "q=" << f.q();
      }
    }
  }
}

TEST(FiniteField, ConstructionErrors) {
  expect_error(ErrorCode::NotPrime, [] { Field::create(4, 1); });
  expect_error(ErrorCode::NotPrime, [] { Field::create(1, 1); });
  expect_error(ErrorCode::EvenCharacteristic, [] { Field::create(2, 3); });
  expect_error(ErrorCode::CapExceeded, [] { Field::create(3, 10); });
  expect_error(ErrorCode::CapExceeded, [] { Field::create(7, 2, 40); });
  expect_error(ErrorCode::NotPrime, [] { Field::of_order(15); });
}

TEST(FiniteField, OfOrderMatchesCreate) {
  const Field a = Field::of_order(27);
  EXPECT_EQ(a.p(), 3u);
  EXPECT_EQ(a.k(), 3u);
  EXPECT_EQ(a, Field::create(3, 3));
}

TEST(FiniteField, SmallExamples) {
  const Field f5 = Field::create(5, 1);
  EXPECT_EQ(f5.inv(Elem{2}), Elem{3});
  const Field f9 = Field::create(3, 2);
  const Elem theta = f9.element(3);  // coordinates (0, 1)
  EXPECT_EQ(f9.mul(theta, theta), f9.from_int(-1));
  EXPECT_EQ(f9.from_int(-1), Elem{2});
  expect_error(ErrorCode::ZeroInverse, [&] { f5.inv(Elem{0}); });
  expect_error(ErrorCode::InvalidArgument, [&] { f5.element(5); });
}

TEST(FiniteField, ArithmeticMatchesNaiveOracle) {
  for (auto [p, k] : kSmall) {
    const Field f = Field::create(p, k);
    const oracle::NaiveField n(f);
    for (std::uint32_t a = 0; a < f.q(); ++a) {
      for (std::uint32_t b = 0; b < f.q(); ++b) {
        ASSERT_EQ(f.add(Elem{a}, Elem{b}).v, n.add(a, b));
        ASSERT_EQ(f.sub(Elem{a}, Elem{b}).v, n.sub(a, b));
        ASSERT_EQ(f.mul(Elem{a}, Elem{b}).v, n.mul(a, b));
      }
      ASSERT_EQ(f.neg(Elem{a}).v, n.neg(a));
      ASSERT_EQ(f.trace(Elem{a}), n.trace(a));
      ASSERT_EQ(f.eta(Elem{a}), n.eta(a));
      ASSERT_EQ(f.pow(Elem{a}, 7).v, n.pow(a, 7));
    }
  }
}

TEST(FiniteField, AxiomsExhaustive) {
  for (std::uint32_t q : {9u, 25u, 27u, 49u}) {
    const Field f = Field::of_order(q);
    for (std::uint32_t a = 0; a < q; ++a) {
      const Elem x{a};
      if (a != 0) {
        EXPECT_EQ(f.mul(x, f.inv(x)), f.one());
        EXPECT_EQ(f.pow(x, q - 1), f.one());
      }
      EXPECT_EQ(f.add(x, f.neg(x)), f.zero());
      for (std::uint32_t b = 0; b < q; ++b) {
        const Elem y{b};
        ASSERT_EQ(f.add(x, y), f.add(y, x));
        ASSERT_EQ(f.mul(x, y), f.mul(y, x));
        for (std::uint32_t c = 0; c < q; c += 3) {
          const Elem z{c};
          ASSERT_EQ(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
          ASSERT_EQ(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
          ASSERT_EQ(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
        }
      }
    }
  }
}

TEST(FiniteField, GeneratorHasFullOrder) {
  for (std::uint32_t q : {3u, 9u, 25u, 27u, 121u}) {
    const Field f = Field::of_order(q);
    std::set<std::uint32_t> seen;
    Elem x = f.one();
    for (std::uint32_t i = 0; i + 1 < q; ++i) {
      seen.insert(x.v);
      EXPECT_EQ(f.log(x), i);
      x = f.mul(x, f.generator());
    }
    EXPECT_EQ(seen.size(), q - 1);
    EXPECT_EQ(x, f.one());
  }
}

TEST(FiniteField, TraceExamples) {
  for (auto [p, k] : kSmall) {
    const Field f = Field::create(p, k);
    EXPECT_EQ(f.trace(f.zero()), 0u);
    EXPECT_EQ(f.trace(f.one()), k % p);
  }
  const Field f9 = Field::create(3, 2);
  EXPECT_EQ(f9.trace(f9.element(3)), 0u);
}

TEST(FiniteField, CharacterHomomorphism) {
  for (std::uint32_t q : {5u, 9u, 27u, 49u}) {
    const Field f = Field::of_order(q);
    for (std::uint32_t a = 0; a < q; ++a) {
      for (std::uint32_t b = 0; b < q; ++b) {
        ASSERT_LE(std::abs(f.chi(f.add(Elem{a}, Elem{b})) - f.chi(Elem{a}) * f.chi(Elem{b})), 1e-10);
      }
    }
  }
  const Field big = Field::of_order(121);
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Elem a{static_cast<std::uint32_t>(rng.below(121))}, b{static_cast<std::uint32_t>(rng.below(121))};
    ASSERT_LE(std::abs(big.chi(big.add(a, b)) - big.chi(a) * big.chi(b)), 1e-10);
  }
}

TEST(FiniteField, CharacterExamplesAndOrthogonality) {
  const Field f5 = Field::create(5, 1);
  EXPECT_LE(std::abs(f5.chi(f5.zero()) - Complex(1.0, 0.0)), 1e-15);
  EXPECT_LE(std::abs(f5.chi(f5.one()) - std::polar(1.0, 2.0 * std::numbers::pi / 5.0)), 1e-14);
  for (std::uint32_t q = 3; q <= 121; ++q) {
    const auto [p, k] = prime_power_decompose(q);
    if (p < 3) continue;
    const Field f = Field::of_order(q);
    for (std::uint32_t a = 1; a < q; ++a) {
      Complex s{};
      for (std::uint32_t x = 0; x < q; ++x) s += f.chi(f.mul(Elem{a}, Elem{x}));
      ASSERT_LE(std::abs(s), 1e-9) << "q=" << q << " a=" << a;
    }
  }
}

TEST(FiniteField, QuadraticCharacter) {
  const Field f5 = Field::create(5, 1);
  EXPECT_EQ(f5.eta(f5.zero()), 0);
  EXPECT_EQ(f5.eta(Elem{2}), -1);
  EXPECT_EQ(f5.eta(Elem{4}), 1);
  for (std::uint32_t q : {3u, 7u, 11u, 19u, 27u, 43u}) {
    const Field f = Field::of_order(q);
    EXPECT_EQ(f.eta(f.from_int(-1)), -1) << q;
  }
  for (std::uint32_t q : {5u, 9u, 13u, 25u}) {
    const Field f = Field::of_order(q);
    EXPECT_EQ(f.eta(f.from_int(-1)), 1) << q;
  }
}

TEST(FiniteField, GaussSumExamples) {
  EXPECT_LE(std::abs(Field::create(5).gauss_sum() - Complex(std::sqrt(5.0), 0.0)), 1e-9);
  EXPECT_LE(std::abs(Field::create(3).gauss_sum() - Complex(0.0, std::sqrt(3.0))), 1e-9);
  EXPECT_LE(std::abs(Field::create(3, 2).gauss_sum() - Complex(3.0, 0.0)), 1e-9);
}

TEST(FiniteField, GaussSumMatchesNaiveSum) {
  for (auto [p, k] : kSmall) {
    const Field f = Field::create(p, k);
    const oracle::NaiveField n(f);
    Complex g{};
    for (std::uint32_t t = 1; t < f.q(); ++t) g += static_cast<double>(n.eta(t)) * n.chi(t);
    EXPECT_LE(std::abs(g - f.gauss_sum()), 1e-9);
    EXPECT_LE(std::abs(g - f.gauss_sum_closed_form()), 1e-9);
  }
}

TEST(FiniteField, GaussSumPowers) {
  for (std::uint32_t q = 3; q <= 121; ++q) {
    const auto [p, k] = prime_power_decompose(q);
    if (p < 3) continue;
    const Field f = Field::of_order(q);
    const Complex g = f.gauss_sum();
    const double qd = q;
    EXPECT_LE(std::abs(std::abs(g) - std::sqrt(qd)), 1e-9);
    EXPECT_LE(std::abs(g * g * g * g - qd * qd), 1e-8 * qd * qd);
    if (q % 4 == 1) EXPECT_LE(std::abs(g * g - qd), 1e-8) << q;
    if (q % 4 == 3) EXPECT_LE(std::abs(g * g + qd), 1e-8) << q;
  }
}

TEST(FiniteField, CoeffRoundTrip) {
  const Field f = Field::of_order(125);
  for (std::uint32_t a = 0; a < 125; ++a) {
    const auto c = f.coeffs(Elem{a});
    EXPECT_EQ(f.from_coeffs(c), Elem{a});
  }
  EXPECT_EQ(f.from_int(-3), f.neg(f.from_int(3)));
}

TEST(FiniteField, PrimePowerDecompose) {
  EXPECT_EQ(prime_power_decompose(121), std::make_pair(11u, 2u));
  EXPECT_EQ(prime_power_decompose(2), std::make_pair(2u, 1u));
  EXPECT_EQ(prime_power_decompose(12).first, 0u);
  EXPECT_EQ(prime_power_decompose(1).first, 0u);
  EXPECT_TRUE(is_prime(101));
  EXPECT_FALSE(is_prime(91));
}
