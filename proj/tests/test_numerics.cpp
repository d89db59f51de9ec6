#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "doctest.h"
#include "glasskit/rng.hpp"
#include "numerics.hpp"

using namespace glasskit;
using namespace glasskit::detail;

TEST_CASE("Philox4x32-10 known answers") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter streams are pure functions of (seed, stream, counter)") {
  const CounterRng a(7, 2), b(7, 2), c(7, 3), d(8, 2);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.normal(i) == b.normal(i));
    CHECK(a.uniform(i) != c.uniform(i));
    CHECK(a.uniform(i) != d.uniform(i));
    CHECK(a.uniform(i) > 0.0);
    CHECK(a.uniform(i) < 1.0);
  }
  RngCursor cur(7, 2);
  CHECK(cur.normal() == a.normal(0));
  CHECK(cur.normal() == a.normal(1));
  CHECK(cur.position() == 2);
}

TEST_CASE("normal draws have unit variance") {
  const CounterRng r(123, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(i);
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("Gauss-Hermite rule integrates Gaussian moments") {
  for (int n : {21, 61, 121}) {
    const GaussHermite& gh = gauss_hermite(n);
    REQUIRE(gh.nodes.size() == static_cast<std::size_t>(n));
    double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = gh.nodes[i], w = gh.weights[i];
      m0 += w;
      m1 += w * x;
      m2 += w * x * x;
      m4 += w * x * x * x * x;
      CHECK(std::abs(std::log(w) - gh.log_weights[i]) < 1e-12);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(m1) < 1e-13);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    // E cosh(a Z) = exp(a^2 / 2)
    double c = 0;
    for (int i = 0; i < n; ++i) c += gh.weights[i] * std::cosh(1.3 * gh.nodes[i]);
    CHECK(c == doctest::Approx(std::exp(0.5 * 1.69)).epsilon(1e-12));
  }
  CHECK(&gauss_hermite(61) == &gauss_hermite(61));
}

TEST_CASE("log_cosh is stable") {
  CHECK(log_cosh(0.0) == 0.0);
  CHECK(log_cosh(1.0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-15));
  CHECK(log_cosh(-2.5) == doctest::Approx(std::log(std::cosh(2.5))).epsilon(1e-15));
  CHECK(log_cosh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("scalar minimizers and root finding") {
  const ScalarMin g = golden_min([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, 0.0, 1.0, 1e-12);
  CHECK(g.x == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(g.fx == doctest::Approx(1.0).epsilon(1e-14));

  // Two wells; the deeper one is at 0.8.
  auto f = [](double x) { return std::cos(4 * M_PI * x) - 0.1 * x; };
  const ScalarMin gm = grid_min(f, boundary_grid(2000));
  CHECK(gm.x == doctest::Approx(0.75 + 0.1 / (16 * M_PI * M_PI)).epsilon(1e-5));

  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("Nelder-Mead finds the Rosenbrock minimum") {
  auto rosen = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  const SimplexResult r = nelder_mead(rosen, {-1.2, 1.0}, 0.5, 5000, 1e-15, 1e-10);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("boundary grid clusters at both ends") {
  const auto g = boundary_grid(100000);
  CHECK(g.front() == doctest::Approx(1e-9));
  CHECK(1.0 - g.back() == doctest::Approx(1e-9).epsilon(1e-3));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK_MESSAGE(g[i] > g[i - 1], i);
}

TEST_CASE("parallel_for visits each index once and propagates errors") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) CHECK(h.load() == 1);

  // Nested use runs serially inside a worker and still covers everything.
  std::atomic<int> total{0};
  parallel_for(8, [&](std::size_t) { parallel_for(8, [&](std::size_t) { total.fetch_add(1); }); });
  CHECK(total.load() == 64);

  CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
