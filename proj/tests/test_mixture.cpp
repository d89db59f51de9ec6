#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "glasskit/mixture.hpp"
#include "glasskit/mixture_io.hpp"
#include "test_util.hpp"

using namespace glasskit;
using testutil::error_code_of;

TEST_CASE("normalize rescales to xi(1) = 1") {
  const NormalizedMixture a = normalize({{2, 1.0}});
  CHECK(a.mixture.gamma(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.mixture.xi(0.3) == doctest::Approx(0.09).epsilon(1e-15));

  const NormalizedMixture b = normalize({{2, 1.0}, {3, 1.0}});
  CHECK(b.mixture.gamma_sq(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.mixture.gamma_sq(3) == doctest::Approx(0.5).epsilon(1e-15));

  const NormalizedMixture c = normalize({{3, 2.0}});
  CHECK(c.mixture.gamma(3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.scale == doctest::Approx(0.5));
  CHECK(c.mixture.normalized());
}

TEST_CASE("invalid mixtures are rejected") {
  CHECK(error_code_of([] { normalize({}); }) == ErrorCode::InvalidMixture);
  CHECK(error_code_of([] { normalize({{2, 0.0}, {3, 0.0}}); }) == ErrorCode::InvalidMixture);
  CHECK(error_code_of([] { normalize({{2, -0.1}}); }) == ErrorCode::InvalidMixture);
  CHECK(error_code_of([] { normalize({{1, 1.0}}); }) == ErrorCode::InvalidMixture);
  CHECK(error_code_of([] { normalize({{40, 1.0}}); }) == ErrorCode::InvalidMixture);
  CHECK(error_code_of([] { normalize({{2, NAN}}); }) == ErrorCode::InvalidMixture);
}

TEST_CASE("xi and its derivatives") {
  const Mixture p2 = testutil::pure(2);
  const Mixture p3 = testutil::pure(3);
  CHECK(xi_eval(p2, 1.0, 0) == 1.0);
  CHECK(xi_eval(p2, 0.0, 2) == 2.0);
  CHECK(xi_eval(p3, 0.5, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(error_code_of([&] { xi_eval(p2, 1.5, 0); }) == ErrorCode::Domain);
  CHECK(error_code_of([&] { xi_eval(p2, -0.1, 0); }) == ErrorCode::Domain);
  CHECK(error_code_of([&] { xi_eval(p2, 0.5, 3); }) == ErrorCode::InvalidArgument);
  CHECK(testutil::half_half().dxi_over_q(0.0) == doctest::Approx(1.0));
}

TEST_CASE("entropy values and symmetry") {
  CHECK(entropy(Geometry::Sphere, 0.0) == 0.0);
  CHECK(entropy(Geometry::Ising, 0.0) == 0.0);
  const double expect = -0.75 * std::log(1.5) - 0.25 * std::log(0.5);
  CHECK(entropy(Geometry::Ising, 0.5) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(entropy(Geometry::Ising, 0.5) == doctest::Approx(-0.13081).epsilon(1e-4));
  CHECK(entropy(Geometry::Sphere, 0.6) == doctest::Approx(0.5 * std::log(0.64)).epsilon(1e-14));
  for (double q = -0.95; q < 0.96; q += 0.05) {
    for (Geometry g : {Geometry::Sphere, Geometry::Ising}) {
      CHECK(entropy(g, q) == doctest::Approx(entropy(g, -q)).epsilon(1e-14));
      CHECK(entropy(g, q) <= 0.0);
    }
  }
}

TEST_CASE("entropy clamps near the edge and rejects |q| >= 1") {
  const EntropyValue v = entropy_checked(Geometry::Sphere, 1.0 - 1e-14);
  CHECK(v.clamped);
  CHECK(std::isfinite(v.value));
  CHECK(v.value == entropy(Geometry::Sphere, 1.0 - 1e-12));
  CHECK_FALSE(entropy_checked(Geometry::Ising, 0.9).clamped);
  CHECK(error_code_of([] { entropy(Geometry::Ising, 1.0); }) == ErrorCode::Domain);
  CHECK(error_code_of([] { entropy(Geometry::Sphere, -1.2); }) == ErrorCode::Domain);
}

TEST_CASE("perturb keeps xi(1) and lowers xi''(0) by 2 eps") {
  const Mixture p2 = testutil::pure(2);
  const Mixture same = perturb(p2, 3, 0.0);
  CHECK(same.xi(0.4) == p2.xi(0.4));

  const Mixture t = perturb(p2, 3, 0.1);
  CHECK(xi_eval(t, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(xi_eval(t, 0.0, 2) == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(t.gamma_sq(3) == doctest::Approx(0.1));

  CHECK(error_code_of([&] { perturb(p2, 3, 1.5); }) == ErrorCode::InvalidPerturbation);
  CHECK(error_code_of([&] { perturb(testutil::pure(3), 4, 0.01); }) == ErrorCode::InvalidPerturbation);
  CHECK(error_code_of([&] { perturb(p2, 2, 0.1); }) == ErrorCode::InvalidPerturbation);
}

TEST_CASE("property: random mixtures") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Mixture m = testutil::random_mixture(rng);
    CHECK(m.total() == doctest::Approx(1.0).epsilon(1e-12));
    const double c2 = m.d2xi(0.0);
    for (int i = 0; i <= 100; ++i) {
      const double q = i / 100.0;
      CHECK(m.xi(q) >= 0.0);
      CHECK(m.dxi(q) >= 0.0);
      CHECK(m.d2xi(q) >= 0.0);
      CHECK(m.xi(q) - 0.5 * q * q * c2 >= -1e-15);
    }
    // Centered differences: error O(delta^2) with a polynomial constant.
    const double d = 1e-4;
    for (double q = 0.05; q < 0.951; q += 0.05) {
      const double fd = (m.xi(q + d) - m.xi(q - d)) / (2 * d);
      CHECK(std::abs(fd - m.dxi(q)) <= 100.0 * d * d + 1e-10);
      const double fd2 = (m.dxi(q + d) - m.dxi(q - d)) / (2 * d);
      CHECK(std::abs(fd2 - m.d2xi(q)) <= 1000.0 * d * d + 1e-9);
    }
    if (m.gamma_sq(2) > 0.0) {
      const Mixture t = perturb(m, 5, 0.5 * m.gamma_sq(2));
      CHECK(xi_eval(t, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("mixture file parsing") {
  const MixtureFile f = parse_mixture(
      "# comment\n[mixture]\nnormalized = false  # trailing\n\"2\" = 1.0\n3 = 1.0\n", "demo");
  CHECK(f.id == "demo");
  CHECK(f.mixture.gamma_sq(2) == doctest::Approx(0.5));
  CHECK(f.mixture.gamma_sq(3) == doctest::Approx(0.5));

  const MixtureFile g = parse_mixture("id = \"sk\"\n[mixture]\nnormalized = true\n2 = 1.0\n", "x");
  CHECK(g.id == "sk");
  CHECK(g.mixture.normalized());

  // 0.7071^2 * 2 = 0.99998: within the asserted-normalization tolerance, renormalized exactly.
  const MixtureFile h = parse_mixture("[mixture]\nnormalized = true\n2 = 0.7071\n3 = 0.7071\n", "x");
  CHECK(h.mixture.total() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mixture file errors name the key") {
  auto message = [](const char* text) {
    try {
      parse_mixture(text, "x");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidMixture);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[mixture]\nabc = 1\n").find("'abc'") != std::string::npos);
  CHECK(message("[mixture]\n2 = zero\n").find("'2'") != std::string::npos);
  CHECK(message("[mixture]\n1 = 1.0\n").find("'1'") != std::string::npos);
  CHECK(message("[mixture]\n2 = -1.0\n").find("'2'") != std::string::npos);
  CHECK(message("[mixture]\nnormalized = true\n2 = 0.5\n").find("'normalized'") != std::string::npos);
  CHECK(message("[mixture]\nnormalized = maybe\n2 = 1\n").find("'normalized'") != std::string::npos);
  CHECK(message("2 = 1.0\n").find("[mixture]") != std::string::npos);
  CHECK(message("[mixture]\n2 = 1\n2 = 1\n").find("duplicate") != std::string::npos);
}

TEST_CASE("mixture files on disk") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "glasskit_test_pure3.toml";
  {
    std::ofstream out(p);
    out << "[mixture]\n3 = 2.0\n";
  }
  const MixtureFile f = load_mixture_file(p.string());
  CHECK(f.id == "glasskit_test_pure3");
  CHECK(f.mixture.gamma(3) == doctest::Approx(1.0));
  fs::remove(p);
  CHECK(error_code_of([] { load_mixture_file("/nonexistent/dir/none.toml"); }) == ErrorCode::Io);
}
