#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "glasskit/parisi.hpp"
#include "test_util.hpp"

using namespace glasskit;
using testutil::error_code_of;
using boost::math::quadrature::gauss_kronrod;

namespace {

using Fn = std::function<double(double)>;

double integrate(const Fn& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-14);
}

// E f(Z), Z standard normal, by adaptive Kronrod quadrature on [-12, 12].
double gauss_expect(const Fn& f) {
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return gauss_kronrod<double, 31>::integrate([&](double z) { return c * std::exp(-0.5 * z * z) * f(z); },
                                              -12.0, 12.0, 6, 1e-13);
}

double log_cosh(double x) { return std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::log(2.0); }

// Step cdf of a finite measure, evaluated independently of RSBMeasure.
struct Steps {
  std::vector<double> q, w;
  double cdf(double t) const {
    double c = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] <= t) c += w[i];
    return c;
  }
  // Breakpoints 0, atoms..., 1.
  std::vector<double> cuts() const {
    std::vector<double> c{0.0};
    c.insert(c.end(), q.begin(), q.end());
    c.push_back(1.0);
    return c;
  }
};

// Crisanti-Sommers functional by direct quadrature.
double cs_oracle(const Fn& dxi, double beta, const Steps& z, double field_term) {
  const auto cuts = z.cuts();
  double drift = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double m = z.cdf(cuts[i]);
    drift += integrate([&](double t) { return m * (beta * beta * dxi(t) + field_term); }, cuts[i], cuts[i + 1]);
  }
  auto phi = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = std::max(cuts[i], t), b = cuts[i + 1];
      if (b > a) s += z.cdf(cuts[i]) * (b - a);
    }
    return s;
  };
  double inv = 0.0;
  for (std::size_t i = 0; i + 2 < cuts.size(); ++i)
    inv += integrate([&](double t) { return 1.0 / phi(t); }, cuts[i], cuts[i + 1]);
  return 0.5 * (drift + inv + std::log1p(-z.q.back()));
}

// Ising Parisi functional for a two-atom measure by nested Gaussian quadrature.
double ising_two_atom_oracle(const Fn& xi, const Fn& dxi, double beta, double q1, double q2, double w1,
                             double h) {
  const double b2 = beta * beta;
  const double s0 = std::sqrt(b2 * dxi(q1)), s1 = std::sqrt(b2 * (dxi(q2) - dxi(q1)));
  const double shift = 0.5 * b2 * (dxi(1.0) - dxi(q2));
  auto level1 = [&](double y) {
    return std::log(gauss_expect([&](double z) { return std::exp(w1 * (log_cosh(y + s1 * z) + shift)); })) / w1;
  };
  const double phi = gauss_expect([&](double z) { return level1(h + s0 * z); });
  auto tx = [&](double a, double b) { return (b * dxi(b) - xi(b)) - (a * dxi(a) - xi(a)); };
  return phi - 0.5 * b2 * (w1 * tx(q1, q2) + tx(q2, 1.0));
}

// Replica-symmetric value at overlap q: E log cosh(s z + h) + beta^2/2 (xi(1) - xi(q) - (1-q) xi'(q)).
double rs_oracle(const Fn& xi, const Fn& dxi, double beta, double q, double h) {
  const double s = beta * std::sqrt(dxi(q));
  return gauss_expect([&](double z) { return log_cosh(s * z + h); }) +
         0.5 * beta * beta * (xi(1.0) - xi(q) - (1.0 - q) * dxi(q));
}

const Fn xi2 = [](double q) { return q * q; };
const Fn dxi2 = [](double q) { return 2.0 * q; };
const Fn xih = [](double q) { return 0.5 * q * q + 0.5 * q * q * q; };
const Fn dxih = [](double q) { return q + 1.5 * q * q; };

RSBMeasure mix(const RSBMeasure& a, const RSBMeasure& b) {
  std::map<double, double> atoms;
  for (std::size_t i = 0; i < a.size(); ++i) atoms[a.locations()[i]] += 0.5 * a.weights()[i];
  for (std::size_t i = 0; i < b.size(); ++i) atoms[b.locations()[i]] += 0.5 * b.weights()[i];
  std::vector<double> q, w;
  for (auto& kv : atoms) {
    q.push_back(kv.first);
    w.push_back(kv.second);
  }
  return RSBMeasure(q, w);
}

RSBMeasure random_measure(std::mt19937_64& rng, int atoms) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> q(atoms), w(atoms);
  double s = 0.0;
  for (int i = 0; i < atoms; ++i) {
    q[i] = 0.9 * u(rng);
    s += (w[i] = 0.05 + u(rng));
  }
  std::sort(q.begin(), q.end());
  for (double& x : w) x /= s;
  return RSBMeasure(q, w);
}

}  // namespace

TEST_CASE("measures validate their atoms") {
  CHECK(error_code_of([] { RSBMeasure({0.2, 0.1}, {0.5, 0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { RSBMeasure({0.1, 0.2}, {0.5, 0.4}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { RSBMeasure({0.1, 1.0}, {0.5, 0.5}); }) == ErrorCode::InvalidArgument);
  const RSBMeasure z({0.2, 0.6}, {0.25, 0.75});
  CHECK(q_max(z) == 0.6);
  CHECK(overlap_moment(z, 2) == doctest::Approx(0.25 * 0.04 + 0.75 * 0.36).epsilon(1e-15));
  CHECK(z.cdf(0.1) == 0.0);
  CHECK(z.cdf(0.3) == 0.25);
  CHECK(z.cdf(0.6) == 1.0);
  CHECK(z.phi(0.0) == doctest::Approx(0.25 * 0.4 + 0.4).epsilon(1e-15));
}

TEST_CASE("Crisanti-Sommers closed forms") {
  const Mixture p2 = testutil::pure(2);
  for (double beta : {0.0, 0.3, 0.9, 1.7})
    CHECK(crisanti_sommers(p2, beta, RSBMeasure::delta(0.0), 0.0) ==
          doctest::Approx(0.5 * beta * beta).epsilon(1e-14));
  for (double q : {0.1, 0.5, 0.9}) {
    CHECK(crisanti_sommers(p2, 0.0, RSBMeasure::delta(q), 0.0) ==
          doctest::Approx(0.5 * (q / (1 - q) + std::log1p(-q))).epsilon(1e-13));
  }
  // The field convention only rescales the h^2 term.
  const RSBMeasure z({0.3}, {1.0});
  const double a = crisanti_sommers(p2, 0.8, z, 0.5, FieldConvention::Paper);
  const double b = crisanti_sommers(p2, 0.8, z, 0.5, FieldConvention::Independent);
  CHECK(a - b == doctest::Approx(0.5 * 0.7 * 0.25 * (0.64 - 1.0)).epsilon(1e-13));
}

TEST_CASE("Crisanti-Sommers agrees with direct quadrature") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RSBMeasure z = random_measure(rng, 1 + trial % 4);
    const Steps s{z.locations(), z.weights()};
    for (double beta : {0.4, 1.1}) {
      const double h = 0.1 * (trial % 5);
      CHECK(crisanti_sommers(testutil::half_half(), beta, z, h, FieldConvention::Independent) ==
            doctest::Approx(cs_oracle(dxih, beta, s, h * h)).epsilon(1e-10));
      CHECK(crisanti_sommers(testutil::pure(2), beta, z, h, FieldConvention::Paper) ==
            doctest::Approx(cs_oracle(dxi2, beta, s, beta * beta * h * h)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Ising functional closed forms") {
  const Mixture p2 = testutil::pure(2);
  for (double beta : {0.2, 0.6, 1.0})
    CHECK(parisi_pde_solve(p2, beta, RSBMeasure::delta(0.0), 0.0).value ==
          doctest::Approx(0.5 * beta * beta).epsilon(1e-13));
  for (double h : {0.0, 0.4, 2.0})
    CHECK(parisi_pde_solve(p2, 0.0, RSBMeasure::delta(0.5), h).value ==
          doctest::Approx(std::log(std::cosh(h))).epsilon(1e-13));
  for (double q : {0.1, 0.4, 0.8}) {
    for (double h : {0.0, 0.3}) {
      const ParisiSolution s = parisi_pde_solve(p2, 0.5, RSBMeasure::delta(q), h, 121);
      CHECK(s.value == doctest::Approx(rs_oracle(xi2, dxi2, 0.5, q, h)).epsilon(1e-11));
      const double mag = gauss_expect([&](double z) { return std::tanh(0.5 * std::sqrt(2 * q) * z + h); });
      CHECK(s.dphi0 == doctest::Approx(mag).epsilon(1e-7));
    }
  }
}

TEST_CASE("Ising two-atom functional agrees with nested quadrature") {
  struct Case {
    double beta, q1, q2, w1, h;
  };
  for (const Case c : {Case{0.8, 0.2, 0.6, 0.3, 0.0}, Case{1.2, 0.1, 0.7, 0.5, 0.2}, Case{0.5, 0.4, 0.5, 0.9, 0.5}}) {
    const RSBMeasure z({c.q1, c.q2}, {c.w1, 1 - c.w1});
    CHECK(parisi_pde_solve(testutil::half_half(), c.beta, z, c.h, 121).value ==
          doctest::Approx(ising_two_atom_oracle(xih, dxih, c.beta, c.q1, c.q2, c.w1, c.h)).epsilon(1e-10));
  }
}

TEST_CASE("Gauss-Hermite resolution: 61 and 121 nodes agree") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const RSBMeasure z = random_measure(rng, 1 + trial % 3);
    const double a = parisi_pde_solve(testutil::pure(2), 0.6, z, 0.3, 61).value;
    const double b = parisi_pde_solve(testutil::pure(2), 0.6, z, 0.3, 121).value;
    CHECK(std::abs(a - b) < 1e-10);
  }
  CHECK(error_code_of([] { parisi_pde_solve(testutil::pure(2), 0.5, RSBMeasure::delta(0), 0, 1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("property: dphi0 is odd in the field and bounded by 1") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const RSBMeasure z = random_measure(rng, 1 + trial % 3);
    const double h = 0.1 + 0.1 * (trial % 7);
    const ParisiSolution a = parisi_pde_solve(testutil::half_half(), 0.9, z, h);
    const ParisiSolution b = parisi_pde_solve(testutil::half_half(), 0.9, z, -h);
    CHECK(a.dphi0 == doctest::Approx(-b.dphi0).epsilon(1e-8));
    CHECK(a.dphi0 > 0.0);
    CHECK(a.dphi0 < 1.0);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  }
}

TEST_CASE("property: both functionals are convex in the measure") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    // At most four atoms after mixing: the Ising recursion costs nodes^levels.
    const RSBMeasure a = random_measure(rng, 1 + trial % 2);
    const RSBMeasure b = random_measure(rng, 1 + (trial / 2) % 2);
    const RSBMeasure c = mix(a, b);
    auto sphere = [&](const RSBMeasure& z) { return crisanti_sommers(testutil::half_half(), 1.1, z, 0.2); };
    CHECK(sphere(c) <= 0.5 * (sphere(a) + sphere(b)) + 1e-12);
    auto ising = [&](const RSBMeasure& z) { return parisi_pde_solve(testutil::half_half(), 1.1, z, 0.2, 21).value; };
    CHECK(ising(c) <= 0.5 * (ising(a) + ising(b)) + 1e-10);
  }
}

TEST_CASE("minimization at high temperature returns the annealed value") {
  const Mixture p2 = testutil::pure(2);
  const ParisiSolution s = minimize_parisi(p2, 0.5, 0.0, Geometry::Sphere, 2);
  CHECK(s.value == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(q_max(s.measure) <= 1e-3);
  CHECK(s.converged);

  const ParisiSolution i = minimize_parisi(p2, 0.5, 0.0, Geometry::Ising, 1);
  CHECK(i.value == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(q_max(i.measure) <= 1e-3);
}

TEST_CASE("minimization in a field matches the replica-symmetric fixed point") {
  // High temperature, positive field: the minimizer is RS at q = E tanh^2(beta sqrt(xi'(q)) z + h).
  const double beta = 0.4, h = 0.3;
  double q = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double s = beta * std::sqrt(dxi2(q));
    q = gauss_expect([&](double z) { return std::pow(std::tanh(s * z + h), 2); });
  }
  const ParisiSolution s = minimize_parisi(testutil::pure(2), beta, h, Geometry::Ising, 0);
  CHECK(s.value == doctest::Approx(rs_oracle(xi2, dxi2, beta, q, h)).epsilon(1e-9));
  CHECK(q_max(s.measure) == doctest::Approx(q).epsilon(1e-4));
}

TEST_CASE("low temperature: replica symmetry breaks and levels help monotonically") {
  const Mixture p2 = testutil::pure(2);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 2; ++k) {
    const ParisiSolution s = minimize_parisi(p2, 1.0, 0.0, Geometry::Ising, k);
    CHECK(s.value <= prev + 1e-12);
    prev = s.value;
  }
  CHECK(prev < 0.5 - 1e-3);
  const ParisiSolution sp = minimize_parisi(p2, 1.0, 0.0, Geometry::Sphere, 1);
  CHECK(sp.value < 0.5 - 1e-3);
  CHECK(q_max(sp.measure) > 0.1);
}

TEST_CASE("beta_c estimate on the sphere reproduces the spherical threshold") {
  CHECK(beta_c_ising_estimate(testutil::pure(2), 1, 1e-9, Geometry::Sphere) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(5e-3));
  CHECK(std::abs(beta_c_ising_estimate(testutil::pure(3), 1, 1e-9, Geometry::Sphere) - 1.20656) < 5e-3);
  CHECK(error_code_of([] { beta_c_ising_estimate(testutil::pure(2), 1, 1e-12); }) == ErrorCode::InvalidArgument);
}
