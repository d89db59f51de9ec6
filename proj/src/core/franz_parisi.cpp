#include "glasskit/franz_parisi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "glasskit/error.hpp"
#include "glasskit/parisi.hpp"
#include "glasskit/thresholds.hpp"
#include "numerics.hpp"

namespace glasskit {

namespace {

constexpr double kOverlapEdge = 1.0 - 1e-6;
constexpr double kMaxField = 1e8;

const detail::GaussHermite& rule() { return detail::gauss_hermite(kDefaultHermiteNodes); }

template <class F>
double gauss_expect(F&& f) {
  const auto& gh = rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) acc += gh.weights[i] * f(gh.nodes[i]);
  return acc;
}

// The spherical free energy with field is taken in the convention where the
// field does not pick up a factor beta; that is the one whose derivative in h
// is the overlap with the reference configuration.
MinimizeOptions duality_options(Geometry g) {
  MinimizeOptions o;
  if (g == Geometry::Sphere) o.convention = FieldConvention::Independent;
  return o;
}

ParisiSolution free_energy_with_field(const Mixture& m, double beta, double h, Geometry g, int k) {
  return minimize_parisi(m, beta, h, g, k, duality_options(g));
}

}  // namespace

const char* to_string(FPMethod m) noexcept {
  switch (m) {
    case FPMethod::Annealed: return "annealed";
    case FPMethod::RSAnsatz: return "rs";
    case FPMethod::Duality: return "duality";
  }
  return "unknown";
}

double fp_annealed_bound(const Mixture& m, double beta, double q, Geometry geometry) {
  const double b2 = beta * beta;
  return 0.5 * b2 * m.total() + b2 * m.xi(q) + entropy(geometry, q);
}

void require_below_beta_c(const Mixture& m, double beta, Geometry geometry, int k_levels) {
  const double bc = geometry == Geometry::Sphere ? beta_c_sphere(m)
                                                 : beta_c_ising_estimate(m, std::max(k_levels, 1));
  if (beta > bc) {
    std::ostringstream os;
    os << "beta = " << beta << " exceeds the static threshold beta_c ~ " << bc << " (" << to_string(geometry)
       << "); the Franz-Parisi formulas assume beta <= beta_c";
    throw Error(ErrorCode::BoundInvalid, os.str());
  }
}

double fp_rs_ising(const Mixture& m, double beta, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::Domain, "phi_RS: q must lie in [0, 1]");
  const double s2 = beta * beta * m.dxi(q);
  const double s = std::sqrt(s2);
  const double e = gauss_expect([&](double z) { return detail::log_cosh(s * z + s2); });
  return e + 0.5 * beta * beta * (m.total() + m.xi(q) - (1.0 + q) * m.dxi(q));
}

double fp_rs_ising_derivative(const Mixture& m, double beta, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::Domain, "phi_RS': q must lie in [0, 1]");
  const double s2 = beta * beta * m.dxi(q);
  const double s = std::sqrt(s2);
  const double t2 = gauss_expect([&](double z) {
    const double t = std::tanh(s * z + s2);
    return t * t;
  });
  return 0.5 * beta * beta * m.d2xi(q) * (t2 - q);
}

double fp_rs_bound(const Mixture& m, double beta, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorCode::Domain, "RS bound: q must lie in [0, 1)");
  const double b2 = beta * beta;
  const double s = std::sqrt(b2 * m.dxi(q));
  const double c = 0.5 * b2 * (m.total() - m.xi(q) - (1.0 - q) * m.dxi(q));
  // The objective is convex in h with derivative E tanh(s z + h) - q.
  auto slope = [&](double h) { return gauss_expect([&](double z) { return std::tanh(s * z + h); }) - q; };
  double hi = 1.0;
  while (slope(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e3) throw Error(ErrorCode::FieldRangeExceeded, "RS bound: no minimizing field below 1e3");
  }
  double lo = -hi;
  while (slope(lo) > 0.0) lo *= 2.0;
  const double h = detail::bisect(slope, lo, hi, 1e-13);
  const double e = gauss_expect([&](double z) { return detail::log_cosh(s * z + h); });
  return b2 * m.xi(q) + e + c - h * q;
}

SupResult fp_rs_sup(const Mixture& m, double beta) {
  const double at_zero = fp_rs_ising(m, beta, 0.0);
  constexpr int kGrid = 2001;
  std::vector<double> v(kGrid);
  detail::parallel_for(kGrid, [&](std::size_t i) { v[i] = fp_rs_ising(m, beta, static_cast<double>(i) / (kGrid - 1)); });
  const std::size_t b = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  double best = v[b];
  double arg = static_cast<double>(b) / (kGrid - 1);
  if (b > 0) {
    const double lo = static_cast<double>(b - 1) / (kGrid - 1);
    const double hi = std::min(1.0, static_cast<double>(b + 1) / (kGrid - 1));
    const detail::ScalarMin r = detail::golden_min([&](double q) { return -fp_rs_ising(m, beta, q); }, lo, hi, 1e-12);
    if (-r.fx > best) {
      best = -r.fx;
      arg = r.x;
    }
  }
  if (best <= at_zero + 1e-12) return {at_zero, 0.0};
  return {best, arg};
}

double field_for_overlap(const Mixture& m, double beta, double q, Geometry geometry, int k_levels) {
  if (!(std::abs(q) < kOverlapEdge)) throw Error(ErrorCode::Domain, "field_for_overlap: |q| must be < 1 - 1e-6");
  if (q == 0.0) return 0.0;
  // F(beta, h) is even in h, so its derivative is odd.
  if (q < 0.0) return -field_for_overlap(m, beta, -q, geometry, k_levels);

  auto overlap = [&](double h) { return free_energy_with_field(m, beta, h, geometry, k_levels).dphi0; };
  double lo = 0.0;
  double hi = 1.0;
  while (overlap(hi) <= q) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxField) {
      throw Error(ErrorCode::FieldRangeExceeded, "field_for_overlap: no bracketing field below 1e8");
    }
  }
  // Invariant: overlap(lo) <= q < overlap(hi); shrink toward the largest root.
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double o = overlap(mid);
    if (o <= q) {
      lo = mid;
      if (q - o < 1e-12) break;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double fp_duality(const Mixture& m, double beta, double q, Geometry geometry, int k_levels) {
  const double h = field_for_overlap(m, beta, q, geometry, k_levels);
  const double f = q == 0.0 ? free_energy_with_field(m, beta, 0.0, geometry, k_levels).value
                            : free_energy_with_field(m, beta, h, geometry, k_levels).value;
  return f - h * q + beta * beta * m.xi(q);
}

LegendreCheck legendre_check(const Mixture& m, double beta, double h, Geometry geometry, int k_levels) {
  LegendreCheck r{};
  r.lhs = free_energy_with_field(m, beta, h, geometry, k_levels).value;
  auto objective = [&](double q) { return fp_duality(m, beta, q, geometry, k_levels) - beta * beta * m.xi(q) + h * q; };

  constexpr int kGrid = 33;
  constexpr double kEdge = 0.99;
  std::vector<double> qs(kGrid), v(kGrid);
  for (int i = 0; i < kGrid; ++i) qs[i] = -kEdge + 2.0 * kEdge * i / (kGrid - 1);
  detail::parallel_for(kGrid, [&](std::size_t i) { v[i] = objective(qs[i]); });
  const std::size_t b = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  r.rhs = v[b];
  r.argmax_q = qs[b];
  const double lo = qs[b == 0 ? 0 : b - 1];
  const double hi = qs[b + 1 == qs.size() ? b : b + 1];
  const detail::ScalarMin s = detail::golden_min([&](double q) { return -objective(q); }, lo, hi, 1e-7);
  if (-s.fx > r.rhs) {
    r.rhs = -s.fx;
    r.argmax_q = s.x;
  }
  r.gap = r.lhs - r.rhs;
  return r;
}

std::vector<double> fp_grid(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "fp_grid: need at least 2 points");
  // u in [0, u_max] maps through (1 - cos(pi u)) / 2 onto [0, 1 - 2e-6], inside
  // the domain of the duality route.
  const double u_max = std::acos(-1.0 + 4e-6) / M_PI;
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = 0.5 * (1.0 - std::cos(M_PI * u_max * i / (n - 1)));
  return q;
}

FPCurve fp_curve(const Mixture& m, double beta, Geometry geometry, FPMethod method, int n_points, int k_levels) {
  if (method == FPMethod::RSAnsatz && geometry != Geometry::Ising) {
    throw Error(ErrorCode::InvalidArgument, "the RS-ansatz bound is defined for the Ising geometry only");
  }
  FPCurve c;
  c.geometry = geometry;
  c.beta = beta;
  c.free_energy = 0.5 * beta * beta * m.total();
  const std::vector<double> qs = fp_grid(n_points);
  c.grid.resize(qs.size());
  detail::parallel_for(qs.size(), [&](std::size_t i) {
    const double q = qs[i];
    double v = 0.0;
    switch (method) {
      case FPMethod::Annealed: v = fp_annealed_bound(m, beta, q, geometry); break;
      case FPMethod::RSAnsatz: v = fp_rs_bound(m, beta, q); break;
      case FPMethod::Duality: v = fp_duality(m, beta, q, geometry, k_levels); break;
    }
    c.grid[i] = {q, v, method};
  });
  return c;
}

ShatteringReport classify_shattering(const FPCurve& curve, const ShatteringOptions& o) {
  const auto& g = curve.grid;
  const std::size_t n = g.size();
  if (n < 2 || g.front().q != 0.0) {
    throw Error(ErrorCode::Resolution, "shattering: the curve must start at q = 0");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(g[i].q > g[i - 1].q)) throw Error(ErrorCode::Resolution, "shattering: grid must be strictly increasing");
    if (g[i].q - g[i - 1].q > o.max_spacing + 1e-12) {
      throw Error(ErrorCode::Resolution, "shattering: grid spacing exceeds the required resolution");
    }
  }
  if (!(g.back().q < 1.0) || 1.0 - g.back().q > o.max_spacing) {
    throw Error(ErrorCode::Resolution, "shattering: grid must reach within the resolution of q = 1");
  }

  const double F = curve.free_energy;
  ShatteringReport r;
  r.matches_free_energy_at_zero = std::abs(g[0].value - F) <= o.tol;

  // Near q = 0 the curve is within tol of F by continuity; that initial
  // non-increasing stretch is exempt from the strict-domination check.
  std::size_t j = 1;
  while (j < n && g[j].value >= F - o.tol && g[j].value <= g[j - 1].value) ++j;
  r.below_free_energy = true;
  for (std::size_t i = j; i < n; ++i) {
    if (!(g[i].value < F - o.tol)) {
      r.below_free_energy = false;
      break;
    }
  }

  // Longest run of strict increase, measured in q.
  std::size_t best_a = 0, best_b = 0;
  for (std::size_t i = 0; i + 1 < n;) {
    auto rising = [&](std::size_t k) { return g[k + 1].value - g[k].value > o.tol_slope * (g[k + 1].q - g[k].q); };
    if (!rising(i)) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k + 1 < n && rising(k)) ++k;
    if (k - i + 1 >= static_cast<std::size_t>(o.min_run) && g[k].q - g[i].q > g[best_b].q - g[best_a].q) {
      best_a = i;
      best_b = k;
    }
    i = k;
  }
  if (best_b > best_a) {
    r.has_increasing_window = true;
    const double q1 = g[best_a].q, q2 = g[best_b].q;
    r.q1 = q1;
    r.q2 = q2;
    r.q_lo_bar = q1 + (q2 - q1) / 3.0;
    r.q_hi_bar = q1 + 2.0 * (q2 - q1) / 3.0;
    // linear interpolation of the curve at q_hi_bar
    std::size_t k = best_a;
    while (k + 1 < best_b && g[k + 1].q < *r.q_hi_bar) ++k;
    const double t = (*r.q_hi_bar - g[k].q) / (g[k + 1].q - g[k].q);
    const double v_bar = g[k].value + t * (g[k + 1].value - g[k].value);
    r.certificate_gap = g[best_b].value - v_bar;
  }
  r.shattered = r.matches_free_energy_at_zero && r.below_free_energy && r.has_increasing_window;
  return r;
}

}  // namespace glasskit
