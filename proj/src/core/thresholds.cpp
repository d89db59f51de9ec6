#include "glasskit/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glasskit/error.hpp"
#include "numerics.hpp"

namespace glasskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeriesCutoff = 0.05;
constexpr double kKappaLimitBelow = 1e-8;
constexpr double kCriticalSearchFrom = 1e-6;
constexpr double kRootWidth = 1e-13;
constexpr double kWindowTol = 1e-10;
constexpr double kTangencyTol = 1e-12;

const std::vector<double>& grid() {
  static const std::vector<double> g = detail::boundary_grid(kThresholdGridPoints);
  return g;
}

// sum_{n >= from} q^n / n, for small q where the closed forms cancel.
double log_tail_series(double q, int from) {
  double term = std::pow(q, from);
  double sum = 0.0;
  for (int n = from; n < 400; ++n) {
    const double t = term / n;
    sum += t;
    if (t <= 1e-18 * sum) break;
    term *= q;
  }
  return sum;
}

// -log(1-q) - q
double g_excess(double q) {
  return q < kSeriesCutoff ? log_tail_series(q, 2) : -std::log1p(-q) - q;
}

// -log(1-q) - q - q^2/2
double g_excess3(double q) {
  return q < kSeriesCutoff ? log_tail_series(q, 3) : -std::log1p(-q) - q - 0.5 * q * q;
}

// Numerator of kappa': g'(q) xi(q) - g(q) xi'(q), with g' = q/(1-q). Small q
// uses the exact expansion sum_k gamma_k^2 sum_{n>=1} (1 - k/(n+1)) q^{n+k}.
double kappa_slope_numerator(const Mixture& m, double q) {
  if (q < kSeriesCutoff) {
    const auto& sq = m.squared();
    double total = 0.0;
    for (std::size_t k = 2; k < sq.size(); ++k) {
      if (sq[k] == 0.0) continue;
      double s = 0.0;
      double qn = q;
      for (int n = 1; n < 400; ++n) {
        const double t = (1.0 - static_cast<double>(k) / (n + 1)) * qn;
        s += t;
        if (std::abs(t) <= 1e-18 * std::abs(s) && n > static_cast<int>(k)) break;
        qn *= q;
      }
      total += sq[k] * std::pow(q, static_cast<double>(k)) * s;
    }
    return total;
  }
  return q / (1.0 - q) * m.xi(q) - g_excess(q) * m.dxi(q);
}

Infimum boundary_infimum(const std::function<double(double)>& f, double boundary_limit) {
  const detail::ScalarMin r = detail::grid_min(f, grid());
  if (boundary_limit <= r.fx) return {boundary_limit, 0.0, true};
  return {r.fx, r.x, false};
}

}  // namespace

const char* to_string(Transition t) noexcept {
  switch (t) {
    case Transition::Continuous: return "Continuous";
    case Transition::Discontinuous: return "Discontinuous";
    case Transition::Marginal: return "Marginal";
  }
  return "Unknown";
}

double beta_cont(const Mixture& m) {
  const double d2 = m.d2xi(0.0);
  return d2 > 0.0 ? 1.0 / std::sqrt(d2) : kInf;
}

double kappa(const Mixture& m, double q) {
  const double d2 = m.d2xi(0.0);
  if (!(q > 0.0)) {
    if (d2 > 0.0 && q == 0.0) return 1.0 / d2;
    throw Error(ErrorCode::Domain, "kappa: q must lie in (0, 1)");
  }
  if (q >= 1.0) throw Error(ErrorCode::Domain, "kappa: q must lie in (0, 1)");
  if (q < kKappaLimitBelow && d2 > 0.0) return 1.0 / d2;
  return g_excess(q) / m.xi(q);
}

Infimum kappa_infimum(const Mixture& m) {
  const double d2 = m.d2xi(0.0);
  return boundary_infimum([&](double q) { return kappa(m, q); }, d2 > 0.0 ? 1.0 / d2 : kInf);
}

double beta_c_sphere(const Mixture& m) { return std::sqrt(kappa_infimum(m).value); }

std::vector<double> kappa_critical_points(const Mixture& m) {
  const auto& g = grid();
  const auto first = std::lower_bound(g.begin(), g.end(), kCriticalSearchFrom);
  const std::vector<double> qs(first, g.end());
  std::vector<double> sign(qs.size());
  detail::parallel_for(qs.size(), [&](std::size_t i) {
    const double v = kappa_slope_numerator(m, qs[i]);
    sign[i] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  });
  std::vector<double> roots;
  auto f = [&](double q) { return kappa_slope_numerator(m, q); };
  for (std::size_t i = 0; i + 1 < qs.size(); ++i) {
    if (sign[i] == 0.0) {
      roots.push_back(qs[i]);
    } else if (sign[i] * sign[i + 1] < 0.0) {
      roots.push_back(detail::bisect(f, qs[i], qs[i + 1], kRootWidth));
    }
  }
  return roots;
}

double beta_dis(const Mixture& m) {
  double best = kInf;
  for (double q : kappa_critical_points(m)) best = std::min(best, kappa(m, q));
  return std::sqrt(best);
}

ThresholdReport classify_transition(const Mixture& m) {
  ThresholdReport r{};
  r.beta_cont = beta_cont(m);
  const Infimum inf = kappa_infimum(m);
  r.beta_c = std::sqrt(inf.value);
  r.beta_c_at_boundary = inf.at_boundary;

  double best = kInf;
  double q_best = 0.0;
  for (double q : kappa_critical_points(m)) {
    const double k = kappa(m, q);
    if (k < best) {
      best = k;
      q_best = q;
    }
  }
  r.beta_dis = std::sqrt(best);

  if (r.beta_dis < r.beta_cont - kMarginalBand) {
    r.transition = Transition::Discontinuous;
    r.q_c = q_best;
  } else if (r.beta_dis > r.beta_cont + kMarginalBand) {
    r.transition = Transition::Continuous;
  } else {
    r.transition = Transition::Marginal;
  }

  const DynamicThresholds d = beta_dynamic(m);
  r.beta_bar_d = d.beta_bar_d;
  r.beta_d = std::min(d.beta_bar_d, r.beta_c);
  r.beta_bar_d_at_boundary = d.at_boundary;
  return r;
}

double f_talagrand(const Mixture& m, double beta, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorCode::Domain, "f: q must lie in [0, 1)");
  return beta * beta * m.xi(q) - g_excess(q);
}

DynamicThresholds beta_dynamic(const Mixture& m) {
  const double d2 = m.d2xi(0.0);
  const Infimum inf = boundary_infimum(
      [&](double q) { return 1.0 / ((1.0 - q) * m.dxi_over_q(q)); }, d2 > 0.0 ? 1.0 / d2 : kInf);
  DynamicThresholds d{};
  d.beta_bar_d = std::sqrt(inf.value);
  d.beta_d = std::min(d.beta_bar_d, beta_c_sphere(m));
  d.q_star = inf.argmin;
  d.at_boundary = inf.at_boundary;
  return d;
}

std::vector<Window> shattering_windows(const Mixture& m, double beta) {
  std::vector<Window> out;
  if (!(beta > 0.0)) return out;
  const double b2 = beta * beta;
  auto B = [&](double q) { return b2 * m.dxi_over_q(q) * (1.0 - q) - 1.0; };

  const auto& g = grid();
  const std::size_t n = g.size();
  std::vector<double> v(n);
  detail::parallel_for(n, [&](std::size_t i) { v[i] = B(g[i]); });

  auto left_edge = [&](std::size_t i) {
    if (i == 0) return B(0.0) > 0.0 ? 0.0 : detail::bisect(B, 0.0, g[0], kWindowTol);
    return detail::bisect(B, g[i - 1], g[i], kWindowTol);
  };
  auto right_edge = [&](std::size_t j) {
    return detail::bisect(B, g[j], j + 1 < n ? g[j + 1] : 1.0, kWindowTol);
  };

  for (std::size_t i = 0; i < n;) {
    if (v[i] > 0.0) {
      std::size_t j = i;
      while (j + 1 < n && v[j + 1] > 0.0) ++j;
      out.push_back({left_edge(i), right_edge(j), false});
      i = j + 1;
      continue;
    }
    // A nonpositive local maximum may still hide a window narrower than the
    // grid spacing, or touch zero exactly.
    const bool lmax = (i == 0 || v[i] >= v[i - 1]) && (i + 1 == n || v[i] >= v[i + 1]);
    if (lmax) {
      const double a = g[i == 0 ? 0 : i - 1];
      const double b = g[i + 1 == n ? n - 1 : i + 1];
      const detail::ScalarMin r = detail::golden_min([&](double q) { return -B(q); }, a, b, 1e-14);
      const double peak = -r.fx;
      if (peak > 0.0) {
        out.push_back({detail::bisect(B, a, r.x, kWindowTol), detail::bisect(B, r.x, b, kWindowTol),
                       false});
      } else if (peak >= -kTangencyTol) {
        out.push_back({r.x, r.x, true});
      }
    }
    ++i;
  }
  return out;
}

GammaInterval construct_continuous_shattering(int p) {
  if (p < 3 || p > Mixture::kDefaultMaxDegree) {
    throw Error(ErrorCode::InvalidArgument, "construct: p must lie in [3, 32]");
  }
  const double pd = static_cast<double>(p);
  // lower end: the dynamic criterion holds below beta = 1
  const Infimum lo = boundary_infimum(
      [&](double q) { return std::pow(q, 3.0 - pd) / (pd * (1.0 - q)); }, p == 3 ? 1.0 / 3.0 : kInf);
  // upper end: kappa >= 1 everywhere, i.e. no interior minimum below beta_cont = 1
  const Infimum hi = boundary_infimum(
      [&](double q) { return g_excess3(q) / std::pow(q, pd); }, p == 3 ? 1.0 / 3.0 : kInf);
  if (!(hi.value > lo.value)) {
    throw Error(ErrorCode::EmptyInterval,
                "construct: the admissible gamma_p^2 interval is empty for p = " + std::to_string(p) +
                    " (lower " + std::to_string(lo.value) + ", upper " + std::to_string(hi.value) + ")");
  }
  return {lo.value, hi.value};
}

}  // namespace glasskit
