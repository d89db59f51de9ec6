#ifndef GLASSKIT_THRESHOLDS_HPP
#define GLASSKIT_THRESHOLDS_HPP

#include <optional>
#include <vector>

#include "glasskit/mixture.hpp"

// Spherical critical temperatures. None of these routines require xi(1) = 1;
// construct_continuous_shattering() relies on that.
namespace glasskit {

enum class Transition { Continuous, Discontinuous, Marginal };

const char* to_string(Transition t) noexcept;

struct ThresholdReport {
  double beta_cont;   // +inf when xi''(0) = 0
  double beta_c;
  double beta_dis;    // +inf when kappa has no interior critical point
  double beta_bar_d;
  double beta_d;
  Transition transition;
  std::optional<double> q_c;      // interior argmin of kappa, Discontinuous only
  bool beta_c_at_boundary;        // inf kappa attained only as q -> 0+
  bool beta_bar_d_at_boundary;
};

struct Infimum {
  double value;
  double argmin;      // 0 when attained only in the q -> 0+ limit
  bool at_boundary;
};

// Grid size used by every scan in this module.
inline constexpr int kThresholdGridPoints = 100000;
inline constexpr double kMarginalBand = 1e-7;

double beta_cont(const Mixture& m);

// (-log(1-q) - q) / xi(q). Below q = 1e-8 the q -> 0+ limit 1/xi''(0) is
// returned when finite; q = 0 with xi''(0) = 0 throws Domain.
double kappa(const Mixture& m, double q);

Infimum kappa_infimum(const Mixture& m);
double beta_c_sphere(const Mixture& m);

// Nonzero critical points of kappa, ascending.
std::vector<double> kappa_critical_points(const Mixture& m);
double beta_dis(const Mixture& m);

ThresholdReport classify_transition(const Mixture& m);

// beta^2 xi(q) + log(1-q) + q.
double f_talagrand(const Mixture& m, double beta, double q);

struct DynamicThresholds {
  double beta_bar_d;
  double beta_d;
  double q_star;      // minimizer of q / ((1-q) xi'(q)); 0 at the boundary
  bool at_boundary;
};
DynamicThresholds beta_dynamic(const Mixture& m);

struct Window {
  double lo;
  double hi;
  bool degenerate;  // tangency: lo == hi
};

// Maximal intervals of (0, 1) where beta^2 xi'(q)(1-q) > q, endpoints to 1e-10.
// When the condition only touches zero, a degenerate window at the tangency
// point is reported.
std::vector<Window> shattering_windows(const Mixture& m, double beta);

struct GammaInterval {
  double lo;
  double hi;
};

// Open interval of gamma_p^2 for which q^2/2 + gamma_p^2 q^p has a continuous
// transition at beta_c = 1 and still meets the dynamic criterion below 1.
// Throws EmptyInterval when the two bounds cross.
GammaInterval construct_continuous_shattering(int p);

}  // namespace glasskit

#endif  // GLASSKIT_THRESHOLDS_HPP
