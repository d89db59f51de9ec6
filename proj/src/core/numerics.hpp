// Internal numerical helpers shared by the compute modules. Not installed.
#ifndef GLASSKIT_SRC_NUMERICS_HPP
#define GLASSKIT_SRC_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace glasskit::detail {

// Overlap grid on (0, 1): log-spaced clusters at both ends (1e-9..1e-2 from
// each endpoint) plus a uniform middle. Strictly increasing.
std::vector<double> boundary_grid(std::size_t n);

struct ScalarMin {
  double x;
  double fx;
};

// Golden-section search for a minimum inside [a, b].
ScalarMin golden_min(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-12, int max_iter = 200);

// Scans f over `grid`, refines every interior local minimum (and the two
// endpoints' neighbourhoods) with golden section and returns the best.
ScalarMin grid_min(const std::function<double(double)>& f, const std::vector<double>& grid,
                   double tol = 1e-12);

// Bisection for a sign change of f on [a, b]; requires f(a), f(b) of opposite
// sign (or one of them zero). Stops when the bracket is narrower than tol.
double bisect(const std::function<double(double)>& f, double a, double b, double tol,
              int max_iter = 200);

struct SimplexResult {
  std::vector<double> x;
  double fx;
  int iterations;
  bool converged;
};

// Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_iter,
                          double ftol = 1e-13, double xtol = 1e-10);

// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E f(Z), Z ~ N(0, 1).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> log_weights;
};

// Cached per node count; the returned reference stays valid for the process.
const GaussHermite& gauss_hermite(int n);

// Numerically stable log(cosh(x)).
double log_cosh(double x);

// Worker count: GLASSKIT_THREADS if set and positive, else hardware threads.
unsigned thread_count();

// Calls body(i) for i in [0, n). Every index is visited exactly once; callers
// write results into per-index slots so the reduction order stays fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace glasskit::detail

#endif  // GLASSKIT_SRC_NUMERICS_HPP
