#ifndef GLASSKIT_PARISI_HPP
#define GLASSKIT_PARISI_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "glasskit/mixture.hpp"

namespace glasskit {

// Finite-atom probability measure on [0, 1). Atom locations are strictly
// increasing, weights positive and summing to 1 within 1e-12.
class RSBMeasure {
 public:
  RSBMeasure(std::vector<double> q, std::vector<double> w);  // throws InvalidArgument
  static RSBMeasure delta(double q) { return RSBMeasure({q}, {1.0}); }

  const std::vector<double>& locations() const noexcept { return q_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  std::size_t size() const noexcept { return q_.size(); }

  double cdf(double t) const noexcept;  // zeta([0, t])
  double q_hat() const noexcept { return q_.back(); }
  double phi(double t) const noexcept;  // int_t^1 cdf(s) ds

 private:
  std::vector<double> q_;
  std::vector<double> w_;
};

double q_max(const RSBMeasure& zeta);
double overlap_moment(const RSBMeasure& zeta, int p);

// Where the field enters the spherical functional: `Paper` integrates
// beta^2 (xi'(t) + h^2) against the cdf, `Independent` uses beta^2 xi'(t) + h^2.
// The Ising functional always adds h to the cavity field at t = 0.
enum class FieldConvention { Paper, Independent };

inline constexpr int kDefaultHermiteNodes = 61;

double crisanti_sommers(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                        FieldConvention conv = FieldConvention::Paper);

struct ParisiSolution {
  double value = 0.0;
  double phi0 = 0.0;   // Ising: Phi(0, h); sphere: the functional value
  double dphi0 = 0.0;  // derivative of the value in the field at fixed measure
  RSBMeasure measure = RSBMeasure::delta(0.0);
  Geometry geometry = Geometry::Ising;
  double beta = 0.0;
  double field = 0.0;
  bool converged = true;
  int evaluations = 0;
};

// Ising functional at a fixed measure via the exact finite-RSB recursion.
ParisiSolution parisi_pde_solve(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                                int hermite_nodes = kDefaultHermiteNodes);

// Either functional at a fixed measure, filled as a ParisiSolution.
ParisiSolution parisi_evaluate(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                               Geometry geometry, FieldConvention conv = FieldConvention::Paper);

struct MinimizeOptions {
  int starts = 16;
  int max_iterations = 4000;   // per simplex run
  std::uint64_t seed = 20240917;
  FieldConvention convention = FieldConvention::Paper;
  int hermite_nodes = kDefaultHermiteNodes;
  int search_nodes = 21;       // Ising multi-start phase with three or more atoms
};

// Minimum over measures with at most k_levels + 1 atoms (k_levels <= 8).
// The result for k is never worse than the result for k - 1.
ParisiSolution minimize_parisi(const Mixture& m, double beta, double field, Geometry geometry,
                               int k_levels, const MinimizeOptions& opts = {});

// Smallest beta in [0, 4] at which the k-level minimum drops below beta^2/2 - tol
// (tol >= 1e-10), by bisection to 1e-4. +inf when it never does.
double beta_c_ising_estimate(const Mixture& m, int k_levels, double tol = 1e-9,
                             Geometry geometry = Geometry::Ising);

}  // namespace glasskit

#endif  // GLASSKIT_PARISI_HPP
