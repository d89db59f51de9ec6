#ifndef GLASSKIT_FRANZ_PARISI_HPP
#define GLASSKIT_FRANZ_PARISI_HPP

#include <optional>
#include <vector>

#include "glasskit/mixture.hpp"

namespace glasskit {

enum class FPMethod { Annealed, RSAnsatz, Duality };

const char* to_string(FPMethod m) noexcept;

struct FPPoint {
  double q;
  double value;
  FPMethod method;
};

struct FPCurve {
  Geometry geometry = Geometry::Sphere;
  double beta = 0.0;
  std::vector<FPPoint> grid;
  double free_energy = 0.0;  // F(beta) reference level
};

struct ShatteringReport {
  bool shattered = false;
  std::optional<double> q1, q2;
  std::optional<double> q_lo_bar, q_hi_bar;
  std::optional<double> certificate_gap;
  // Diagnostics for the three conditions, reported even when not shattered.
  bool matches_free_energy_at_zero = false;
  bool below_free_energy = false;
  bool has_increasing_window = false;
};

struct ShatteringOptions {
  double tol = 1e-5;
  double tol_slope = 1e-3;
  int min_run = 10;          // points in the increasing window
  double max_spacing = 1e-3;
};

// F(beta) + beta^2 xi(q) + h(q), with F(beta) = beta^2 xi(1) / 2.
double fp_annealed_bound(const Mixture& m, double beta, double q, Geometry geometry);

// Throws BoundInvalid when beta exceeds the static threshold (spherical formula
// for the sphere, the k-level estimate for the cube): every FP formula here
// assumes beta <= beta_c.
void require_below_beta_c(const Mixture& m, double beta, Geometry geometry, int k_levels = 1);

// phi_RS(q; beta) = E log cosh(s z + s^2) + beta^2/2 (xi(1) + xi(q) - (1+q) xi'(q)),
// s^2 = beta^2 xi'(q).
double fp_rs_ising(const Mixture& m, double beta, double q);
// d/dq phi_RS = beta^2/2 xi''(q) (E tanh^2(s z + s^2) - q).
double fp_rs_ising_derivative(const Mixture& m, double beta, double q);

// beta^2 xi(q) + inf_h {E log cosh(s z + h) + beta^2/2 (xi(1) - xi(q) - (1-q) xi'(q)) - h q}.
double fp_rs_bound(const Mixture& m, double beta, double q);

struct SupResult {
  double value;
  double argmax;
};
SupResult fp_rs_sup(const Mixture& m, double beta);

// Field h with dF(beta, h)/dh = q; largest root, overlap tolerance 1e-8.
double field_for_overlap(const Mixture& m, double beta, double q, Geometry geometry, int k_levels = 0);

// F(beta, h(q)) - h(q) q + beta^2 xi(q).
double fp_duality(const Mixture& m, double beta, double q, Geometry geometry, int k_levels = 0);

struct LegendreCheck {
  double lhs;
  double rhs;
  double gap;
  double argmax_q;
};
LegendreCheck legendre_check(const Mixture& m, double beta, double h, Geometry geometry,
                             int k_levels = 0);

// Overlap grid (1 - cos(pi u)) / 2 for u uniform, from 0 to 1 - 2e-6; clustered at both
// ends, spacing <= pi / (2 (n - 1)).
std::vector<double> fp_grid(int n = 2000);

FPCurve fp_curve(const Mixture& m, double beta, Geometry geometry, FPMethod method, int n_points = 2000,
                 int k_levels = 0);

ShatteringReport classify_shattering(const FPCurve& curve, const ShatteringOptions& opts = {});

}  // namespace glasskit

#endif  // GLASSKIT_FRANZ_PARISI_HPP
