#ifndef GLASSKIT_MONTECARLO_HPP
#define GLASSKIT_MONTECARLO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "glasskit/mixture.hpp"

namespace glasskit {

inline constexpr std::uint64_t kTensorGuard = std::uint64_t{1} << 28;  // entries per degree
inline constexpr int kMaxEnumerationN = 24;

struct SpinConfiguration {
  std::vector<double> values;
  Geometry geometry = Geometry::Ising;

  int size() const noexcept { return static_cast<int>(values.size()); }
  // Ising entries must be +-1; a spherical configuration must have |sigma|^2 = N within 1e-9.
  void validate() const;  // throws Shape
};

// Configuration <-> bit mask; bit i set means sigma_i = -1.
SpinConfiguration spins_from_mask(std::uint64_t mask, int n);
std::uint64_t mask_from_spins(const SpinConfiguration& s);

double overlap(const SpinConfiguration& a, const SpinConfiguration& b);  // <a, b> / N

struct PlantSpec {
  double beta = 0.0;
  std::uint64_t center_seed = 0;
};

// Unsymmetrized Gaussian couplings, one flat row-major N^k array per active degree.
struct DisorderInstance {
  int n = 0;
  Mixture mixture = Mixture::from_gammas({{2, 1.0}});
  std::map<int, std::vector<double>> tensors;
  std::optional<SpinConfiguration> planted_center;
  std::optional<double> beta_plant;
  std::uint64_t seed = 0;
};

// Coupling g_{i1..ik} for degree k is the standard normal at counter = flat index on
// stream k of `seed`. Planting draws sigma0 uniformly from `center_seed` and adds
// beta gamma_k / N^{(k-1)/2} sigma0_{i1} ... sigma0_{ik}.
DisorderInstance sample_disorder(const Mixture& m, int n, std::uint64_t seed,
                                 std::optional<PlantSpec> plant = std::nullopt);

double hamiltonian(const DisorderInstance& inst, const SpinConfiguration& sigma);

// Couplings collapsed onto subsets of sites: H(sigma) = sum_S J_S prod_{i in S} sigma_i.
// Valid for Ising configurations only.
struct SubsetCouplings {
  int n = 0;
  std::vector<std::uint64_t> masks;
  std::vector<double> values;
};
SubsetCouplings subset_couplings(const DisorderInstance& inst);

// Exact Gibbs measure on {-1, 1}^N by enumeration, N <= 24.
class ExactGibbs {
 public:
  ExactGibbs(const DisorderInstance& inst, double beta);  // throws TooLarge

  int n() const noexcept { return n_; }
  double beta() const noexcept { return beta_; }
  // log(2^-N sum_sigma exp(beta H(sigma))).
  double log_partition() const noexcept { return log_z_; }
  const std::vector<double>& energies() const noexcept { return energy_; }
  double probability(std::uint64_t mask) const;

  // Inverse-CDF draw; u in (0, 1).
  std::uint64_t sample_mask(double u) const;
  SpinConfiguration sample(double u) const { return spins_from_mask(sample_mask(u), n_); }

  // E[(<s1, s2>/N)^p] for two independent replicas.
  double overlap_moment(int p) const;
  // Law of <s1, s2>/N: entry w is the mass at overlap (N - 2w)/N.
  const std::vector<double>& overlap_law() const noexcept { return overlap_mass_; }

 private:
  int n_;
  double beta_;
  double log_z_ = 0.0;
  std::vector<double> energy_;
  std::vector<double> cdf_;
  std::vector<double> overlap_mass_;
};

inline ExactGibbs exact_gibbs(const DisorderInstance& inst, double beta) { return ExactGibbs(inst, beta); }

// log L_N = log Z - beta^2 N xi(1) / 2.
double log_likelihood_ratio(const DisorderInstance& inst, double beta);

struct NishimoriStats {
  int samples = 0;
  double ks_statistic = 0.0;  // sup |F_01 - F_12|
  double ks_band = 0.0;       // two-sample 95% critical value
  double mean_01 = 0.0, mean_12 = 0.0;
  double second_01 = 0.0, second_12 = 0.0;
  double se_01 = 0.0, se_12 = 0.0;  // standard errors of the means
};

// Independent planted instances; per instance, sigma0 is the center and sigma1,
// sigma2 are exact Gibbs samples. Compares the laws of <s0,s1>/N and <s1,s2>/N.
NishimoriStats nishimori_check(const Mixture& m, int n, double beta, int n_samples, std::uint64_t seed);

struct GlauberSummary {
  std::vector<double> overlaps;  // with the reference, after each sweep of N updates
  SpinConfiguration final_state;
  std::uint64_t flips = 0;
  // Visits per configuration mask, one count per sweep; only for N <= 16.
  std::vector<std::uint64_t> state_counts;
};

// Random-site heat-bath dynamics. `reference` defaults to `start`.
GlauberSummary glauber_run(const DisorderInstance& inst, double beta, const SpinConfiguration& start,
                           std::uint64_t steps, std::uint64_t seed,
                           const std::optional<SpinConfiguration>& reference = std::nullopt);

// alpha(q) = 0 for q <= lo, 1 for q >= hi, linear in between.
struct Ramp {
  double lo = 0.0;
  double hi = 1.0;
  double operator()(double q) const;
};

struct RayleighResult {
  double dirichlet = 0.0;
  double variance = 0.0;
  double quotient = 0.0;
};

// Test function f(sigma) = alpha(<sigma, sigma0>/N) under unit-rate heat-bath site
// clocks: dirichlet = 1/2 sum_sigma sum_i mu(sigma) r_i(sigma) (f(sigma^i) - f(sigma))^2.
// n_samples = 0 computes everything by enumeration; otherwise both terms are
// averaged over exact Gibbs samples drawn from `seed`.
RayleighResult rayleigh_quotient(const DisorderInstance& inst, double beta, const SpinConfiguration& sigma0,
                                 const Ramp& alpha, int n_samples = 0, std::uint64_t seed = 0);

}  // namespace glasskit

#endif  // GLASSKIT_MONTECARLO_HPP
