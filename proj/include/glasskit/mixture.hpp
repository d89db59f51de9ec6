#ifndef GLASSKIT_MIXTURE_HPP
#define GLASSKIT_MIXTURE_HPP

#include <map>
#include <string>
#include <vector>

namespace glasskit {

enum class Geometry { Sphere, Ising };

const char* to_string(Geometry g) noexcept;

/// Mixture function xi(q) = sum_k gamma_k^2 q^k of a mixed p-spin Hamiltonian.
///
/// Coefficients are stored as gamma_k (the Hamiltonian's couplings scale) and
/// squared on demand. Instances are immutable; every member is safe to call
/// concurrently.
class Mixture {
 public:
  static constexpr int kDefaultMaxDegree = 32;

  /// Builds a mixture from gamma_k values without rescaling.
  /// Throws InvalidMixture on degree < 2, degree > max_degree, negative or
  /// non-finite coefficients, or when every coefficient is zero.
  static Mixture from_gammas(const std::map<int, double>& gammas,
                             int max_degree = kDefaultMaxDegree);

  /// Builds a mixture from gamma_k^2 values (the coefficients of xi itself).
  static Mixture from_squared(const std::map<int, double>& gamma_sq,
                              int max_degree = kDefaultMaxDegree);

  // Polynomial evaluation, valid for any q in [-1, 1]. No domain checks; the
  // checked entry point is xi_eval().
  double xi(double q) const noexcept;
  double dxi(double q) const noexcept;
  double d2xi(double q) const noexcept;
  // xi'(q)/q as a polynomial, finite at q = 0 where it equals xi''(0).
  double dxi_over_q(double q) const noexcept;

  double gamma(int k) const noexcept;
  double gamma_sq(int k) const noexcept;
  /// gamma_k^2 indexed by degree (entries 0 and 1 are always zero).
  const std::vector<double>& squared() const noexcept { return gamma_sq_; }
  std::vector<int> degrees() const;
  std::map<int, double> gammas() const;
  int max_degree() const noexcept { return max_degree_; }
  int top_degree() const noexcept { return static_cast<int>(gamma_sq_.size()) - 1; }

  /// xi(1) = sum_k gamma_k^2.
  double total() const noexcept;
  /// True when |xi(1) - 1| <= 1e-12.
  bool normalized() const noexcept;

  std::string describe() const;

 private:
  Mixture(std::vector<double> gamma, int max_degree);

  std::vector<double> gamma_;
  std::vector<double> gamma_sq_;
  int max_degree_;
};

struct NormalizedMixture {
  Mixture mixture;
  double scale;  // common factor applied to every gamma_k
};

/// Rescales gamma_k by a common factor so that xi(1) = 1.
NormalizedMixture normalize(const std::map<int, double>& coeffs,
                            int max_degree = Mixture::kDefaultMaxDegree);

/// xi, xi' or xi'' at q in [0, 1]; order must be 0, 1 or 2.
double xi_eval(const Mixture& m, double q, int order);

struct EntropyValue {
  double value;
  bool clamped;  // |q| was pulled in to 1 - 1e-12
};

/// Overlap entropy h(q): log-volume of the shell {<sigma, sigma0>/N = q}.
/// Sphere: 0.5 log(1 - q^2). Ising: -(1+q)/2 log(1+q) - (1-q)/2 log(1-q).
/// |q| >= 1 throws Domain; 1 - 1e-12 <= |q| < 1 is clamped and flagged.
EntropyValue entropy_checked(Geometry g, double q);
inline double entropy(Geometry g, double q) { return entropy_checked(g, q).value; }

/// xi(x) + eps (x^p - x^2). Normalization is preserved and xi''(0) drops by 2 eps.
Mixture perturb(const Mixture& m, int p, double eps);

}  // namespace glasskit

#endif  // GLASSKIT_MIXTURE_HPP
