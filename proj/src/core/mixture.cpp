#include "glasskit/mixture.hpp"

#include <cmath>
#include <sstream>

#include "glasskit/error.hpp"

namespace glasskit {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kEntropyClamp = 1.0 - 1e-12;

void check_degree(int k, int max_degree) {
  if (k < 2) {
    throw Error(ErrorCode::InvalidMixture,
                "degree " + std::to_string(k) + " < 2 (external fields are not mixture terms)");
  }
  if (k > max_degree) {
    throw Error(ErrorCode::InvalidMixture,
                "degree " + std::to_string(k) + " exceeds the maximum supported degree " +
                    std::to_string(max_degree));
  }
}

}  // namespace

const char* to_string(Geometry g) noexcept {
  return g == Geometry::Sphere ? "sphere" : "ising";
}

Mixture::Mixture(std::vector<double> gamma, int max_degree)
    : gamma_(std::move(gamma)), max_degree_(max_degree) {
  while (gamma_.size() > 3 && gamma_.back() == 0.0) gamma_.pop_back();
  gamma_sq_.resize(gamma_.size());
  for (std::size_t k = 0; k < gamma_.size(); ++k) gamma_sq_[k] = gamma_[k] * gamma_[k];
}

Mixture Mixture::from_gammas(const std::map<int, double>& gammas, int max_degree) {
  if (gammas.empty()) throw Error(ErrorCode::InvalidMixture, "empty mixture");
  std::vector<double> g(3, 0.0);
  bool any = false;
  for (const auto& [k, v] : gammas) {
    check_degree(k, max_degree);
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidMixture,
                  "coefficient for degree " + std::to_string(k) + " must be finite and >= 0");
    }
    if (static_cast<int>(g.size()) <= k) g.resize(k + 1, 0.0);
    g[k] = v;
    any = any || v > 0.0;
  }
  if (!any) throw Error(ErrorCode::InvalidMixture, "all coefficients are zero");
  return Mixture(std::move(g), max_degree);
}

Mixture Mixture::from_squared(const std::map<int, double>& gamma_sq, int max_degree) {
  std::map<int, double> g;
  for (const auto& [k, v] : gamma_sq) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidMixture,
                  "squared coefficient for degree " + std::to_string(k) + " must be finite and >= 0");
    }
    g[k] = std::sqrt(v);
  }
  Mixture m = from_gammas(g, max_degree);
  // Keep the requested squares bit-exact rather than re-squaring the roots.
  for (const auto& [k, v] : gamma_sq) {
    if (k < static_cast<int>(m.gamma_sq_.size())) m.gamma_sq_[k] = v;
  }
  return m;
}

double Mixture::xi(double q) const noexcept {
  double acc = 0.0;
  for (std::size_t k = gamma_sq_.size(); k-- > 0;) acc = acc * q + gamma_sq_[k];
  return acc;
}

double Mixture::dxi(double q) const noexcept {
  double acc = 0.0;
  for (std::size_t k = gamma_sq_.size(); k-- > 1;) acc = acc * q + static_cast<double>(k) * gamma_sq_[k];
  return acc;
}

double Mixture::d2xi(double q) const noexcept {
  double acc = 0.0;
  for (std::size_t k = gamma_sq_.size(); k-- > 2;) {
    acc = acc * q + static_cast<double>(k * (k - 1)) * gamma_sq_[k];
  }
  return acc;
}

double Mixture::dxi_over_q(double q) const noexcept {
  double acc = 0.0;
  for (std::size_t k = gamma_sq_.size(); k-- > 2;) acc = acc * q + static_cast<double>(k) * gamma_sq_[k];
  return acc;
}

double Mixture::gamma(int k) const noexcept {
  return (k >= 0 && k < static_cast<int>(gamma_.size())) ? gamma_[k] : 0.0;
}

double Mixture::gamma_sq(int k) const noexcept {
  return (k >= 0 && k < static_cast<int>(gamma_sq_.size())) ? gamma_sq_[k] : 0.0;
}

std::vector<int> Mixture::degrees() const {
  std::vector<int> out;
  for (std::size_t k = 2; k < gamma_sq_.size(); ++k) {
    if (gamma_sq_[k] > 0.0) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::map<int, double> Mixture::gammas() const {
  std::map<int, double> out;
  for (int k : degrees()) out[k] = gamma_[k];
  return out;
}

double Mixture::total() const noexcept {
  double s = 0.0;
  for (double v : gamma_sq_) s += v;
  return s;
}

bool Mixture::normalized() const noexcept {
  return std::abs(total() - 1.0) <= kNormalizationTol;
}

std::string Mixture::describe() const {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (int k : degrees()) {
    if (!first) os << " + ";
    os << gamma_sq_[k] << " q^" << k;
    first = false;
  }
  return os.str();
}

NormalizedMixture normalize(const std::map<int, double>& coeffs, int max_degree) {
  Mixture raw = Mixture::from_gammas(coeffs, max_degree);
  const double scale = 1.0 / std::sqrt(raw.total());
  std::map<int, double> g;
  for (const auto& [k, v] : coeffs) g[k] = v * scale;
  Mixture m = Mixture::from_gammas(g, max_degree);
  // Push any residual rounding into the squares so xi(1) = 1 to round-off.
  std::map<int, double> sq;
  const double t = m.total();
  for (int k : m.degrees()) sq[k] = m.gamma_sq(k) / t;
  return {Mixture::from_squared(sq, max_degree), scale};
}

double xi_eval(const Mixture& m, double q, int order) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::Domain, "xi_eval: q must lie in [0, 1]");
  }
  switch (order) {
    case 0: return m.xi(q);
    case 1: return m.dxi(q);
    case 2: return m.d2xi(q);
    default: throw Error(ErrorCode::InvalidArgument, "xi_eval: order must be 0, 1 or 2");
  }
}

EntropyValue entropy_checked(Geometry g, double q) {
  if (!(std::abs(q) < 1.0)) {
    throw Error(ErrorCode::Domain, "entropy: |q| must be < 1");
  }
  bool clamped = false;
  if (std::abs(q) > kEntropyClamp) {
    q = std::copysign(kEntropyClamp, q);
    clamped = true;
  }
  double v;
  if (g == Geometry::Sphere) {
    v = 0.5 * std::log1p(-q * q);
  } else {
    v = -0.5 * (1.0 + q) * std::log1p(q) - 0.5 * (1.0 - q) * std::log1p(-q);
  }
  return {v, clamped};
}

Mixture perturb(const Mixture& m, int p, double eps) {
  if (p < 3) throw Error(ErrorCode::InvalidPerturbation, "perturbation degree must be >= 3");
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidPerturbation, "eps must be >= 0");
  if (eps > m.gamma_sq(2)) {
    throw Error(ErrorCode::InvalidPerturbation,
                "eps exceeds gamma_2^2; the degree-2 coefficient would turn negative");
  }
  if (eps == 0.0) return m;
  std::map<int, double> sq;
  for (int k : m.degrees()) sq[k] = m.gamma_sq(k);
  sq[2] = m.gamma_sq(2) - eps;
  sq[p] = m.gamma_sq(p) + eps;
  if (sq[2] == 0.0) sq.erase(2);
  return Mixture::from_squared(sq, m.max_degree());
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidMixture: return "InvalidMixture";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorCode::SingularMeasure: return "SingularMeasure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::FieldRangeExceeded: return "FieldRangeExceeded";
    case ErrorCode::BoundInvalid: return "BoundInvalid";
    case ErrorCode::Resolution: return "ResolutionError";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Shape: return "ShapeError";
    case ErrorCode::DegenerateTestFunction: return "DegenerateTestFunction";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace glasskit
