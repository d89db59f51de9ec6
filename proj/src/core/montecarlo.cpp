#include "glasskit/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "glasskit/error.hpp"
#include "glasskit/rng.hpp"
#include "numerics.hpp"

namespace glasskit {

namespace {

constexpr std::uint64_t kGibbsStream = std::uint64_t{1} << 32;
constexpr std::size_t kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

double unit_from_bits(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t tensor_size(int n, int k) {
  std::uint64_t size = 1;
  for (int j = 0; j < k; ++j) {
    size *= static_cast<std::uint64_t>(n);
    if (size > kTensorGuard) {
      std::ostringstream os;
      os << "sample_disorder: degree " << k << " at N = " << n << " exceeds the 2^28-entry tensor guard";
      throw Error(ErrorCode::TooLarge, os.str());
    }
  }
  return size;
}

double coupling_scale(int n, int k) { return std::pow(static_cast<double>(n), -0.5 * (k - 1)); }

// In-place unnormalized Walsh-Hadamard transform.
void fwht(std::vector<double>& a) {
  const std::size_t n = a.size();
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double u = a[j];
        const double v = a[j + len];
        a[j] = u + v;
        a[j + len] = u - v;
      }
    }
  }
}

// Sum over fixed blocks, reduced in block order so the result does not depend
// on the thread count.
template <class F>
double block_sum(std::size_t n, F&& term) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  detail::parallel_for(blocks, [&](std::size_t b) {
    double acc = 0.0;
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) acc += term(i);
    partial[b] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

struct Term {
  std::array<int, 4> sites{};
  int size = 0;
  double value = 0.0;
};

// Collapse every index tuple onto the set of sites appearing an odd number of
// times (sigma_i^2 = 1), merging equal sets. The empty set carries the constant
// part of H. Output is sorted by site set.
std::vector<Term> reduced_terms(const DisorderInstance& inst) {
  const int n = inst.n;
  if (n >= (1 << 15)) throw Error(ErrorCode::TooLarge, "Ising reduction supports N < 32768");
  std::unordered_map<std::uint64_t, double> acc;
  for (const auto& [k, tensor] : inst.tensors) {
    if (k > 4) throw Error(ErrorCode::TooLarge, "Ising reduction supports degrees up to 4");
    const double c = inst.mixture.gamma(k) * coupling_scale(n, k);
    std::array<int, 4> idx{};
    for (std::size_t f = 0; f < tensor.size(); ++f) {
      std::size_t r = f;
      for (int j = k - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(r % n);
        r /= n;
      }
      std::array<int, 4> s = idx;
      std::sort(s.begin(), s.begin() + k);
      std::array<int, 4> odd{};
      int m = 0;
      for (int j = 0; j < k;) {
        int e = j;
        while (e < k && s[e] == s[j]) ++e;
        if ((e - j) % 2 == 1) odd[m++] = s[j];
        j = e;
      }
      std::uint64_t key = static_cast<std::uint64_t>(m);
      for (int j = 0; j < m; ++j) key |= static_cast<std::uint64_t>(odd[j]) << (4 + 15 * j);
      acc[key] += c * tensor[f];
    }
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(acc.size());
  for (const auto& kv : acc) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  std::vector<Term> out;
  out.reserve(keys.size());
  for (std::uint64_t key : keys) {
    Term t;
    t.size = static_cast<int>(key & 0xF);
    for (int j = 0; j < t.size; ++j) t.sites[j] = static_cast<int>((key >> (4 + 15 * j)) & 0x7FFF);
    t.value = acc[key];
    out.push_back(t);
  }
  return out;
}

void require_ising(const SpinConfiguration& s, int n, const char* what) {
  if (s.size() != n) {
    std::ostringstream os;
    os << what << ": configuration has " << s.size() << " entries, instance has N = " << n;
    throw Error(ErrorCode::Shape, os.str());
  }
  if (s.geometry != Geometry::Ising) throw Error(ErrorCode::Shape, std::string(what) + ": Ising configuration required");
  s.validate();
}

int overlap_weight(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace

void SpinConfiguration::validate() const {
  if (geometry == Geometry::Ising) {
    for (double v : values) {
      if (v != 1.0 && v != -1.0) throw Error(ErrorCode::Shape, "Ising configuration entries must be +1 or -1");
    }
  } else {
    double norm2 = 0.0;
    for (double v : values) norm2 += v * v;
    if (std::abs(norm2 - static_cast<double>(values.size())) > 1e-9) {
      throw Error(ErrorCode::Shape, "spherical configuration must satisfy |sigma|^2 = N");
    }
  }
}

SpinConfiguration spins_from_mask(std::uint64_t mask, int n) {
  SpinConfiguration s;
  s.values.resize(n);
  for (int i = 0; i < n; ++i) s.values[i] = (mask >> i) & 1u ? -1.0 : 1.0;
  return s;
}

std::uint64_t mask_from_spins(const SpinConfiguration& s) {
  if (s.size() > 64) throw Error(ErrorCode::TooLarge, "mask_from_spins: N > 64");
  std::uint64_t mask = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s.values[i] < 0.0) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

double overlap(const SpinConfiguration& a, const SpinConfiguration& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::Shape, "overlap: configurations differ in length");
  if (a.size() == 0) throw Error(ErrorCode::Shape, "overlap: empty configuration");
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a.values[i] * b.values[i];
  return acc / a.size();
}

DisorderInstance sample_disorder(const Mixture& m, int n, std::uint64_t seed, std::optional<PlantSpec> plant) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "sample_disorder: N must be at least 2");
  if (plant && !std::isfinite(plant->beta)) throw Error(ErrorCode::InvalidArgument, "sample_disorder: planting beta must be finite");

  DisorderInstance inst;
  inst.n = n;
  inst.mixture = m;
  inst.seed = seed;
  const std::vector<int> degrees = m.degrees();
  std::vector<std::uint64_t> sizes;
  for (int k : degrees) sizes.push_back(tensor_size(n, k));  // check every degree before allocating

  if (plant) {
    const CounterRng crng(plant->center_seed, 0);
    SpinConfiguration c;
    c.values.resize(n);
    for (int i = 0; i < n; ++i) c.values[i] = crng.uniform(static_cast<std::uint64_t>(i)) < 0.5 ? 1.0 : -1.0;
    inst.planted_center = std::move(c);
    inst.beta_plant = plant->beta;
  }

  for (std::size_t d = 0; d < degrees.size(); ++d) {
    const int k = degrees[d];
    const std::uint64_t size = sizes[d];
    std::vector<double> t(size);
    const CounterRng rng(seed, static_cast<std::uint64_t>(k));
    const double tilt = plant ? plant->beta * m.gamma(k) * coupling_scale(n, k) : 0.0;
    const std::size_t blocks = (size + kBlock - 1) / kBlock;
    detail::parallel_for(blocks, [&](std::size_t b) {
      const std::uint64_t end = std::min<std::uint64_t>(size, (b + 1) * kBlock);
      for (std::uint64_t f = b * kBlock; f < end; ++f) {
        double g = rng.normal(f);
        if (plant) {
          double sign = 1.0;
          std::uint64_t r = f;
          for (int j = 0; j < k; ++j) {
            sign *= inst.planted_center->values[r % n];
            r /= n;
          }
          g += tilt * sign;
        }
        t[f] = g;
      }
    });
    inst.tensors.emplace(k, std::move(t));
  }
  return inst;
}

double hamiltonian(const DisorderInstance& inst, const SpinConfiguration& sigma) {
  const int n = inst.n;
  if (sigma.size() != n) {
    std::ostringstream os;
    os << "hamiltonian: configuration has " << sigma.size() << " entries, instance has N = " << n;
    throw Error(ErrorCode::Shape, os.str());
  }
  sigma.validate();
  double h = 0.0;
  for (const auto& [k, tensor] : inst.tensors) {
    if (tensor.size() != tensor_size(n, k)) throw Error(ErrorCode::Shape, "hamiltonian: tensor size does not match N^k");
    // Contract the last index repeatedly: N^k -> N^{k-1} -> ... -> scalar.
    std::vector<double> cur = tensor;
    while (cur.size() > 1) {
      std::vector<double> next(cur.size() / n, 0.0);
      for (std::size_t j = 0; j < next.size(); ++j) {
        double acc = 0.0;
        const double* row = cur.data() + j * n;
        for (int i = 0; i < n; ++i) acc += row[i] * sigma.values[i];
        next[j] = acc;
      }
      cur.swap(next);
    }
    h += inst.mixture.gamma(k) * coupling_scale(n, k) * cur[0];
  }
  return h;
}

SubsetCouplings subset_couplings(const DisorderInstance& inst) {
  if (inst.n > 64) throw Error(ErrorCode::TooLarge, "subset_couplings: N > 64");
  SubsetCouplings out;
  out.n = inst.n;
  for (const Term& t : reduced_terms(inst)) {
    std::uint64_t mask = 0;
    for (int j = 0; j < t.size; ++j) mask |= std::uint64_t{1} << t.sites[j];
    out.masks.push_back(mask);
    out.values.push_back(t.value);
  }
  return out;
}

ExactGibbs::ExactGibbs(const DisorderInstance& inst, double beta) : n_(inst.n), beta_(beta) {
  if (n_ > kMaxEnumerationN) {
    std::ostringstream os;
    os << "exact_gibbs: N = " << n_ << " exceeds the enumeration limit " << kMaxEnumerationN;
    throw Error(ErrorCode::TooLarge, os.str());
  }
  if (!std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "exact_gibbs: beta must be finite");
  const std::size_t states = std::size_t{1} << n_;

  // Energies are the Walsh transform of the subset couplings.
  energy_.assign(states, 0.0);
  const SubsetCouplings sc = subset_couplings(inst);
  for (std::size_t t = 0; t < sc.masks.size(); ++t) energy_[sc.masks[t]] += sc.values[t];
  fwht(energy_);

  double top = -INFINITY;
  for (double e : energy_) top = std::max(top, beta_ * e);
  std::vector<double> p(states);
  detail::parallel_for((states + kBlock - 1) / kBlock, [&](std::size_t b) {
    const std::size_t end = std::min(states, (b + 1) * kBlock);
    for (std::size_t x = b * kBlock; x < end; ++x) p[x] = std::exp(beta_ * energy_[x] - top);
  });
  const double total = block_sum(states, [&](std::size_t x) { return p[x]; });
  log_z_ = top + std::log(total) - n_ * M_LN2;
  for (double& v : p) v /= total;

  cdf_.resize(states);
  std::partial_sum(p.begin(), p.end(), cdf_.begin());

  // Autocorrelation A(d) = sum_x p(x) p(x ^ d) by two transforms, then
  // aggregated by Hamming weight.
  fwht(p);
  for (double& v : p) v *= v;
  fwht(p);
  overlap_mass_.assign(n_ + 1, 0.0);
  const double inv_states = 1.0 / static_cast<double>(states);
  for (std::size_t d = 0; d < states; ++d) overlap_mass_[std::popcount(d)] += p[d] * inv_states;
}

double ExactGibbs::probability(std::uint64_t mask) const {
  if (mask >= cdf_.size()) throw Error(ErrorCode::Domain, "probability: mask out of range");
  return cdf_[mask] - (mask == 0 ? 0.0 : cdf_[mask - 1]);
}

std::uint64_t ExactGibbs::sample_mask(double u) const {
  const double target = u * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
}

double ExactGibbs::overlap_moment(int p) const {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "overlap_moment: p must be nonnegative");
  // Integer numerators (N - 2w)^p keep the beta = 0 moments exact.
  double num = 0.0;
  for (int w = 0; w <= n_; ++w) num += overlap_mass_[w] * std::pow(static_cast<double>(n_ - 2 * w), p);
  return num / std::pow(static_cast<double>(n_), p);
}

double log_likelihood_ratio(const DisorderInstance& inst, double beta) {
  const ExactGibbs g(inst, beta);
  return g.log_partition() - 0.5 * beta * beta * inst.n * inst.mixture.total();
}

NishimoriStats nishimori_check(const Mixture& m, int n, double beta, int n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw Error(ErrorCode::InvalidArgument, "nishimori_check: need at least 2 samples");
  if (n > kMaxEnumerationN) throw Error(ErrorCode::TooLarge, "nishimori_check: N exceeds the enumeration limit");
  std::vector<int> w01(n_samples), w12(n_samples);
  detail::parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    const std::uint64_t seed_s = derive_seed(seed, s);
    const DisorderInstance inst = sample_disorder(m, n, seed_s, PlantSpec{beta, derive_seed(seed_s, 1)});
    const ExactGibbs g(inst, beta);
    const CounterRng rng(seed_s, kGibbsStream);
    const std::uint64_t x0 = mask_from_spins(*inst.planted_center);
    const std::uint64_t x1 = g.sample_mask(rng.uniform(0));
    const std::uint64_t x2 = g.sample_mask(rng.uniform(1));
    w01[s] = overlap_weight(x0, x1);
    w12[s] = overlap_weight(x1, x2);
  });

  NishimoriStats st;
  st.samples = n_samples;
  std::vector<double> c01(n + 1, 0.0), c12(n + 1, 0.0);
  for (int s = 0; s < n_samples; ++s) {
    c01[w01[s]] += 1.0;
    c12[w12[s]] += 1.0;
  }
  // Overlap (N - 2w)/N decreases in w, so accumulate from w = N down.
  double f01 = 0.0, f12 = 0.0;
  for (int w = n; w >= 0; --w) {
    f01 += c01[w] / n_samples;
    f12 += c12[w] / n_samples;
    st.ks_statistic = std::max(st.ks_statistic, std::abs(f01 - f12));
  }
  st.ks_band = 1.358 * std::sqrt(2.0 / n_samples);

  auto moments = [&](const std::vector<int>& w, double& mean, double& second, double& se) {
    double s1 = 0.0, s2 = 0.0;
    for (int v : w) {
      const double q = static_cast<double>(n - 2 * v) / n;
      s1 += q;
      s2 += q * q;
    }
    mean = s1 / n_samples;
    second = s2 / n_samples;
    const double var = std::max(0.0, (s2 - n_samples * mean * mean) / (n_samples - 1));
    se = std::sqrt(var / n_samples);
  };
  moments(w01, st.mean_01, st.second_01, st.se_01);
  moments(w12, st.mean_12, st.second_12, st.se_12);
  return st;
}

GlauberSummary glauber_run(const DisorderInstance& inst, double beta, const SpinConfiguration& start,
                           std::uint64_t steps, std::uint64_t seed,
                           const std::optional<SpinConfiguration>& reference) {
  const int n = inst.n;
  require_ising(start, n, "glauber_run");
  const SpinConfiguration& ref = reference ? *reference : start;
  require_ising(ref, n, "glauber_run reference");

  const std::vector<Term> terms = reduced_terms(inst);
  std::vector<std::vector<std::size_t>> at_site(n);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (int j = 0; j < terms[t].size; ++j) at_site[terms[t].sites[j]].push_back(t);
  }

  GlauberSummary out;
  std::vector<double> s = start.values;
  const bool track_states = n <= 16;
  if (track_states) out.state_counts.assign(std::size_t{1} << n, 0);
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += s[i] * ref.values[i];

  const CounterRng rng(seed, 0);
  for (std::uint64_t t = 0; t < steps; ++t) {
    const auto b = rng.block(t);
    const int i = static_cast<int>((static_cast<std::uint64_t>(b[0]) * static_cast<std::uint64_t>(n)) >> 32);
    // H(sigma_i = +1) - H(sigma_i = -1) = 2 h_i.
    double h = 0.0;
    for (std::size_t ti : at_site[i]) {
      const Term& term = terms[ti];
      double prod = term.value;
      for (int j = 0; j < term.size; ++j) {
        if (term.sites[j] != i) prod *= s[term.sites[j]];
      }
      h += prod;
    }
    const double p_up = 1.0 / (1.0 + std::exp(-2.0 * beta * h));
    const double v = unit_from_bits(b[1], b[2]) < p_up ? 1.0 : -1.0;
    if (v != s[i]) {
      dot += (v - s[i]) * ref.values[i];
      s[i] = v;
      ++out.flips;
    }
    if ((t + 1) % static_cast<std::uint64_t>(n) == 0) {
      out.overlaps.push_back(dot / n);
      if (track_states) {
        std::uint64_t mask = 0;
        for (int j = 0; j < n; ++j) {
          if (s[j] < 0.0) mask |= std::uint64_t{1} << j;
        }
        ++out.state_counts[mask];
      }
    }
  }
  out.final_state.values = std::move(s);
  return out;
}

double Ramp::operator()(double q) const {
  if (q <= lo) return 0.0;
  if (q >= hi) return 1.0;
  return (q - lo) / (hi - lo);
}

RayleighResult rayleigh_quotient(const DisorderInstance& inst, double beta, const SpinConfiguration& sigma0,
                                 const Ramp& alpha, int n_samples, std::uint64_t seed) {
  const int n = inst.n;
  require_ising(sigma0, n, "rayleigh_quotient");
  if (!(alpha.lo < alpha.hi)) throw Error(ErrorCode::InvalidArgument, "rayleigh_quotient: ramp needs lo < hi");
  if (n_samples < 0) throw Error(ErrorCode::InvalidArgument, "rayleigh_quotient: n_samples must be >= 0");
  const ExactGibbs g(inst, beta);
  const std::uint64_t x0 = mask_from_spins(sigma0);

  // f depends on sigma only through its Hamming distance to sigma0.
  std::vector<double> f_of_w(n + 1);
  for (int w = 0; w <= n; ++w) f_of_w[w] = alpha(static_cast<double>(n - 2 * w) / n);
  const std::vector<double>& e = g.energies();

  // 1/2 sum_i r_i(x) (df)^2 with heat-bath rate r_i = mu(x^i) / (mu(x) + mu(x^i)).
  auto local_dirichlet = [&](std::uint64_t x) {
    const int w = overlap_weight(x, x0);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t y = x ^ (std::uint64_t{1} << i);
      const int wy = ((x0 >> i) & 1u) == ((x >> i) & 1u) ? w + 1 : w - 1;
      const double df = f_of_w[wy] - f_of_w[w];
      if (df == 0.0) continue;
      const double rate = 1.0 / (1.0 + std::exp(beta * (e[x] - e[y])));
      acc += rate * df * df;
    }
    return 0.5 * acc;
  };

  RayleighResult r;
  if (n_samples == 0) {
    const std::size_t states = std::size_t{1} << n;
    const double mean = block_sum(states, [&](std::size_t x) { return g.probability(x) * f_of_w[overlap_weight(x, x0)]; });
    const double second = block_sum(states, [&](std::size_t x) {
      const double f = f_of_w[overlap_weight(x, x0)];
      return g.probability(x) * f * f;
    });
    r.variance = second - mean * mean;
    r.dirichlet = block_sum(states, [&](std::size_t x) { return g.probability(x) * local_dirichlet(x); });
  } else {
    const CounterRng rng(seed, kGibbsStream);
    double s1 = 0.0, s2 = 0.0, d = 0.0;
    for (int k = 0; k < n_samples; ++k) {
      const std::uint64_t x = g.sample_mask(rng.uniform(static_cast<std::uint64_t>(k)));
      const double f = f_of_w[overlap_weight(x, x0)];
      s1 += f;
      s2 += f * f;
      d += local_dirichlet(x);
    }
    const double mean = s1 / n_samples;
    r.variance = s2 / n_samples - mean * mean;
    r.dirichlet = d / n_samples;
  }
  if (r.variance < 1e-14) {
    throw Error(ErrorCode::DegenerateTestFunction, "rayleigh_quotient: test function has (near) zero variance");
  }
  r.quotient = r.dirichlet / r.variance;
  return r;
}

}  // namespace glasskit
