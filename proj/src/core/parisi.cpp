#include "glasskit/parisi.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "glasskit/error.hpp"
#include "glasskit/rng.hpp"
#include "numerics.hpp"

namespace glasskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightSumTol = 1e-12;
constexpr double kAcceptSlack = 1e-12;
constexpr int kMaxLevels = 8;

// Segment [a, b) of constant cdf value m.
struct Segment {
  double a, b, m;
};

// Includes the empty-cdf segment below the first atom and the top segment
// [q_hat, 1] where the cdf is 1.
std::vector<Segment> segments(const RSBMeasure& z) {
  const auto& q = z.locations();
  const auto& w = z.weights();
  std::vector<Segment> s;
  if (q[0] > 0.0) s.push_back({0.0, q[0], 0.0});
  double c = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) {
    c += w[j];
    s.push_back({q[j], q[j + 1], c});
  }
  s.push_back({q.back(), 1.0, 1.0});
  return s;
}

// int_a^b t xi''(t) dt
double t_d2xi_integral(const Mixture& m, double a, double b) {
  return (b * m.dxi(b) - m.xi(b)) - (a * m.dxi(a) - m.xi(a));
}

class IsingRecursion {
 public:
  IsingRecursion(const Mixture& m, double beta, const RSBMeasure& z, int nodes)
      : gh_(detail::gauss_hermite(nodes)) {
    const double b2 = beta * beta;
    const auto segs = segments(z);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const double var = b2 * (m.dxi(segs[i].b) - m.dxi(segs[i].a));
      if (var > 0.0) levels_.push_back({std::sqrt(var), segs[i].m});
    }
    top_shift_ = 0.5 * b2 * (m.dxi(1.0) - m.dxi(z.q_hat()));
    correction_ = 0.0;
    for (const Segment& s : segs) correction_ += s.m * t_d2xi_integral(m, s.a, s.b);
    correction_ *= 0.5 * b2;
  }

  double phi(double x) const { return eval(0, x); }
  double correction() const { return correction_; }

 private:
  struct Level {
    double sd, m;
  };

  double eval(std::size_t level, double x) const {
    if (level == levels_.size()) return detail::log_cosh(x) + top_shift_;
    const Level& L = levels_[level];
    const std::size_t n = gh_.nodes.size();
    if (L.m == 0.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += gh_.weights[i] * eval(level + 1, x + L.sd * gh_.nodes[i]);
      return acc;
    }
    // (1/m) log E exp(m v). Centred at the mean and written with expm1/log1p
    // so that small m does not amplify round-off by 1/m.
    double vals[512];
    double mean = 0.0;
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = eval(level + 1, x + L.sd * gh_.nodes[i]);
      mean += gh_.weights[i] * vals[i];
    }
    for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, vals[i] - mean);
    if (L.m * spread < 600.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += gh_.weights[i] * std::expm1(L.m * (vals[i] - mean));
      return mean + std::log1p(acc) / L.m;
    }
    double top = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = gh_.log_weights[i] + L.m * vals[i];
      top = std::max(top, vals[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::exp(vals[i] - top);
    return (top + std::log(acc)) / L.m;
  }

  const detail::GaussHermite& gh_;
  std::vector<Level> levels_;
  double top_shift_ = 0.0;
  double correction_ = 0.0;
};

double field_factor(double beta, FieldConvention conv) {
  return conv == FieldConvention::Paper ? beta * beta : 1.0;
}

// Functional value only; used inside the optimizers.
double functional(const Mixture& m, double beta, const RSBMeasure& z, double field, Geometry g,
                  FieldConvention conv, int nodes) {
  if (g == Geometry::Sphere) return crisanti_sommers(m, beta, z, field, conv);
  IsingRecursion r(m, beta, z, nodes);
  return r.phi(field) - r.correction();
}

// ---- measure <-> unconstrained coordinates -------------------------------
// n atoms: n location logits (the gap above the last atom has logit 0) and
// n - 1 weight logits (the last weight has logit 0).

RSBMeasure decode(const std::vector<double>& x, std::size_t n) {
  std::vector<double> gl(x.begin(), x.begin() + static_cast<long>(n));
  gl.push_back(0.0);
  std::vector<double> wl(x.begin() + static_cast<long>(n), x.end());
  wl.push_back(0.0);
  auto softmax = [](std::vector<double> v) {
    const double top = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double& e : v) s += (e = std::exp(e - top));
    for (double& e : v) e /= s;
    return v;
  };
  const auto gaps = softmax(gl);
  auto w = softmax(wl);
  std::vector<double> q(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) q[i] = (acc += gaps[i]);
  // Softmax can underflow a gap; keep the locations strictly increasing.
  for (std::size_t i = 1; i < n; ++i) {
    if (!(q[i] > q[i - 1])) q[i] = std::nextafter(q[i - 1], 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) w[i] = 1e-300;
  }
  if (!(q.back() < 1.0)) throw Error(ErrorCode::SingularMeasure, "decoded atom reached 1");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& e : w) e /= total;
  return RSBMeasure(std::move(q), std::move(w));
}

std::vector<double> encode(const std::vector<double>& q, const std::vector<double>& w) {
  const std::size_t n = q.size();
  std::vector<double> gaps(n + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gaps[i] = std::max(q[i] - prev, 1e-6);
    prev = q[i];
  }
  gaps[n] = std::max(1.0 - prev, 1e-9);
  std::vector<double> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(std::log(gaps[i] / gaps[n]));
  for (std::size_t i = 0; i + 1 < n; ++i) x.push_back(std::log(std::max(w[i], 1e-12) / std::max(w[n - 1], 1e-12)));
  return x;
}

bool lex_less(const RSBMeasure& a, const RSBMeasure& b) {
  return std::lexicographical_compare(a.locations().begin(), a.locations().end(),
                                      b.locations().begin(), b.locations().end());
}

struct Candidate {
  RSBMeasure measure;
  double value;
  bool converged;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value < b.value;
  return lex_less(a.measure, b.measure);
}

// Merges near-coincident atoms and drops negligible weights.
RSBMeasure tidy(const std::vector<double>& q, const std::vector<double>& w) {
  std::vector<double> nq, nw;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (w[i] < 1e-9) continue;
    if (!nq.empty() && q[i] - nq.back() < 1e-9) {
      nw.back() += w[i];
      continue;
    }
    nq.push_back(q[i]);
    nw.push_back(w[i]);
  }
  if (nq.empty()) {
    const auto it = std::max_element(w.begin(), w.end());
    return RSBMeasure::delta(q[static_cast<std::size_t>(it - w.begin())]);
  }
  const double total = std::accumulate(nw.begin(), nw.end(), 0.0);
  for (double& e : nw) e /= total;
  return RSBMeasure(std::move(nq), std::move(nw));
}

class Minimizer {
 public:
  Minimizer(const Mixture& m, double beta, double field, Geometry g, const MinimizeOptions& o)
      : m_(m), beta_(beta), field_(field), g_(g), o_(o) {}

  double value(const RSBMeasure& z, int nodes = 0) {
    ++evaluations_;
    return functional(m_, beta_, z, field_, g_, o_.convention, nodes > 0 ? nodes : o_.hermite_nodes);
  }

  Candidate replica_symmetric() {
    auto f = [&](double q) { return value(RSBMeasure::delta(q)); };
    std::vector<double> grid;
    constexpr int kGrid = 256;
    for (int i = 0; i < kGrid; ++i) grid.push_back(0.5 * (1.0 - std::cos(M_PI * i / kGrid)));
    for (int e = 5; e <= 12; ++e) grid.push_back(1.0 - std::pow(10.0, -e));
    std::sort(grid.begin(), grid.end());
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    const auto best_it = std::min_element(v.begin(), v.end());
    const std::size_t b = static_cast<std::size_t>(best_it - v.begin());
    double q = grid[b];
    double val = v[b];
    const double lo = grid[b == 0 ? 0 : b - 1];
    const double hi = grid[b + 1 == grid.size() ? b : b + 1];
    if (hi > lo) {
      const detail::ScalarMin r = detail::golden_min(f, lo, hi, 1e-15);
      if (r.fx < val) {
        q = r.x;
        val = r.fx;
      }
    }
    if (q != 0.0) {
      const double v0 = v[0];
      if (v0 <= val + kAcceptSlack) {
        q = 0.0;
        val = v0;
      }
    }
    return {RSBMeasure::delta(q), val, true};
  }

  Candidate multi_atom(std::size_t n, const Candidate& prev) {
    auto make_objective = [&](int nodes) {
      return [&, nodes](const std::vector<double>& x) {
        try {
          return value(decode(x, n), nodes);
        } catch (const Error&) {
          return kInf;
        }
      };
    };
    // Nested Ising quadrature costs nodes^levels per evaluation, so the
    // multi-start search runs on a coarser rule; everything after it, and
    // every reported value, uses the full rule.
    const int search_nodes = g_ == Geometry::Ising && n > 2 ? std::min(o_.search_nodes, o_.hermite_nodes)
                                                           : o_.hermite_nodes;
    const auto search = make_objective(search_nodes);
    const auto objective = make_objective(o_.hermite_nodes);

    const auto starts = initial_points(n, prev);
    // Starts run in parallel; each writes its own slot and the reduction below
    // walks them in start order.
    std::vector<Candidate> found(starts.size(), Candidate{RSBMeasure::delta(0.0), kInf, false});
    detail::parallel_for(starts.size(), [&](std::size_t i) {
      const detail::SimplexResult r = detail::nelder_mead(search, starts[i], 0.5, o_.max_iterations);
      const RSBMeasure z = decode(r.x, n);
      found[i] = {z, search_nodes == o_.hermite_nodes ? r.fx : value(z), r.converged};
    });
    std::size_t bi = 0;
    for (std::size_t i = 1; i < found.size(); ++i) {
      if (better(found[i], found[bi])) bi = i;
    }
    Candidate best = found[bi];

    // Coordinate sweeps, then a tighter simplex from the polished point.
    std::vector<double> x = encode(best.measure.locations(), best.measure.weights());
    double fx = objective(x);
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        auto line = [&](double t) {
          std::vector<double> y = x;
          y[i] = t;
          return objective(y);
        };
        const detail::ScalarMin r = detail::golden_min(line, x[i] - 1.0, x[i] + 1.0, 1e-9);
        if (r.fx < fx) {
          x[i] = r.x;
          fx = r.fx;
        }
      }
    }
    const detail::SimplexResult polish = detail::nelder_mead(objective, x, 0.05, o_.max_iterations);
    if (polish.fx < fx) {
      x = polish.x;
      fx = polish.fx;
    }
    if (fx < best.value) best = {decode(x, n), fx, best.converged && polish.converged};

    return simplify(best);
  }

 private:
  std::vector<std::vector<double>> initial_points(std::size_t n, const Candidate& prev) {
    std::vector<std::vector<double>> out;
    const auto& pq = prev.measure.locations();
    const auto& pw = prev.measure.weights();

    // Split the previous solution by inserting one extra atom.
    auto insert = [&](double qn, double wn) {
      std::vector<double> q = pq, w = pw;
      for (double& e : w) e *= (1.0 - wn);
      auto it = std::lower_bound(q.begin(), q.end(), qn);
      const auto pos = it - q.begin();
      q.insert(it, qn);
      w.insert(w.begin() + pos, wn);
      for (std::size_t i = 1; i < q.size(); ++i) q[i] = std::max(q[i], q[i - 1] + 1e-4);
      if (q.back() >= 1.0) return;
      if (q.size() == n) out.push_back(encode(q, w));
    };
    const double top = pq.back();
    insert(top + 0.25 * (1.0 - top), 0.2);
    insert(top + 0.6 * (1.0 - top), 0.1);
    insert(0.5 * pq.front(), 0.3);
    for (std::size_t i = 0; i + 1 < pq.size(); ++i) insert(0.5 * (pq[i] + pq[i + 1]), 0.2);

    // Evenly spread atoms and one-step shapes with most weight at the bottom.
    for (double span : {0.3, 0.6, 0.85}) {
      std::vector<double> q(n), w(n, 1.0 / n);
      for (std::size_t i = 0; i < n; ++i) q[i] = span * static_cast<double>(i + 1) / n;
      out.push_back(encode(q, w));
    }
    for (double qt : {0.2, 0.45, 0.7, 0.9}) {
      std::vector<double> q(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = n == 1 ? qt : 1e-3 + (qt - 1e-3) * static_cast<double>(i) / (n - 1);
        w[i] = i == 0 ? 0.7 : 0.3 / (n - 1);
      }
      out.push_back(encode(q, w));
    }

    // Fill the remainder from a fixed pseudo-random stream.
    RngCursor rng(o_.seed, n);
    const std::size_t dim = 2 * n - 1;
    while (out.size() < static_cast<std::size_t>(o_.starts)) {
      std::vector<double> x(dim);
      for (double& e : x) e = 1.5 * rng.normal();
      out.push_back(std::move(x));
    }
    if (out.size() > static_cast<std::size_t>(o_.starts)) out.resize(o_.starts);
    return out;
  }

  Candidate simplify(Candidate c) {
    bool changed = true;
    while (changed) {
      changed = false;
      const RSBMeasure t = tidy(c.measure.locations(), c.measure.weights());
      if (t.size() != c.measure.size()) {
        const double v = value(t);
        if (v <= c.value + kAcceptSlack) {
          c = {t, std::min(v, c.value), c.converged};
          changed = true;
          continue;
        }
      }
      const auto& q = c.measure.locations();
      const auto& w = c.measure.weights();
      // Drop one atom, handing its weight to a neighbour.
      for (std::size_t i = 0; i < q.size() && q.size() > 1 && !changed; ++i) {
        std::vector<double> nq = q, nw = w;
        const std::size_t to = i == 0 ? 1 : i - 1;
        nw[to] += nw[i];
        nq.erase(nq.begin() + static_cast<long>(i));
        nw.erase(nw.begin() + static_cast<long>(i));
        const RSBMeasure r(nq, nw);
        const double v = value(r);
        if (v <= c.value + kAcceptSlack) {
          c = {r, v, c.converged};
          changed = true;
        }
      }
      if (!changed && q.front() > 0.0) {
        std::vector<double> nq = q;
        nq.front() = 0.0;
        const RSBMeasure r(nq, w);
        const double v = value(r);
        if (v <= c.value + kAcceptSlack) {
          c = {r, v, c.converged};
          changed = true;
        }
      }
    }
    return c;
  }

 public:
  std::atomic<int> evaluations_{0};

 private:
  const Mixture& m_;
  double beta_, field_;
  Geometry g_;
  MinimizeOptions o_;
};

}  // namespace

RSBMeasure::RSBMeasure(std::vector<double> q, std::vector<double> w) : q_(std::move(q)), w_(std::move(w)) {
  if (q_.empty() || q_.size() != w_.size()) {
    throw Error(ErrorCode::InvalidArgument, "measure: need equally many atoms and weights (>= 1)");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (!(q_[i] >= 0.0 && q_[i] < 1.0)) throw Error(ErrorCode::InvalidArgument, "measure: atoms must lie in [0, 1)");
    if (i > 0 && !(q_[i] > q_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "measure: atom locations must be strictly increasing");
    }
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i])) throw Error(ErrorCode::InvalidArgument, "measure: weights must be positive");
    total += w_[i];
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidArgument, "measure: weights must sum to 1");
  }
}

double RSBMeasure::cdf(double t) const noexcept {
  double c = 0.0;
  for (std::size_t i = 0; i < q_.size() && q_[i] <= t; ++i) c += w_[i];
  return t >= q_.back() ? 1.0 : c;
}

double RSBMeasure::phi(double t) const noexcept {
  if (t >= 1.0) return 0.0;
  double acc = 0.0;
  for (const Segment& s : segments(*this)) {
    const double a = std::max(s.a, t);
    if (s.b > a) acc += s.m * (s.b - a);
  }
  return acc;
}

double q_max(const RSBMeasure& zeta) { return zeta.q_hat(); }

double overlap_moment(const RSBMeasure& zeta, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "overlap_moment: p must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) s += zeta.weights()[i] * std::pow(zeta.locations()[i], p);
  return s;
}

double crisanti_sommers(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                        FieldConvention conv) {
  const double b2 = beta * beta;
  const double h2 = field_factor(beta, conv) * field * field;
  const auto segs = segments(zeta);

  double drift = 0.0;
  for (const Segment& s : segs) drift += s.m * (b2 * (m.xi(s.b) - m.xi(s.a)) + h2 * (s.b - s.a));

  // phi is linear on each segment; walk down from phi(q_hat) = 1 - q_hat.
  double inv_phi = 0.0;
  double phi_b = 1.0 - zeta.q_hat();
  if (!(phi_b > 0.0)) throw Error(ErrorCode::SingularMeasure, "q_hat must be < 1");
  for (std::size_t i = segs.size() - 1; i-- > 0;) {
    const Segment& s = segs[i];
    const double rise = s.m * (s.b - s.a);
    if (s.m > 0.0) {
      inv_phi += std::log1p(rise / phi_b) / s.m;
    } else {
      inv_phi += (s.b - s.a) / phi_b;
    }
    phi_b += rise;
  }
  return 0.5 * (drift + inv_phi + std::log1p(-zeta.q_hat()));
}

ParisiSolution parisi_pde_solve(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                                int hermite_nodes) {
  if (hermite_nodes < 2 || hermite_nodes > 512) {
    throw Error(ErrorCode::InvalidArgument, "Hermite node count must lie in [2, 512]");
  }
  const IsingRecursion r(m, beta, zeta, hermite_nodes);
  ParisiSolution s;
  s.phi0 = r.phi(field);
  s.value = s.phi0 - r.correction();
  // Richardson-extrapolated centred difference.
  auto diff = [&](double d) { return (r.phi(field + d) - r.phi(field - d)) / (2.0 * d); };
  s.dphi0 = (4.0 * diff(5e-5) - diff(1e-4)) / 3.0;
  s.measure = zeta;
  s.geometry = Geometry::Ising;
  s.beta = beta;
  s.field = field;
  s.evaluations = 1;
  return s;
}

ParisiSolution parisi_evaluate(const Mixture& m, double beta, const RSBMeasure& zeta, double field,
                               Geometry geometry, FieldConvention conv) {
  if (geometry == Geometry::Ising) return parisi_pde_solve(m, beta, zeta, field);
  ParisiSolution s;
  s.value = crisanti_sommers(m, beta, zeta, field, conv);
  s.phi0 = s.value;
  // d/dh of the field term at fixed zeta: h * factor * int_0^1 cdf = h * factor * phi(0)
  s.dphi0 = field * field_factor(beta, conv) * zeta.phi(0.0);
  s.measure = zeta;
  s.geometry = geometry;
  s.beta = beta;
  s.field = field;
  s.evaluations = 1;
  return s;
}

ParisiSolution minimize_parisi(const Mixture& m, double beta, double field, Geometry geometry,
                               int k_levels, const MinimizeOptions& opts) {
  if (k_levels < 0 || k_levels > kMaxLevels) {
    throw Error(ErrorCode::InvalidArgument, "k_levels must lie in [0, 8]");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta) || !std::isfinite(field)) {
    throw Error(ErrorCode::InvalidArgument, "beta must be finite and >= 0, field finite");
  }
  Minimizer mz(m, beta, field, geometry, opts);
  Candidate best = mz.replica_symmetric();
  for (int k = 1; k <= k_levels; ++k) {
    if (beta == 0.0) break;  // the functional no longer depends on the measure's shape
    const Candidate c = mz.multi_atom(static_cast<std::size_t>(k) + 1, best);
    if (better(c, best)) best = c;
  }
  ParisiSolution s = geometry == Geometry::Ising
                         ? parisi_pde_solve(m, beta, best.measure, field, opts.hermite_nodes)
                         : parisi_evaluate(m, beta, best.measure, field, geometry, opts.convention);
  s.value = best.value;
  s.converged = best.converged;
  s.evaluations = mz.evaluations_.load();
  return s;
}

double beta_c_ising_estimate(const Mixture& m, int k_levels, double tol, Geometry geometry) {
  if (!(tol >= 1e-10)) throw Error(ErrorCode::InvalidArgument, "tol must be >= 1e-10");
  const double total = m.total();
  auto broken = [&](double beta) {
    const ParisiSolution s = minimize_parisi(m, beta, 0.0, geometry, k_levels);
    return s.value < 0.5 * beta * beta * total - tol;
  };
  double lo = 0.0, hi = 4.0;
  if (!broken(hi)) return kInf;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    (broken(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace glasskit
