#include "numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace glasskit::detail {

std::vector<double> boundary_grid(std::size_t n) {
  n = std::max<std::size_t>(n, 64);
  const std::size_t n_edge = n / 4;
  const std::size_t n_mid = n - 2 * n_edge;
  std::vector<double> g;
  g.reserve(n);
  // log-spaced 1e-9 .. 1e-2
  for (std::size_t i = 0; i < n_edge; ++i) {
    const double e = -9.0 + 7.0 * static_cast<double>(i) / static_cast<double>(n_edge);
    g.push_back(std::pow(10.0, e));
  }
  for (std::size_t i = 0; i < n_mid; ++i) {
    g.push_back(1e-2 + 0.98 * static_cast<double>(i) / static_cast<double>(n_mid));
  }
  for (std::size_t i = 0; i <= n_edge; ++i) {
    const double e = -2.0 - 7.0 * static_cast<double>(i) / static_cast<double>(n_edge);
    g.push_back(1.0 - std::pow(10.0, e));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

ScalarMin golden_min(const std::function<double(double)>& f, double a, double b, double tol,
                     int max_iter) {
  constexpr double r = 0.6180339887498949;
  if (a > b) std::swap(a, b);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

ScalarMin grid_min(const std::function<double(double)>& f, const std::vector<double>& grid,
                   double tol) {
  const std::size_t n = grid.size();
  std::vector<double> v(n);
  parallel_for(n, [&](std::size_t i) { v[i] = f(grid[i]); });

  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || v[i] <= v[i - 1];
    const bool right = i + 1 == n || v[i] <= v[i + 1];
    if (left && right && std::isfinite(v[i])) cand.push_back(i);
  }
  // A noisy plateau can produce many ties; refining the best few is enough.
  std::stable_sort(cand.begin(), cand.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  if (cand.size() > 8) cand.resize(8);

  ScalarMin best{grid.empty() ? 0.0 : grid[0], INFINITY};
  for (std::size_t i : cand) {
    if (v[i] < best.fx) best = {grid[i], v[i]};
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[i + 1 == n ? n - 1 : i + 1];
    if (b <= a) continue;
    const ScalarMin r = golden_min(f, a, b, tol * std::max(1.0, std::abs(grid[i])));
    if (r.fx < best.fx) best = r;
  }
  return best;
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol,
              int max_iter) {
  double fa = f(a);
  if (fa == 0.0) return a;
  const double fb = f(b);
  if (fb == 0.0) return b;
  for (int it = 0; it < max_iter && std::abs(b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_iter, double ftol,
                          double xtol) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> s(d + 1, x0);
  std::vector<double> fs(d + 1);
  for (std::size_t i = 0; i < d; ++i) s[i + 1][i] += step;
  for (std::size_t i = 0; i <= d; ++i) fs[i] = f(s[i]);

  std::vector<std::size_t> idx(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = idx.front();
    const std::size_t worst = idx.back();
    const std::size_t second = idx[d >= 1 ? d - 1 : 0];

    double spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j < d; ++j) spread = std::max(spread, std::abs(s[i][j] - s[best][j]));
    }
    if (std::abs(fs[worst] - fs[best]) <= ftol * (1.0 + std::abs(fs[best])) && spread <= xtol) {
      converged = true;
      break;
    }
    if (std::abs(fs[worst] - fs[best]) <= 0.1 * ftol && spread <= 1e3 * xtol) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += s[i][j] / static_cast<double>(d);
    }
    for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + (centroid[j] - s[worst][j]);
    const double fr = f(xr);
    if (fr < fs[best]) {
      for (std::size_t j = 0; j < d; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - s[worst][j]);
      const double fe = f(xe);
      if (fe < fr) {
        s[worst] = xe;
        fs[worst] = fe;
      } else {
        s[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    for (std::size_t j = 0; j < d; ++j) {
      xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j])
                      : centroid[j] + 0.5 * (s[worst][j] - centroid[j]);
    }
    const double fc = f(xc);
    if (fc < (outside ? fr : fs[worst])) {
      s[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) s[i][j] = s[best][j] + 0.5 * (s[i][j] - s[best][j]);
      fs[i] = f(s[i]);
    }
  }
  const auto b = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  return {s[b], fs[b], it, converged};
}

namespace {

GaussHermite build_gauss_hermite(int n) {
  // Newton iteration on orthonormal Hermite polynomials (weight e^{-x^2}),
  // then rescaled to the standard normal.
  constexpr double kPiM4 = 0.7511255444649425;  // pi^{-1/4}
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  double z = 0.0;
  double pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    for (int it = 0; it < 100; ++it) {
      double p1 = kPiM4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  GaussHermite gh;
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  for (int i = n - 1; i >= 0; --i) {
    gh.nodes.push_back(std::sqrt(2.0) * x[i]);
    gh.weights.push_back(w[i] * inv_sqrt_pi);
  }
  const double total = std::accumulate(gh.weights.begin(), gh.weights.end(), 0.0);
  for (double& v : gh.weights) v /= total;
  for (double v : gh.weights) gh.log_weights.push_back(std::log(v));
  return gh;
}

}  // namespace

const GaussHermite& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_hermite(n)).first;
  return it->second;
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

unsigned thread_count() {
  if (const char* env = std::getenv("GLASSKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {
// Nested parallel_for calls run serially on the calling worker.
thread_local bool t_in_parallel = false;
}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || t_in_parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    const bool outer = t_in_parallel;
    t_in_parallel = true;
    struct Reset {
      bool v;
      ~Reset() { t_in_parallel = v; }
    } reset{outer};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace glasskit::detail
