#include "glasskit/glasskit.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <new>
#include <string>

#include "glasskit/error.hpp"
#include "glasskit/franz_parisi.hpp"
#include "glasskit/mixture.hpp"
#include "glasskit/mixture_io.hpp"
#include "glasskit/montecarlo.hpp"
#include "glasskit/parisi.hpp"
#include "glasskit/thresholds.hpp"

struct gk_mixture {
  glasskit::Mixture m;
  std::string id;
};

struct gk_fp_curve {
  glasskit::FPCurve curve;
};

struct gk_instance {
  glasskit::DisorderInstance inst;
};

namespace {

using glasskit::Error;
using glasskit::ErrorCode;

thread_local std::string t_last_error;

gk_status fail(gk_status s, const std::string& msg) {
  t_last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
gk_status guarded(F&& body) {
  try {
    body();
    return GK_OK;
  } catch (const Error& e) {
    return fail(static_cast<gk_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GK_ERR_TOO_LARGE, "out of memory");
  } catch (const std::exception& e) {
    return fail(GK_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GK_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

glasskit::Geometry geometry(gk_geometry g) {
  switch (g) {
    case GK_SPHERE: return glasskit::Geometry::Sphere;
    case GK_ISING: return glasskit::Geometry::Ising;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown geometry");
}

glasskit::FPMethod method(gk_fp_method m) {
  switch (m) {
    case GK_FP_ANNEALED: return glasskit::FPMethod::Annealed;
    case GK_FP_RS: return glasskit::FPMethod::RSAnsatz;
    case GK_FP_DUALITY: return glasskit::FPMethod::Duality;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Franz-Parisi method");
}

glasskit::FieldConvention convention(gk_convention c) {
  switch (c) {
    case GK_FIELD_PAPER: return glasskit::FieldConvention::Paper;
    case GK_FIELD_INDEPENDENT: return glasskit::FieldConvention::Independent;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown field convention");
}

void fill(const glasskit::ParisiSolution& s, gk_parisi_result* out) {
  *out = gk_parisi_result{};
  out->value = s.value;
  out->phi0 = s.phi0;
  out->dphi0 = s.dphi0;
  out->atoms = std::min<std::size_t>(s.measure.size(), GK_MAX_ATOMS);
  for (std::size_t i = 0; i < out->atoms; ++i) {
    out->q[i] = s.measure.locations()[i];
    out->w[i] = s.measure.weights()[i];
  }
  out->converged = s.converged ? 1 : 0;
  out->evaluations = s.evaluations;
}

glasskit::SpinConfiguration ising_config(const double* sigma, std::size_t n) {
  require(sigma != nullptr, "configuration pointer is null");
  glasskit::SpinConfiguration s;
  s.values.assign(sigma, sigma + n);
  return s;
}

}  // namespace

extern "C" {

const char* gk_version(void) { return GLASSKIT_VERSION; }

const char* gk_last_error(void) { return t_last_error.c_str(); }

const char* gk_status_name(gk_status status) {
  if (status == GK_OK) return "Ok";
  if (status == GK_ERR_INTERNAL) return "Internal";
  if (status >= GK_ERR_INVALID_MIXTURE && status <= GK_ERR_INVALID_ARGUMENT) {
    return glasskit::to_string(static_cast<ErrorCode>(static_cast<int>(status)));
  }
  return "Unknown";
}

gk_status gk_mixture_create(const int* degrees, const double* gamma_sq, size_t count, int normalize,
                            gk_mixture** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    require(count == 0 || (degrees != nullptr && gamma_sq != nullptr), "coefficient arrays are null");
    std::map<int, double> sq;
    for (size_t i = 0; i < count; ++i) {
      if (sq.count(degrees[i])) throw Error(ErrorCode::InvalidMixture, "duplicate degree " + std::to_string(degrees[i]));
      sq[degrees[i]] = gamma_sq[i];
    }
    glasskit::Mixture m = glasskit::Mixture::from_squared(sq);
    if (normalize) {
      std::map<int, double> g = m.gammas();
      m = glasskit::normalize(g).mixture;
    }
    *out = new gk_mixture{std::move(m), ""};
  });
}

gk_status gk_mixture_load(const char* path, gk_mixture** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    glasskit::MixtureFile f = glasskit::load_mixture_file(path);
    *out = new gk_mixture{std::move(f.mixture), std::move(f.id)};
  });
}

void gk_mixture_free(gk_mixture* m) { delete m; }

gk_status gk_mixture_perturb(const gk_mixture* m, int p, double eps, gk_mixture** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = new gk_mixture{glasskit::perturb(m->m, p, eps), m->id};
  });
}

const char* gk_mixture_id(const gk_mixture* m) { return m ? m->id.c_str() : ""; }

gk_status gk_mixture_coefficients(const gk_mixture* m, int* degrees, double* gamma_sq, size_t capacity,
                                  size_t* count) {
  return guarded([&] {
    require(m != nullptr && count != nullptr, "null argument");
    const std::vector<int> ks = m->m.degrees();
    *count = ks.size();
    for (size_t i = 0; i < std::min(capacity, ks.size()); ++i) {
      if (degrees) degrees[i] = ks[i];
      if (gamma_sq) gamma_sq[i] = m->m.gamma_sq(ks[i]);
    }
  });
}

gk_status gk_mixture_xi(const gk_mixture* m, double q, int order, double* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = glasskit::xi_eval(m->m, q, order);
  });
}

gk_status gk_entropy(gk_geometry g, double q, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = glasskit::entropy(geometry(g), q);
  });
}

gk_status gk_thresholds(const gk_mixture* m, gk_threshold_report* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    const glasskit::ThresholdReport r = glasskit::classify_transition(m->m);
    *out = gk_threshold_report{};
    out->beta_cont = r.beta_cont;
    out->beta_c = r.beta_c;
    out->beta_dis = r.beta_dis;
    out->beta_bar_d = r.beta_bar_d;
    out->beta_d = r.beta_d;
    out->transition = static_cast<gk_transition>(static_cast<int>(r.transition));
    out->has_q_c = r.q_c.has_value();
    out->q_c = r.q_c.value_or(NAN);
    out->beta_c_at_boundary = r.beta_c_at_boundary;
    out->beta_bar_d_at_boundary = r.beta_bar_d_at_boundary;
  });
}

gk_status gk_shattering_windows(const gk_mixture* m, double beta, gk_window* windows, size_t capacity,
                                size_t* count) {
  return guarded([&] {
    require(m != nullptr && count != nullptr, "null argument");
    const auto ws = glasskit::shattering_windows(m->m, beta);
    *count = ws.size();
    for (size_t i = 0; windows && i < std::min(capacity, ws.size()); ++i) {
      windows[i] = gk_window{ws[i].lo, ws[i].hi, ws[i].degenerate ? 1 : 0};
    }
  });
}

gk_status gk_construct_continuous_shattering(int p, double* lo, double* hi) {
  return guarded([&] {
    require(lo != nullptr && hi != nullptr, "null argument");
    const auto r = glasskit::construct_continuous_shattering(p);
    *lo = r.lo;
    *hi = r.hi;
  });
}

void gk_parisi_default_options(gk_parisi_options* opts) {
  if (!opts) return;
  const glasskit::MinimizeOptions d;
  opts->starts = d.starts;
  opts->max_iterations = d.max_iterations;
  opts->seed = d.seed;
  opts->convention = d.convention == glasskit::FieldConvention::Paper ? GK_FIELD_PAPER : GK_FIELD_INDEPENDENT;
  opts->hermite_nodes = d.hermite_nodes;
}

gk_status gk_parisi_minimize(const gk_mixture* m, double beta, double field, gk_geometry g, int k_levels,
                             const gk_parisi_options* opts, gk_parisi_result* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    glasskit::MinimizeOptions o;
    if (opts) {
      o.starts = opts->starts;
      o.max_iterations = opts->max_iterations;
      o.seed = opts->seed;
      o.convention = convention(opts->convention);
      o.hermite_nodes = opts->hermite_nodes;
    }
    fill(glasskit::minimize_parisi(m->m, beta, field, geometry(g), k_levels, o), out);
  });
}

gk_status gk_parisi_evaluate(const gk_mixture* m, double beta, const double* q, const double* w, size_t atoms,
                             double field, gk_geometry g, gk_convention conv, gk_parisi_result* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr && q != nullptr && w != nullptr, "null argument");
    glasskit::RSBMeasure zeta(std::vector<double>(q, q + atoms), std::vector<double>(w, w + atoms));
    fill(glasskit::parisi_evaluate(m->m, beta, zeta, field, geometry(g), convention(conv)), out);
  });
}

gk_status gk_beta_c_estimate(const gk_mixture* m, int k_levels, gk_geometry g, double* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = glasskit::beta_c_ising_estimate(m->m, k_levels, 1e-9, geometry(g));
  });
}

gk_status gk_fp_check_beta(const gk_mixture* m, double beta, gk_geometry g, int k_levels) {
  return guarded([&] {
    require(m != nullptr, "null argument");
    glasskit::require_below_beta_c(m->m, beta, geometry(g), std::max(k_levels, 1));
  });
}

gk_status gk_fp_value(const gk_mixture* m, double beta, double q, gk_geometry g, gk_fp_method meth, int k_levels,
                      double* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    switch (method(meth)) {
      case glasskit::FPMethod::Annealed: *out = glasskit::fp_annealed_bound(m->m, beta, q, geometry(g)); break;
      case glasskit::FPMethod::RSAnsatz:
        require(g == GK_ISING, "the RS-ansatz bound is defined for the Ising geometry only");
        *out = glasskit::fp_rs_bound(m->m, beta, q);
        break;
      case glasskit::FPMethod::Duality: *out = glasskit::fp_duality(m->m, beta, q, geometry(g), k_levels); break;
    }
  });
}

gk_status gk_fp_curve_compute(const gk_mixture* m, double beta, gk_geometry g, gk_fp_method meth, int n_points,
                              int k_levels, gk_fp_curve** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = new gk_fp_curve{glasskit::fp_curve(m->m, beta, geometry(g), method(meth), n_points, k_levels)};
  });
}

void gk_fp_curve_free(gk_fp_curve* c) { delete c; }

size_t gk_fp_curve_size(const gk_fp_curve* c) { return c ? c->curve.grid.size() : 0; }

gk_status gk_fp_curve_point(const gk_fp_curve* c, size_t i, double* q, double* value) {
  return guarded([&] {
    require(c != nullptr && q != nullptr && value != nullptr, "null argument");
    if (i >= c->curve.grid.size()) throw Error(ErrorCode::InvalidArgument, "curve index out of range");
    *q = c->curve.grid[i].q;
    *value = c->curve.grid[i].value;
  });
}

double gk_fp_curve_free_energy(const gk_fp_curve* c) { return c ? c->curve.free_energy : NAN; }

gk_status gk_fp_classify(const gk_fp_curve* c, gk_shattering_report* out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const glasskit::ShatteringReport r = glasskit::classify_shattering(c->curve);
    *out = gk_shattering_report{};
    out->shattered = r.shattered;
    out->has_certificate = r.q1.has_value();
    out->q1 = r.q1.value_or(NAN);
    out->q2 = r.q2.value_or(NAN);
    out->q_lo_bar = r.q_lo_bar.value_or(NAN);
    out->q_hi_bar = r.q_hi_bar.value_or(NAN);
    out->certificate_gap = r.certificate_gap.value_or(NAN);
    out->matches_free_energy_at_zero = r.matches_free_energy_at_zero;
    out->below_free_energy = r.below_free_energy;
    out->has_increasing_window = r.has_increasing_window;
  });
}

gk_status gk_legendre_check(const gk_mixture* m, double beta, double field, gk_geometry g, int k_levels, double* lhs,
                            double* rhs) {
  return guarded([&] {
    require(m != nullptr && lhs != nullptr && rhs != nullptr, "null argument");
    const glasskit::LegendreCheck r = glasskit::legendre_check(m->m, beta, field, geometry(g), k_levels);
    *lhs = r.lhs;
    *rhs = r.rhs;
  });
}

gk_status gk_instance_sample(const gk_mixture* m, int n, uint64_t seed, int plant, double plant_beta,
                             uint64_t center_seed, gk_instance** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    std::optional<glasskit::PlantSpec> spec;
    if (plant) spec = glasskit::PlantSpec{plant_beta, center_seed};
    *out = new gk_instance{glasskit::sample_disorder(m->m, n, seed, spec)};
  });
}

void gk_instance_free(gk_instance* inst) { delete inst; }

int gk_instance_size(const gk_instance* inst) { return inst ? inst->inst.n : 0; }

gk_status gk_instance_planted_center(const gk_instance* inst, double* sigma, size_t n) {
  return guarded([&] {
    require(inst != nullptr && sigma != nullptr, "null argument");
    require(inst->inst.planted_center.has_value(), "instance is not planted");
    if (n != static_cast<size_t>(inst->inst.n)) throw Error(ErrorCode::Shape, "buffer length differs from N");
    std::copy(inst->inst.planted_center->values.begin(), inst->inst.planted_center->values.end(), sigma);
  });
}

gk_status gk_hamiltonian(const gk_instance* inst, const double* sigma, size_t n, double* out) {
  return guarded([&] {
    require(inst != nullptr && out != nullptr, "null argument");
    *out = glasskit::hamiltonian(inst->inst, ising_config(sigma, n));
  });
}

gk_status gk_log_partition(const gk_instance* inst, double beta, double* out) {
  return guarded([&] {
    require(inst != nullptr && out != nullptr, "null argument");
    *out = glasskit::ExactGibbs(inst->inst, beta).log_partition();
  });
}

gk_status gk_log_likelihood_ratio(const gk_instance* inst, double beta, double* out) {
  return guarded([&] {
    require(inst != nullptr && out != nullptr, "null argument");
    *out = glasskit::log_likelihood_ratio(inst->inst, beta);
  });
}

gk_status gk_overlap_moment(const gk_instance* inst, double beta, int p, double* out) {
  return guarded([&] {
    require(inst != nullptr && out != nullptr, "null argument");
    *out = glasskit::ExactGibbs(inst->inst, beta).overlap_moment(p);
  });
}

gk_status gk_nishimori_check(const gk_mixture* m, int n, double beta, int samples, uint64_t seed,
                             gk_nishimori_stats* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    const glasskit::NishimoriStats s = glasskit::nishimori_check(m->m, n, beta, samples, seed);
    *out = gk_nishimori_stats{s.samples,   s.ks_statistic, s.ks_band, s.mean_01, s.mean_12,
                              s.second_01, s.second_12,    s.se_01,   s.se_12};
  });
}

gk_status gk_glauber_run(const gk_instance* inst, double beta, const double* start, size_t n, uint64_t steps,
                         uint64_t seed, double* overlaps, size_t capacity, size_t* count, uint64_t* flips) {
  return guarded([&] {
    require(inst != nullptr && count != nullptr, "null argument");
    const glasskit::GlauberSummary s = glasskit::glauber_run(inst->inst, beta, ising_config(start, n), steps, seed);
    *count = s.overlaps.size();
    if (overlaps) std::copy_n(s.overlaps.begin(), std::min(capacity, s.overlaps.size()), overlaps);
    if (flips) *flips = s.flips;
  });
}

gk_status gk_rayleigh_quotient(const gk_instance* inst, double beta, const double* sigma0, size_t n, double ramp_lo,
                               double ramp_hi, int samples, uint64_t seed, gk_rayleigh_result* out) {
  return guarded([&] {
    require(inst != nullptr && out != nullptr, "null argument");
    const glasskit::RayleighResult r = glasskit::rayleigh_quotient(inst->inst, beta, ising_config(sigma0, n),
                                                                   glasskit::Ramp{ramp_lo, ramp_hi}, samples, seed);
    *out = gk_rayleigh_result{r.dirichlet, r.variance, r.quotient};
  });
}

}  // extern "C"
