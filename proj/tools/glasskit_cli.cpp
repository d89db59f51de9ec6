// glasskit command-line front end. Talks to the library only through the C
// interface in glasskit.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "glasskit/glasskit.h"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// Thrown for any library failure; carries the status so main() can pick the exit code.
struct Failure {
  gk_status status;
  std::string message;
};

void check(gk_status s, const std::string& context) {
  if (s != GK_OK) throw Failure{s, context + ": " + gk_last_error()};
}

int exit_code_for(gk_status s) {
  switch (s) {
    case GK_ERR_NON_CONVERGENCE:
    case GK_ERR_SINGULAR_MEASURE:
    case GK_ERR_FIELD_RANGE:
    case GK_ERR_RESOLUTION:
    case GK_ERR_EMPTY_INTERVAL:
    case GK_ERR_DEGENERATE_TEST_FUNCTION:
    case GK_ERR_INTERNAL:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

struct MixtureDeleter {
  void operator()(gk_mixture* m) const { gk_mixture_free(m); }
};
struct CurveDeleter {
  void operator()(gk_fp_curve* c) const { gk_fp_curve_free(c); }
};
struct InstanceDeleter {
  void operator()(gk_instance* i) const { gk_instance_free(i); }
};
using MixturePtr = std::unique_ptr<gk_mixture, MixtureDeleter>;
using CurvePtr = std::unique_ptr<gk_fp_curve, CurveDeleter>;
using InstancePtr = std::unique_ptr<gk_instance, InstanceDeleter>;

// ---- formatting ------------------------------------------------------------

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string render(const std::string& comment) const {
    std::ostringstream os;
    os << "# " << comment << "\n";
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a temporary sibling and renames it into place; "-" or empty means stdout.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{GK_ERR_IO, "cannot open " + tmp.string() + " for writing"};
    out << text;
    out.flush();
    if (!out) throw Failure{GK_ERR_IO, "write to " + tmp.string() + " failed"};
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Failure{GK_ERR_IO, "cannot move output into " + target.string()};
  }
}

void progress(const std::string& what, std::size_t i, std::size_t n, const std::string& detail) {
  std::cerr << "[" << what << "] " << i << "/" << n << " " << detail << "\n";
}

// ---- configuration ---------------------------------------------------------

struct Common {
  std::string mixture_path;
  std::string geometry = "sphere";
  std::string output;
  std::string format = "csv";
  int k_levels = 1;
  std::uint64_t seed = 20240917;
};

struct Loaded {
  MixturePtr mixture;
  std::string id;
  std::map<int, double> coefficients;  // gamma_k^2 after normalization
};

Loaded load_mixture(const std::string& path) {
  if (path.empty()) throw Failure{GK_ERR_INVALID_ARGUMENT, "--mixture is required"};
  gk_mixture* raw = nullptr;
  check(gk_mixture_load(path.c_str(), &raw), "mixture file " + path);
  Loaded l{MixturePtr(raw), gk_mixture_id(raw), {}};
  std::size_t count = 0;
  check(gk_mixture_coefficients(raw, nullptr, nullptr, 0, &count), "mixture");
  std::vector<int> deg(count);
  std::vector<double> sq(count);
  check(gk_mixture_coefficients(raw, deg.data(), sq.data(), count, &count), "mixture");
  for (std::size_t i = 0; i < count; ++i) l.coefficients[deg[i]] = sq[i];
  return l;
}

gk_geometry parse_geometry(const std::string& g) { return g == "ising" ? GK_ISING : GK_SPHERE; }

// Canonical description of everything that determines the output.
class ConfigKey {
 public:
  explicit ConfigKey(std::string command) { s_ = command; }
  ConfigKey& add(const std::string& k, const std::string& v) {
    s_ += "|" + k + "=" + v;
    return *this;
  }
  ConfigKey& add(const std::string& k, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return add(k, std::string(buf));
  }
  ConfigKey& add_int(const std::string& k, long long v) { return add(k, std::to_string(v)); }
  ConfigKey& add_mixture(const Loaded& l) {
    for (const auto& [k, v] : l.coefficients) add("g" + std::to_string(k), v);
    return *this;
  }
  std::string hash() const { return hex(fnv1a(s_)); }

 private:
  std::string s_;
};

std::string comment_line(const ConfigKey& key) {
  return std::string("glasskit ") + gk_version() + " config=" + key.hash();
}

json envelope(const std::string& command, const ConfigKey& key, const Loaded* l) {
  json j;
  j["tool"] = "glasskit";
  j["version"] = gk_version();
  j["config_hash"] = key.hash();
  j["command"] = command;
  if (l) {
    json c = json::object();
    for (const auto& [k, v] : l->coefficients) c[std::to_string(k)] = v;
    j["mixture"] = {{"id", l->id}, {"gamma_sq", c}};
  } else {
    j["mixture"] = nullptr;
  }
  return j;
}

std::vector<double> beta_values(const std::optional<double>& beta, const std::vector<double>& range) {
  if (!range.empty()) {
    if (range.size() != 3) throw Failure{GK_ERR_INVALID_ARGUMENT, "--beta-range takes START STOP COUNT"};
    const double count = range[2];
    if (!(count >= 1.0) || count != std::floor(count)) {
      throw Failure{GK_ERR_INVALID_ARGUMENT, "--beta-range COUNT must be a positive integer"};
    }
    const int n = static_cast<int>(count);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? range[0] : range[0] + (range[1] - range[0]) * i / (n - 1);
    return out;
  }
  if (!beta) throw Failure{GK_ERR_INVALID_ARGUMENT, "one of --beta or --beta-range is required"};
  return {*beta};
}

const char* transition_name(gk_transition t) {
  switch (t) {
    case GK_CONTINUOUS: return "continuous";
    case GK_DISCONTINUOUS: return "discontinuous";
    case GK_MARGINAL: return "marginal";
  }
  return "unknown";
}

// ---- subcommands -----------------------------------------------------------

int run_thresholds(const Common& c) {
  Loaded l = load_mixture(c.mixture_path);
  const gk_geometry g = parse_geometry(c.geometry);
  ConfigKey key("thresholds");
  key.add_mixture(l).add("geometry", c.geometry).add_int("k_levels", c.k_levels);

  gk_threshold_report r{};
  check(gk_thresholds(l.mixture.get(), &r), "thresholds");
  double beta_c = r.beta_c;
  double beta_dis = r.beta_dis, beta_bar_d = r.beta_bar_d, beta_d = r.beta_d, q_c = r.has_q_c ? r.q_c : NAN;
  std::string transition = transition_name(r.transition);
  if (g == GK_ISING) {
    // Only the instability threshold carries over; beta_c comes from the k-level minimization.
    std::cerr << "[thresholds] estimating the Ising beta_c with k = " << c.k_levels << "\n";
    check(gk_beta_c_estimate(l.mixture.get(), c.k_levels, GK_ISING, &beta_c), "beta_c estimate");
    beta_dis = beta_bar_d = beta_d = q_c = NAN;
    transition = "";
  }

  if (c.format == "json") {
    json j = envelope("thresholds", key, &l);
    j["result"] = {{"geometry", c.geometry},    {"beta_cont", jnum(r.beta_cont)}, {"beta_c", jnum(beta_c)},
                   {"beta_dis", jnum(beta_dis)}, {"beta_bar_d", jnum(beta_bar_d)}, {"beta_d", jnum(beta_d)},
                   {"transition", transition.empty() ? json(nullptr) : json(transition)},
                   {"q_c", jnum(q_c)}};
    write_output(c.output, j.dump(2) + "\n");
  } else {
    CsvTable t({"mixture_id", "beta_cont", "beta_c", "beta_dis", "beta_bar_d", "beta_d", "transition", "q_c", "geometry"});
    t.row({l.id, num(r.beta_cont), num(beta_c), num(beta_dis), num(beta_bar_d), num(beta_d), transition, num(q_c),
           c.geometry});
    write_output(c.output, t.render(comment_line(key)));
  }
  return kExitOk;
}

int run_parisi(const Common& c, const std::optional<double>& beta, const std::vector<double>& range, double field,
               const std::string& conv) {
  Loaded l = load_mixture(c.mixture_path);
  const gk_geometry g = parse_geometry(c.geometry);
  const std::vector<double> betas = beta_values(beta, range);
  ConfigKey key("parisi");
  key.add_mixture(l).add("geometry", c.geometry).add_int("k_levels", c.k_levels).add("field", field).add("convention", conv)
      .add_int("seed", static_cast<long long>(c.seed));
  for (double b : betas) key.add("beta", b);

  gk_parisi_options opts;
  gk_parisi_default_options(&opts);
  opts.seed = c.seed;
  opts.convention = conv == "independent" ? GK_FIELD_INDEPENDENT : GK_FIELD_PAPER;

  CsvTable t({"beta", "field", "geometry", "k_levels", "value", "annealed", "q_max", "atoms", "weights", "converged",
              "warning"});
  json rows = json::array();
  bool any_warning = false;
  double xi1 = 0.0;
  check(gk_mixture_xi(l.mixture.get(), 1.0, 0, &xi1), "xi(1)");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double b = betas[i];
    if (betas.size() > 1) progress("parisi", i + 1, betas.size(), "beta=" + num(b));
    gk_parisi_result r{};
    check(gk_parisi_minimize(l.mixture.get(), b, field, g, c.k_levels, &opts, &r), "parisi at beta=" + num(b));
    std::string atoms, weights;
    json jatoms = json::array();
    for (std::size_t a = 0; a < r.atoms; ++a) {
      if (a) {
        atoms += ';';
        weights += ';';
      }
      atoms += num(r.q[a]);
      weights += num(r.w[a]);
      jatoms.push_back(json::array({r.q[a], r.w[a]}));
    }
    const double annealed = 0.5 * b * b * xi1;
    const double qmax = r.atoms ? r.q[r.atoms - 1] : 0.0;
    const std::string warning = r.converged ? "" : "non-converged";
    any_warning = any_warning || !r.converged;
    t.row({num(b), num(field), c.geometry, std::to_string(c.k_levels), num(r.value), num(annealed), num(qmax),
           atoms, weights, r.converged ? "true" : "false", warning});
    rows.push_back({{"beta", b},
                    {"value", r.value},
                    {"annealed", annealed},
                    {"q_max", qmax},
                    {"atoms", jatoms},
                    {"converged", static_cast<bool>(r.converged)}});
  }
  if (c.format == "json") {
    json j = envelope("parisi", key, &l);
    j["result"] = {{"geometry", c.geometry}, {"field", field}, {"k_levels", c.k_levels}, {"rows", rows}};
    write_output(c.output, j.dump(2) + "\n");
  } else {
    write_output(c.output, t.render(comment_line(key)));
  }
  if (any_warning) {
    std::cerr << "warning: the minimizer did not converge for at least one beta\n";
    return kExitNumerical;
  }
  return kExitOk;
}

gk_fp_method parse_method(const std::string& m) {
  if (m == "annealed") return GK_FP_ANNEALED;
  if (m == "rs") return GK_FP_RS;
  return GK_FP_DUALITY;
}

json shattering_json(const gk_shattering_report& s) {
  return {{"shattered", static_cast<bool>(s.shattered)},
          {"q1", jnum(s.q1)},
          {"q2", jnum(s.q2)},
          {"q_lo_bar", jnum(s.q_lo_bar)},
          {"q_hi_bar", jnum(s.q_hi_bar)},
          {"certificate_gap", jnum(s.certificate_gap)},
          {"matches_free_energy_at_zero", static_cast<bool>(s.matches_free_energy_at_zero)},
          {"below_free_energy", static_cast<bool>(s.below_free_energy)},
          {"has_increasing_window", static_cast<bool>(s.has_increasing_window)}};
}

int run_fp(const Common& c, double beta, const std::string& method, int points) {
  Loaded l = load_mixture(c.mixture_path);
  const gk_geometry g = parse_geometry(c.geometry);
  ConfigKey key("fp");
  key.add_mixture(l).add("geometry", c.geometry).add("beta", beta).add("method", method).add_int("points", points)
      .add_int("k_levels", c.k_levels);

  check(gk_fp_check_beta(l.mixture.get(), beta, g, c.k_levels), "fp");
  std::cerr << "[fp] " << method << " curve on " << points << " points\n";
  gk_fp_curve* raw = nullptr;
  check(gk_fp_curve_compute(l.mixture.get(), beta, g, parse_method(method), points, c.k_levels, &raw), "fp curve");
  CurvePtr curve(raw);

  json classification;
  gk_shattering_report rep{};
  const gk_status cs = gk_fp_classify(curve.get(), &rep);
  if (cs == GK_OK) {
    classification = shattering_json(rep);
  } else if (cs == GK_ERR_RESOLUTION) {
    classification = {{"shattered", nullptr}, {"reason", gk_last_error()}};
  } else {
    check(cs, "shattering classification");
  }

  const std::size_t n = gk_fp_curve_size(curve.get());
  std::vector<double> qs(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) check(gk_fp_curve_point(curve.get(), i, &qs[i], &vs[i]), "fp curve");

  json doc = envelope("fp", key, &l);
  doc["result"] = {{"geometry", c.geometry},
                   {"beta", beta},
                   {"method", method},
                   {"k_levels", c.k_levels},
                   {"points", static_cast<int>(n)},
                   {"free_energy", gk_fp_curve_free_energy(curve.get())},
                   {"shattering", classification}};
  if (c.format == "json") {
    json grid = json::array();
    for (std::size_t i = 0; i < n; ++i) grid.push_back({qs[i], vs[i]});
    doc["result"]["grid"] = grid;
    write_output(c.output, doc.dump(2) + "\n");
    return kExitOk;
  }
  CsvTable t({"q", "value", "method", "beta", "geometry"});
  for (std::size_t i = 0; i < n; ++i) t.row({num(qs[i]), num(vs[i]), method, num(beta), c.geometry});
  write_output(c.output, t.render(comment_line(key)));
  if (!c.output.empty() && c.output != "-") write_output(c.output + ".json", doc.dump(2) + "\n");
  return kExitOk;
}

int run_scan(const Common& c, const std::vector<double>& range, bool shattering, int points) {
  Loaded l = load_mixture(c.mixture_path);
  const gk_geometry g = parse_geometry(c.geometry);
  const std::vector<double> betas = beta_values(std::nullopt, range);
  ConfigKey key("scan");
  key.add_mixture(l).add("geometry", c.geometry).add_int("k_levels", c.k_levels).add_int("shattering", shattering)
      .add_int("points", points).add_int("seed", static_cast<long long>(c.seed));
  for (double b : betas) key.add("beta", b);

  gk_parisi_options opts;
  gk_parisi_default_options(&opts);
  opts.seed = c.seed;
  if (g == GK_SPHERE) opts.convention = GK_FIELD_INDEPENDENT;
  double xi1 = 0.0;
  check(gk_mixture_xi(l.mixture.get(), 1.0, 0, &xi1), "xi(1)");

  CsvTable t({"beta", "free_energy", "annealed", "q_max", "replica_symmetric", "dynamic_window", "shattered"});
  json rows = json::array();
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double b = betas[i];
    progress("scan", i + 1, betas.size(), "beta=" + num(b));
    gk_parisi_result r{};
    check(gk_parisi_minimize(l.mixture.get(), b, 0.0, g, c.k_levels, &opts, &r), "parisi at beta=" + num(b));
    const double annealed = 0.5 * b * b * xi1;
    const double qmax = r.atoms ? r.q[r.atoms - 1] : 0.0;
    const bool rs = qmax <= 1e-3;

    std::optional<bool> window;
    if (g == GK_SPHERE) {
      std::size_t nw = 0;
      check(gk_shattering_windows(l.mixture.get(), b, nullptr, 0, &nw), "windows");
      window = nw > 0;
    }
    std::optional<bool> shattered;
    if (shattering && gk_fp_check_beta(l.mixture.get(), b, g, c.k_levels) == GK_OK) {
      gk_fp_curve* raw = nullptr;
      check(gk_fp_curve_compute(l.mixture.get(), b, g, GK_FP_DUALITY, points, 0, &raw), "fp curve");
      CurvePtr curve(raw);
      gk_shattering_report rep{};
      if (gk_fp_classify(curve.get(), &rep) == GK_OK) shattered = rep.shattered != 0;
    }
    auto opt_str = [](const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : ""; };
    auto opt_json = [](const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); };
    t.row({num(b), num(r.value), num(annealed), num(qmax), rs ? "true" : "false", opt_str(window), opt_str(shattered)});
    rows.push_back({{"beta", b},
                    {"free_energy", r.value},
                    {"annealed", annealed},
                    {"q_max", qmax},
                    {"replica_symmetric", rs},
                    {"dynamic_window", opt_json(window)},
                    {"shattered", opt_json(shattered)}});
  }
  if (c.format == "json") {
    json j = envelope("scan", key, &l);
    j["result"] = {{"geometry", c.geometry}, {"k_levels", c.k_levels}, {"rows", rows}};
    write_output(c.output, j.dump(2) + "\n");
  } else {
    write_output(c.output, t.render(comment_line(key)));
  }
  return kExitOk;
}

int run_construct(const Common& c, int p, bool format_given) {
  ConfigKey key("construct-example");
  key.add_int("p", p);
  double lo = 0.0, hi = 0.0;
  check(gk_construct_continuous_shattering(p, &lo, &hi), "construct-example p=" + std::to_string(p));
  const double mid = 0.5 * (lo + hi);
  const int degrees[] = {2, p};
  const double sq[] = {0.5, mid};
  gk_mixture* raw = nullptr;
  check(gk_mixture_create(degrees, sq, 2, 0, &raw), "example mixture");
  MixturePtr m(raw);
  gk_threshold_report r{};
  check(gk_thresholds(m.get(), &r), "thresholds");

  // JSON is the natural shape here; CSV only when asked for explicitly.
  if (c.format == "csv" && format_given) {
    CsvTable t({"p", "lo", "hi", "gamma_p_sq", "beta_c", "beta_d", "transition"});
    t.row({std::to_string(p), num(lo), num(hi), num(mid), num(r.beta_c), num(r.beta_d), transition_name(r.transition)});
    write_output(c.output, t.render(comment_line(key)));
    return kExitOk;
  }
  json j = envelope("construct-example", key, nullptr);
  j["result"] = {{"p", p},
                 {"lo", lo},
                 {"hi", hi},
                 {"gamma_p_sq", mid},
                 {"mixture", {{"2", 0.5}, {std::to_string(p), mid}}},
                 {"beta_c", jnum(r.beta_c)},
                 {"beta_d", jnum(r.beta_d)},
                 {"transition", transition_name(r.transition)}};
  write_output(c.output, j.dump(2) + "\n");
  return kExitOk;
}

struct McArgs {
  int n = 12;
  double beta = 0.3;
  int samples = 10;
  bool plant = false;
  int nishimori_samples = 1000;
  double ramp_lo = 0.2;
  double ramp_hi = 0.6;
};

int run_mc(const Common& c, const McArgs& a) {
  Loaded l = load_mixture(c.mixture_path);
  if (a.samples < 1) throw Failure{GK_ERR_INVALID_ARGUMENT, "--samples must be at least 1"};
  ConfigKey key("mc");
  key.add_mixture(l).add_int("n", a.n).add("beta", a.beta).add_int("seed", static_cast<long long>(c.seed))
      .add_int("samples", a.samples).add_int("plant", a.plant).add_int("nishimori_samples", a.nishimori_samples)
      .add("ramp_lo", a.ramp_lo).add("ramp_hi", a.ramp_hi);

  CsvTable t({"seed", "logZ_per_N", "loglr_per_N", "overlap_m2", "ks_stat", "quotient"});
  json rows = json::array();
  for (int s = 0; s < a.samples; ++s) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(s);
    progress("mc", s + 1, a.samples, "seed=" + std::to_string(seed));
    gk_instance* raw = nullptr;
    check(gk_instance_sample(l.mixture.get(), a.n, seed, a.plant, a.beta, seed ^ 0x5eedull, &raw), "sample");
    InstancePtr inst(raw);
    double logz = 0.0, loglr = 0.0, m2 = 0.0;
    check(gk_log_partition(inst.get(), a.beta, &logz), "log partition");
    check(gk_log_likelihood_ratio(inst.get(), a.beta, &loglr), "likelihood ratio");
    check(gk_overlap_moment(inst.get(), a.beta, 2, &m2), "overlap moment");
    gk_nishimori_stats ns{};
    check(gk_nishimori_check(l.mixture.get(), a.n, a.beta, a.nishimori_samples, seed, &ns), "nishimori");

    std::vector<double> center(a.n, 1.0);
    if (a.plant) check(gk_instance_planted_center(inst.get(), center.data(), center.size()), "center");
    gk_rayleigh_result rq{};
    double quotient = NAN;
    const gk_status qs =
        gk_rayleigh_quotient(inst.get(), a.beta, center.data(), center.size(), a.ramp_lo, a.ramp_hi, 0, 0, &rq);
    if (qs == GK_OK) {
      quotient = rq.quotient;
    } else if (qs != GK_ERR_DEGENERATE_TEST_FUNCTION) {
      check(qs, "rayleigh quotient");
    }
    t.row({std::to_string(seed), num(logz / a.n), num(loglr / a.n), num(m2), num(ns.ks_statistic), num(quotient)});
    rows.push_back({{"seed", seed},
                    {"logZ_per_N", logz / a.n},
                    {"loglr_per_N", loglr / a.n},
                    {"overlap_m2", m2},
                    {"ks_stat", ns.ks_statistic},
                    {"quotient", jnum(quotient)}});
  }
  if (c.format == "json") {
    json j = envelope("mc", key, &l);
    j["result"] = {{"n", a.n}, {"beta", a.beta}, {"planted", a.plant}, {"rows", rows}};
    write_output(c.output, j.dump(2) + "\n");
  } else {
    write_output(c.output, t.render(comment_line(key)));
  }
  return kExitOk;
}

void add_common(CLI::App* app, Common& c, bool mixture = true) {
  if (mixture) app->add_option("--mixture", c.mixture_path, "Mixture file (TOML)")->required();
  app->add_option("--output,-o", c.output, "Output path (default: stdout)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_geometry(CLI::App* app, Common& c) {
  app->add_option("--geometry", c.geometry, "sphere or ising")->check(CLI::IsMember({"sphere", "ising"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glasskit: phase diagrams, Parisi free energies and Franz-Parisi potentials of mixed p-spin glasses"};
  app.set_version_flag("--version", std::string("glasskit ") + gk_version());
  app.require_subcommand(1);

  Common c;
  std::optional<double> beta;
  std::vector<double> beta_range;
  double field = 0.0;
  std::string convention = "paper";
  std::string method = "duality";
  int points = 2000;
  int p = 3;
  bool shattering = false;
  McArgs mc;

  auto* th = app.add_subcommand("thresholds", "Critical inverse temperatures and transition type");
  add_common(th, c);
  add_geometry(th, c);
  th->add_option("--k-levels", c.k_levels, "RSB levels for the Ising estimate")->check(CLI::Range(0, 8));

  auto* pa = app.add_subcommand("parisi", "Minimize the Parisi / Crisanti-Sommers functional");
  add_common(pa, c);
  add_geometry(pa, c);
  pa->add_option("--beta", beta, "Inverse temperature");
  pa->add_option("--beta-range", beta_range, "START STOP COUNT")->expected(3);
  pa->add_option("--field", field, "External field h");
  pa->add_option("--convention", convention, "Spherical field convention")->check(CLI::IsMember({"paper", "independent"}));
  pa->add_option("--k-levels", c.k_levels, "RSB levels")->check(CLI::Range(0, 8));
  pa->add_option("--seed", c.seed, "Seed for the multi-start search");

  double fp_beta = 0.0;
  auto* fp = app.add_subcommand("fp", "Franz-Parisi potential or bound on the overlap grid");
  add_common(fp, c);
  add_geometry(fp, c);
  fp->add_option("--beta", fp_beta, "Inverse temperature")->required();
  fp->add_option("--method", method, "annealed, rs or duality")->check(CLI::IsMember({"annealed", "rs", "duality"}));
  fp->add_option("--points", points, "Grid points")->check(CLI::Range(2, 1000000));
  int fp_k = 0;
  fp->add_option("--k-levels", fp_k, "RSB levels for the duality route")->check(CLI::Range(0, 8));

  auto* sc = app.add_subcommand("scan", "Free energy and shattering over a range of beta");
  add_common(sc, c);
  add_geometry(sc, c);
  sc->add_option("--beta-range", beta_range, "START STOP COUNT")->expected(3)->required();
  sc->add_option("--k-levels", c.k_levels, "RSB levels")->check(CLI::Range(0, 8));
  sc->add_flag("--shattering", shattering, "Also classify the duality FP curve (slow)");
  sc->add_option("--points", points, "FP grid points for --shattering")->check(CLI::Range(2, 1000000));
  sc->add_option("--seed", c.seed, "Seed for the multi-start search");

  auto* ce = app.add_subcommand("construct-example", "Continuous-RSB mixture that still shatters");
  add_common(ce, c, false);
  ce->add_option("--p", p, "Degree of the second term")->check(CLI::Range(3, 32));

  auto* mcc = app.add_subcommand("mc", "Exact-enumeration Monte Carlo checks (Ising)");
  add_common(mcc, c);
  mcc->add_option("--n", mc.n, "Number of spins")->check(CLI::Range(2, 24));
  mcc->add_option("--beta", mc.beta, "Inverse temperature");
  mcc->add_option("--seed", c.seed, "First seed");
  mcc->add_option("--samples", mc.samples, "Number of seeds (rows)");
  mcc->add_flag("--plant", mc.plant, "Use planted instances");
  mcc->add_option("--nishimori-samples", mc.nishimori_samples, "Instances per Nishimori test");
  mcc->add_option("--ramp-lo", mc.ramp_lo, "Test function ramp start");
  mcc->add_option("--ramp-hi", mc.ramp_hi, "Test function ramp end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*th) return run_thresholds(c);
    if (*pa) return run_parisi(c, beta, beta_range, field, convention);
    if (*fp) {
      c.k_levels = fp_k;
      return run_fp(c, fp_beta, method, points);
    }
    if (*sc) return run_scan(c, beta_range, shattering, points);
    if (*ce) return run_construct(c, p, ce->count("--format") > 0);
    if (*mcc) return run_mc(c, mc);
  } catch (const Failure& f) {
    std::cerr << "error [" << gk_status_name(f.status) << "]: " << f.message << "\n";
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
