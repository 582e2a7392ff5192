#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "criteria.hpp"
#include "srf/cascade.hpp"
#include "srf/estimator.hpp"
#include "srf/fitting.hpp"
#include "srf/io.hpp"
#include "srf/models.hpp"

namespace {

using namespace srf;

// ---- shared flag plumbing --------------------------------------------

struct ModelFlags {
  std::string model;
  double b = 2.0;
  double sigma2 = 1.0;
  double lambda = 3.0;
  double beta = 2.0;
  int k = 2;
  double eps = 0.5;
  bool verbatim = false;

  void attach(CLI::App* cmd, bool need_model = true) {
    auto* opt = cmd->add_option(
        "--model", model,
        "model family: lognormal, loggamma, logneginvgamma, chisquare, "
        "evenpower, chisquarek, chisquareeps");
    if (need_model) opt->required();
    cmd->add_option("--b", b, "scaling factor b > 1");
    cmd->add_option("--sigma2", sigma2, "sigma_Y^2 (lognormal)");
    cmd->add_option("--lambda", lambda, "lambda (loggamma families)");
    cmd->add_option("--beta", beta, "beta (loggamma families)");
    cmd->add_option("--k", k, "k (evenpower, chisquarek)");
    cmd->add_option("--eps", eps, "epsilon (chisquareeps)");
    cmd->add_flag("--verbatim", verbatim,
                  "use the published display forms for evenpower/chisquarek");
  }

  ModelSpec spec() const {
    if (model == "lognormal") return ModelSpec::log_normal(b, sigma2);
    if (model == "loggamma") return ModelSpec::log_gamma(b, lambda, beta);
    if (model == "logneginvgamma")
      return ModelSpec::log_neg_inv_gamma(b, lambda, beta);
    if (model == "chisquare") return ModelSpec::chi_square(b);
    if (model == "evenpower") return ModelSpec::even_power(b, k, verbatim);
    if (model == "chisquarek") return ModelSpec::chi_square_k(b, k, verbatim);
    if (model == "chisquareeps") return ModelSpec::chi_square_eps(b, eps);
    throw CLI::ValidationError("--model", "unknown model family: " + model);
  }
};

std::vector<double> parse_q_range(const std::string& text) {
  // start:stop:step, or a single value
  std::vector<double> parts;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ':')) parts.push_back(std::stod(field));
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
    throw std::runtime_error("bad q range (want start:stop:step): " + text);
  std::vector<double> q;
  // start + i * step, not accumulation, so grid points do not drift
  for (int i = 0;; ++i) {
    const double v = parts[0] + i * parts[2];
    if (v > parts[1] + 0.5 * parts[2]) break;
    q.push_back(v);
  }
  return q;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  return file;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// ---- subcommand bodies -------------------------------------------------

int cmd_theory(const ModelFlags& flags, const std::string& q_range,
               const std::string& out_path) {
  const ModelSpec spec = flags.spec();
  const std::vector<double> q = parse_q_range(q_range);
  const auto [curve, spectrum] = evaluate_curves(spec, q);
  std::ofstream file;
  write_curve_csv(open_output(file, out_path), curve, &spectrum);
  return 0;
}

int cmd_validate(const ModelFlags& flags, double C, double gamma, bool json_out) {
  const ModelSpec spec = flags.spec();
  const ValidityReport report = check_conditions(spec, C, gamma);
  if (json_out) {
    ResultDocument doc;
    doc.validity.emplace_back(spec.description(), report);
    doc.config_hash = config_hash_hex(spec.description());
    std::cout << result_document_to_json(doc) << "\n";
  } else {
    std::cout << "model: " << spec.description() << "\n";
    auto print = [](const ConditionCheck& c) {
      std::cout << "  " << (c.passed ? "PASS" : "FAIL") << "  " << c.name
                << "  (required " << c.required << ", actual " << c.actual
                << ")\n";
    };
    for (const auto& c : report.checks) print(c);
    for (const auto& c : report.extensions) {
      std::cout << "  [extension]";
      print(c);
    }
    std::cout << "satisfied: " << (report.satisfied ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_simulate(const ModelFlags& flags, double variance, double gamma,
                 int levels, std::int64_t nside, const std::string& ordering,
                 std::uint64_t seed, const std::string& out_path) {
  if (variance < 0.0) throw std::runtime_error("--variance must be positive");
  ModelFlags adjusted = flags;
  if (flags.model == "lognormal" && variance > 0.0) adjusted.sigma2 = variance;
  const ModelSpec mother = adjusted.spec();

  CascadeConfig config;
  config.mother = mother;
  config.covariance.gamma = gamma;
  config.covariance.variance =
      variance > 0.0 ? variance : expected_mother_variance(mother);
  config.levels = levels;
  config.grid = PixelGrid(nside, ordering == "nested" ? Ordering::Nested
                                                      : Ordering::Ring);
  config.seed = seed;

  const SphericalMap map = simulate_cascade(config);
  if (ends_with(out_path, ".csv")) {
    std::ofstream file;
    write_map_csv(open_output(file, out_path), map);
  } else {
    write_map_file(out_path, map);
  }
  std::cerr << "wrote " << map.values.size() << " pixels to " << out_path
            << "\n";
  return 0;
}

SphericalMap load_map(const std::string& path, const std::string& ordering) {
  if (ends_with(path, ".csv")) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_map_csv(in, ordering == "nested" ? Ordering::Nested
                                                 : Ordering::Ring);
  }
  return read_map_file(path);
}

int cmd_estimate(const std::string& map_path, const std::string& map_ordering,
                 const std::string& window_kind, double cap_theta,
                 double cap_phi, double cap_radius, double cap_area,
                 std::vector<int> group_orders, const std::string& q_range,
                 bool verbatim_alpha, const std::string& shift_mode,
                 const std::string& out_path, const std::string& curve_out) {
  const SphericalMap map = load_map(map_path, map_ordering);
  if (group_orders.empty()) group_orders.push_back(3);
  const int group_order = group_orders.front();
  const DyadicMesh mesh = build_mesh(map.grid, group_order);

  Window window = Window::full_sky();
  if (window_kind == "cap") {
    const SkyCoord center{cap_theta, cap_phi};
    window = cap_area > 0.0 ? Window::cap_of_area(center, cap_area)
                            : Window::cap(center, cap_radius);
  } else if (window_kind != "full") {
    throw std::runtime_error("unknown window kind: " + window_kind);
  }

  // auto: shift only when the support has negative values (CMB-style maps);
  // always: subtract the support minimum as in the published pipeline
  double shift = 0.0;
  if (shift_mode == "always")
    shift = support_minimum(map, mesh, window);
  else if (shift_mode == "auto")
    shift = std::min(0.0, support_minimum(map, mesh, window));
  else if (shift_mode != "never")
    throw std::runtime_error("unknown shift mode: " + shift_mode);
  SphericalMap shifted = map;
  for (double& v : shifted.values) v -= shift;

  const CellMasses masses = cell_masses(shifted, mesh, window);
  const std::vector<double> q = parse_q_range(q_range);
  // one level: the published single-level ratio; several: slope regression
  const RenyiCurve curve =
      group_orders.size() == 1
          ? empirical_T(masses, q)
          : empirical_T_multilevel(shifted, window, group_orders, q);
  const SpectrumCurve spectrum = empirical_spectrum(masses, q, verbatim_alpha);

  ResultDocument doc;
  doc.q = q;
  doc.T = curve.T;
  doc.alpha = spectrum.alpha;
  doc.f = spectrum.f;
  doc.has_estimator = true;
  doc.nside = map.grid.nside();
  doc.group_order = group_order;
  doc.cell_count = mesh.cell_count();
  doc.window.full_sky = window.is_full_sky();
  if (!window.is_full_sky()) {
    doc.window.theta = window.center().theta;
    doc.window.phi = window.center().phi;
    doc.window.radius = window.radius();
  }
  doc.verbatim_alpha = verbatim_alpha;
  doc.shift = shift;

  std::ostringstream canonical;
  canonical << "estimate|nside=" << map.grid.nside() << "|j=";
  for (int j : group_orders) canonical << j << '+';
  canonical << "|window=" << window_kind << "|q=" << q_range
            << "|alpha=" << (verbatim_alpha ? "verbatim" : "base2")
            << "|shift=" << shift;
  for (double v : map.values) canonical << ',' << v;
  doc.config_hash = config_hash_hex(canonical.str());

  std::ofstream file;
  open_output(file, out_path) << result_document_to_json(doc) << "\n";
  if (!curve_out.empty()) {
    std::ofstream curve_file;
    write_curve_csv(open_output(curve_file, curve_out), curve, &spectrum);
  }
  return 0;
}

int cmd_fit(const std::string& curve_path, std::vector<std::string> families,
            bool verbatim, int starts, const std::vector<double>& init,
            const std::string& out_path) {
  ResultDocument doc;
  if (ends_with(curve_path, ".json")) {
    std::ifstream in(curve_path);
    if (!in) throw std::runtime_error("cannot open for reading: " + curve_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    doc = result_document_from_json(buffer.str());
  } else {
    std::ifstream in(curve_path);
    if (!in) throw std::runtime_error("cannot open for reading: " + curve_path);
    const RenyiCurve curve = read_curve_csv(in);
    doc.q = curve.q;
    doc.T = curve.T;
    doc.alpha.assign(curve.q.size(), 0.0);
    doc.f.assign(curve.q.size(), 0.0);
    doc.config_hash = config_hash_hex("fit|" + curve_path);
  }
  RenyiCurve curve;
  curve.q = doc.q;
  curve.T = doc.T;
  curve.provenance = "input " + curve_path;

  if (families.empty())
    families = {"lognormal", "loggamma",  "logneginvgamma",
                "chisquare", "evenpower", "chisquarek"};
  if (!init.empty() && families.size() != 1)
    throw std::runtime_error("--init needs exactly one --family");

  doc.fits.clear();
  std::cout << "family            converged  rmse          params\n";
  for (const auto& name : families) {
    ModelFlags lookup;
    lookup.model = name;
    const ModelFamily family = lookup.spec().family;
    const FitResult fit =
        fit_family(curve, family, verbatim,
                   std::span<const double>(init.data(), init.size()), starts);
    doc.fits.push_back(fit);
    std::ostringstream params;
    for (const auto& [key, value] : fit.params)
      params << key << "=" << value << " ";
    std::printf("%-17s %-9s  %-12.4e  %s\n", name.c_str(),
                fit.converged ? "yes" : "no", fit.rmse, params.str().c_str());
  }
  if (!out_path.empty()) {
    std::ofstream file;
    open_output(file, out_path) << result_document_to_json(doc) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "srf: Renyi functions and multifractal spectra of random fields on "
      "the sphere"};
  app.require_subcommand(1);

  // theory
  auto* theory = app.add_subcommand(
      "theory", "evaluate a model's Renyi function and spectrum to CSV");
  ModelFlags theory_flags;
  theory_flags.attach(theory);
  std::string theory_q = "1:2:0.01";
  std::string theory_out = "-";
  theory->add_option("--q", theory_q, "q grid start:stop:step");
  theory->add_option("--out,-o", theory_out, "output CSV path (- for stdout)");

  // validate
  auto* validate = app.add_subcommand(
      "validate", "check a model's convergence conditions");
  ModelFlags validate_flags;
  validate_flags.attach(validate);
  double validate_C = 1.0, validate_gamma = 1.0;
  bool validate_json = false;
  validate->add_option("--C", validate_C, "covariance bound constant C > 0");
  validate->add_option("--gamma", validate_gamma,
                       "covariance decay rate gamma > 0");
  validate->add_flag("--json", validate_json, "emit a result document");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "synthesize a finite-product cascade map");
  ModelFlags simulate_flags;
  simulate_flags.attach(simulate);
  double sim_variance = 0.0, sim_gamma = 1.0;
  int sim_levels = 40;
  std::int64_t sim_nside = 16;
  std::string sim_ordering = "ring";
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  simulate->add_option("--variance", sim_variance,
                       "mother Gaussian variance (lognormal sigma_Y^2); "
                       "defaults to the family's expected variance");
  simulate->add_option("--gamma", sim_gamma, "covariance decay rate");
  simulate->add_option("--levels", sim_levels,
                       "cascade levels (levels+1 factors)");
  simulate->add_option("--nside", sim_nside, "HEALPix nside (power of two)");
  simulate->add_option("--ordering", sim_ordering, "ring or nested");
  simulate->add_option("--seed", sim_seed, "random seed");
  simulate->add_option("--out,-o", sim_out, "output map (.srfm or .csv)")
      ->required();

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "empirical Renyi function and spectrum of a map");
  std::string est_map, est_map_ordering = "ring", est_window = "full";
  double est_cap_theta = 0.0, est_cap_phi = 0.0, est_cap_radius = 0.0,
         est_cap_area = 0.0;
  std::vector<int> est_group_orders;
  std::string est_q = "1:2:0.01", est_shift = "auto", est_out = "-",
              est_curve_out;
  bool est_verbatim_alpha = false;
  estimate->add_option("--map", est_map, "input map (.srfm or .csv)")
      ->required();
  estimate->add_option("--map-ordering", est_map_ordering,
                       "pixel ordering of CSV input (ring or nested)");
  estimate->add_option("--window", est_window, "full or cap");
  estimate->add_option("--cap-theta", est_cap_theta, "cap center colatitude");
  estimate->add_option("--cap-phi", est_cap_phi, "cap center longitude");
  estimate->add_option("--cap-radius", est_cap_radius, "cap radius (radians)");
  estimate->add_option("--cap-area", est_cap_area,
                       "cap area in steradians (overrides --cap-radius)");
  estimate->add_option("--group-order", est_group_orders,
                       "dyadic group order j (cells of 4^j pixels); give "
                       "several for a multi-level slope regression");
  estimate->add_option("--q", est_q, "q grid start:stop:step");
  estimate->add_flag("--verbatim-alpha", est_verbatim_alpha,
                     "use the published mixed-base alpha estimator");
  estimate->add_option("--shift", est_shift,
                       "min-subtraction mode: auto, always, never");
  estimate->add_option("--out,-o", est_out, "result document path (JSON)");
  estimate->add_option("--curve-out", est_curve_out, "also write a CSV curve");

  // fit
  auto* fit = app.add_subcommand(
      "fit", "fit model families to an empirical Renyi curve");
  std::string fit_curve, fit_out;
  std::vector<std::string> fit_families;
  bool fit_verbatim = false;
  int fit_starts = 8;
  std::vector<double> fit_init;
  fit->add_option("--curve", fit_curve,
                  "input curve (result .json or q,T .csv)")
      ->required();
  fit->add_option("--family", fit_families,
                  "families to fit (repeatable; default: all six)");
  fit->add_flag("--verbatim", fit_verbatim,
                "fit the published display forms for evenpower/chisquarek");
  fit->add_option("--starts", fit_starts, "multi-start count");
  fit->add_option("--init", fit_init,
                  "initial reparameterized values (single family only)");
  fit->add_option("--out,-o", fit_out, "write fits as a result document");

  // selftest
  auto* selftest = app.add_subcommand(
      "selftest", "run the acceptance suite (one line per criterion)");
  std::vector<int> selftest_only;
  selftest->add_option("--criterion", selftest_only,
                       "run only these criterion numbers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory->parsed())
      return cmd_theory(theory_flags, theory_q, theory_out);
    if (validate->parsed())
      return cmd_validate(validate_flags, validate_C, validate_gamma,
                          validate_json);
    if (simulate->parsed())
      return cmd_simulate(simulate_flags, sim_variance, sim_gamma, sim_levels,
                          sim_nside, sim_ordering, sim_seed, sim_out);
    if (estimate->parsed())
      return cmd_estimate(est_map, est_map_ordering, est_window, est_cap_theta,
                          est_cap_phi, est_cap_radius, est_cap_area,
                          est_group_orders, est_q, est_verbatim_alpha,
                          est_shift, est_out, est_curve_out);
    if (fit->parsed())
      return cmd_fit(fit_curve, fit_families, fit_verbatim, fit_starts,
                     fit_init, fit_out);
    if (selftest->parsed())
      return srf::acceptance::run_and_print(selftest_only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
