#include "deconv/deconv.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

deconv::TestDensity density_from_json(const json& j)
{
  const std::string type = j.at("type").get<std::string>();
  if (type == "generalized_cauchy")
    return deconv::TestDensity::generalized_cauchy(j.at("s").get<double>());
  if (type == "gaussian")
    return deconv::TestDensity::gaussian(j.at("mu").get<double>(), j.at("sigma").get<double>());
  if (type == "uniform")
    return deconv::TestDensity::uniform_bump(j.at("a").get<double>(), j.at("b").get<double>());
  if (type == "mixture") {
    std::vector<std::pair<double, deconv::TestDensity>> comps;
    for (const auto& c : j.at("components"))
      comps.emplace_back(c.at("weight").get<double>(), density_from_json(c.at("density")));
    return deconv::TestDensity::mixture(std::move(comps));
  }
  throw std::invalid_argument("unknown density type: " + type);
}

deconv::EstimationMode mode_from_json(const json& j)
{
  if (j.size() != 1)
    throw std::invalid_argument("mode: expected exactly one of fixed | minimax | adaptive");
  if (j.contains("fixed")) {
    deconv::TuningPair tau;
    tau.bandwidth = j["fixed"].at("h").get<double>();
    tau.cutoff = j["fixed"].at("N").get<int>();
    return deconv::FixedMode{tau};
  }
  if (j.contains("minimax")) {
    const auto& mm = j["minimax"];
    deconv::ClassParams params{mm.at("alpha").get<double>(), mm.at("q").get<double>(),
                               mm.value("A", 1.0), mm.value("B", 1.0)};
    return deconv::MinimaxMode{params};
  }
  if (j.contains("adaptive")) {
    std::optional<double> kappa;
    if (j["adaptive"].contains("kappa") && !j["adaptive"]["kappa"].is_null())
      kappa = j["adaptive"]["kappa"].get<double>();
    return deconv::AdaptiveMode{kappa};
  }
  throw std::invalid_argument("mode: expected one of fixed | minimax | adaptive");
}

int run_rates(double alpha, double q, int m, double theta, double A, double B, std::uint64_t n)
{
  const auto [r, nu] = deconv::rate_exponents(alpha, q, m);
  deconv::ClassParams params{alpha, q, A, B};
  const auto tau = deconv::minimax_params(n, params, m, theta);
  json out = {{"r", r},
              {"nu", nu},
              {"h_star", tau.bandwidth},
              {"N_star", tau.cutoff},
              {"phi_n", deconv::rate_phi(n, params, m)},
              {"psi_n", deconv::rate_holder(n, alpha, m, A)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_grids(std::uint64_t n, int m, double theta)
{
  const auto grid = deconv::default_grids(n, m, theta);
  json out = {{"bandwidths", grid.bandwidths},
              {"cutoffs", grid.cutoffs},
              {"M_h", grid.bandwidths.size() - 1},
              {"N_max", grid.cutoffs.back()}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_estimate(const std::string& in_path,
                 const std::string& error_spec,
                 double x0,
                 int kernel_order,
                 const std::string& mode,
                 std::optional<double> h,
                 std::optional<int> N,
                 std::optional<double> kappa)
{
  const auto model = deconv::parse_error_model(error_spec);
  const auto sample = deconv::read_sample_file(in_path);
  const deconv::SmoothKernel kernel(kernel_order);
  json out = {{"x0", x0},
              {"n", sample.size()},
              {"error", deconv::format_error_model(model)},
              {"mode", mode}};
  if (mode == "fixed") {
    if (!h || !N)
      throw std::invalid_argument("estimate --mode fixed requires --h and --N");
    deconv::TuningPair tau{*h, *N, {}};
    out["estimate"] = deconv::estimate_point(sample, x0, model, kernel, tau);
    out["h"] = *h;
    out["N"] = *N;
  } else if (mode == "adaptive") {
    const double half = model.family == deconv::ErrorFamily::uniform_conv ? model.half_width : 0.5;
    const auto grid = deconv::default_grids(sample.size(), model.multiplicity, half);
    const auto res = deconv::select_adaptive(sample, x0, model, kernel, grid, kappa);
    out["estimate"] = res.estimate;
    out["h"] = res.selected.bandwidth;
    out["N"] = res.selected.cutoff;
    out["kappa"] = res.trace.kappa;
    json trace = json::array();
    for (const auto& rec : res.trace.records)
      trace.push_back({{"h", rec.bandwidth},
                       {"N", rec.cutoff},
                       {"sigma_hat", rec.sigma_hat},
                       {"u", rec.envelope},
                       {"lambda_hat", rec.lambda_hat},
                       {"risk_proxy", rec.risk_proxy}});
    out["trace"] = std::move(trace);
  } else {
    throw std::invalid_argument("estimate: --mode must be fixed or adaptive");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_simulate(const std::string& config_path,
                 std::uint64_t seed,
                 int threads,
                 std::optional<std::string> out_override)
{
  std::ifstream in(config_path);
  if (!in)
    throw std::invalid_argument("cannot open config: " + config_path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed config JSON: " + std::string(e.what()));
  }

  deconv::ExperimentPlan plan{.density = density_from_json(cfg.at("density")),
                              .error = deconv::parse_error_model(cfg.at("error").get<std::string>()),
                              .mode = mode_from_json(cfg.at("mode"))};
  plan.x0 = cfg.value("x0", 0.5);
  plan.sample_sizes = cfg.at("n_list").get<std::vector<std::size_t>>();
  plan.trials = cfg.at("trials").get<std::size_t>();
  plan.kernel_order = cfg.value("k", 5);
  plan.seed = seed; // the --seed flag wins over any config value
  plan.threads = threads;
  plan.out = out_override ? *out_override : cfg.value("out", std::string("risk.csv"));

  const auto report = deconv::monte_carlo_risk(plan);
  std::ofstream os(plan.out, std::ios::binary);
  if (!os)
    throw std::invalid_argument("cannot open output path: " + plan.out);
  deconv::write_csv(report, os);
  os.close();

  json summary = {{"out", plan.out}, {"mode", report.mode}, {"seed", report.seed}};
  if (report.rows.size() >= 3)
    summary["slope"] = {{"value", report.slope.slope}, {"half_width", report.slope.half_width}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_lowerbound(double s,
                   int m,
                   double theta,
                   double h,
                   int N,
                   const std::string& mode,
                   std::optional<double> alpha,
                   double delta,
                   double c0)
{
  deconv::PerturbationSpec spec;
  spec.s = s;
  spec.bandwidth = h;
  spec.band_index = N;
  spec.theta = theta;
  spec.delta = delta;
  spec.amplitude = c0;
  if (mode == "heavy") {
    spec.mode = deconv::PerturbationMode::heavy_tail;
  } else if (mode == "standard") {
    spec.mode = deconv::PerturbationMode::standard_rate;
    if (!alpha)
      throw std::invalid_argument("lowerbound --mode standard requires --alpha");
  } else {
    throw std::invalid_argument("lowerbound: --mode must be heavy or standard");
  }
  const auto model = deconv::ErrorModel::uniform(m, theta);
  const auto pair = deconv::build_pair(spec, alpha);
  const double chi2 = deconv::chi2_divergence(model, pair);

  json out = {{"c0", pair.diag.c0},
              {"M", pair.diag.scale_M},
              {"normalizer", pair.diag.normalizer},
              {"f1_min", pair.diag.f1_min},
              {"f1_min_at", pair.diag.f1_min_at},
              {"f1_integral", pair.diag.f1_integral},
              {"gap_at_zero", pair.diag.gap_at_zero},
              {"chi2", chi2}};

  // scaling exponents from a local (h, N) refinement
  auto chi2_at = [&](double hh, int nn) {
    deconv::PerturbationSpec s2 = spec;
    s2.bandwidth = hh;
    s2.band_index = nn;
    return deconv::chi2_divergence(model, deconv::build_pair(s2, alpha));
  };
  out["h_exponent"] = (std::log(chi2) - std::log(chi2_at(h / 2, N))) / std::log(2.0);
  if (spec.mode == deconv::PerturbationMode::heavy_tail)
    out["N_exponent"] = (std::log(chi2_at(h, 2 * N)) - std::log(chi2)) / std::log(2.0);
  std::cout << out.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"deconv-lab: pointwise density deconvolution with vanishing error characteristic functions"};
  app.require_subcommand(1);

  // rates
  auto* rates = app.add_subcommand("rates", "closed-form minimax tuning and rate exponents");
  double r_alpha = 1, r_q = 1, r_theta = 1, r_A = 1, r_B = 1;
  int r_m = 1;
  std::uint64_t r_n = 1000;
  rates->add_option("--alpha", r_alpha, "Holder smoothness")->required();
  rates->add_option("--q", r_q, "tail exponent")->required();
  rates->add_option("--m", r_m, "zero multiplicity")->required();
  rates->add_option("--theta", r_theta, "uniform half-width");
  rates->add_option("--A", r_A, "Holder constant");
  rates->add_option("--B", r_B, "tail constant");
  rates->add_option("--n", r_n, "sample size")->required();

  // grids
  auto* grids = app.add_subcommand("grids", "default adaptive bandwidth/cut-off grids");
  std::uint64_t g_n = 1000;
  int g_m = 1;
  double g_theta = 1;
  grids->add_option("--n", g_n, "sample size")->required();
  grids->add_option("--m", g_m, "zero multiplicity")->required();
  grids->add_option("--theta", g_theta, "uniform half-width");

  // estimate
  auto* est = app.add_subcommand("estimate", "pointwise estimate from a sample file");
  std::string e_in, e_error, e_mode = "fixed";
  double e_x0 = 0.5;
  int e_k = 5;
  std::optional<double> e_h, e_kappa;
  std::optional<int> e_N;
  est->add_option("--in", e_in, "sample file (one value per line, or CSV with header y)")->required();
  est->add_option("--error", e_error, "error model, e.g. uniform:m=2,theta=1")->required();
  est->add_option("--x0", e_x0, "evaluation point");
  est->add_option("--k", e_k, "kernel order (vanishing moments)");
  est->add_option("--mode", e_mode, "fixed | adaptive");
  est->add_option("--h", e_h, "bandwidth (fixed mode)");
  est->add_option("--N", e_N, "series cut-off (fixed mode)");
  est->add_option("--kappa", e_kappa, "threshold parameter (adaptive mode, default 5 ln n)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk experiment from a JSON config");
  std::string s_config;
  std::uint64_t s_seed = 0;
  int s_threads = 1;
  std::optional<std::string> s_out;
  sim->add_option("--config", s_config, "experiment config JSON")->required();
  sim->add_option("--seed", s_seed, "master seed")->required();
  sim->add_option("--threads", s_threads, "worker threads (output is identical for any count)");
  sim->add_option("--out", s_out, "override the config output path");

  // lowerbound
  auto* lb = app.add_subcommand("lowerbound", "two-point lower-bound construction diagnostics");
  double l_s = 1, l_theta = 1, l_h = 0.1, l_delta = 1.0 / 16, l_c0 = 0;
  int l_m = 1, l_N = 4;
  std::string l_mode = "heavy";
  std::optional<double> l_alpha;
  lb->add_option("--s", l_s, "tail parameter of f0")->required();
  lb->add_option("--m", l_m, "zero multiplicity")->required();
  lb->add_option("--theta", l_theta, "uniform half-width");
  lb->add_option("--h", l_h, "perturbation scale")->required();
  lb->add_option("--N", l_N, "frequency band index")->required();
  lb->add_option("--mode", l_mode, "heavy | standard");
  lb->add_option("--alpha", l_alpha, "Holder exponent (standard mode)");
  lb->add_option("--delta", l_delta, "cutoff shape in (0, 1/8)");
  lb->add_option("--c0", l_c0, "amplitude (0 = bisection search)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rates->parsed())
      return run_rates(r_alpha, r_q, r_m, r_theta, r_A, r_B, r_n);
    if (grids->parsed())
      return run_grids(g_n, g_m, g_theta);
    if (est->parsed())
      return run_estimate(e_in, e_error, e_x0, e_k, e_mode, e_h, e_N, e_kappa);
    if (sim->parsed())
      return run_simulate(s_config, s_seed, s_threads, s_out);
    if (lb->parsed())
      return run_lowerbound(l_s, l_m, l_theta, l_h, l_N, l_mode, l_alpha, l_delta, l_c0);
  } catch (const deconv::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
