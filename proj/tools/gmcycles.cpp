// Command-line front end: limit-cycle extraction, periodic generalized-model
// analysis, and coefficient-space sampling.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"

#include "gmcycles/floquet.hpp"
#include "gmcycles/fourier.hpp"
#include "gmcycles/genfunc.hpp"
#include "gmcycles/model.hpp"
#include "gmcycles/orbit.hpp"
#include "gmcycles/sampler.hpp"

namespace fs = std::filesystem;
using namespace gmcycles;

namespace {

struct ModelArgs {
  std::string model = "rm";
  std::string start;  // "x:y", empty means preset/default
};

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  auto pos = s.find(':');
  if (pos == std::string::npos)
    throw CLI::ValidationError(std::string(what) + " expects the form a:b");
  try {
    return {std::stod(s.substr(0, pos)), std::stod(s.substr(pos + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string(what) + " expects two numbers a:b");
  }
}

Preset resolve_model(const ModelArgs& args) {
  Preset p;
  if (args.model == "rm" || args.model == "lv") {
    p = preset(args.model);
  } else {
    p.model = read_model_json(args.model);
    p.start = {1.0, 1.0};
  }
  if (!args.start.empty()) {
    auto [x, y] = parse_pair(args.start, "--start");
    p.start = {x, y};
  }
  return p;
}

void add_model_flags(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--model", args.model,
                  "Model preset (rm, lv) or path to a model json file");
  cmd->add_option("--start", args.start,
                  "Start state x:y (defaults to the preset start or 1:1)");
}

int cmd_orbit(const ModelArgs& margs, const CycleOptions& copt,
              const std::string& out_dir) {
  Preset p = resolve_model(margs);
  PeriodicOrbit orbit = find_limit_cycle(p.model, p.start, copt);
  fs::create_directories(out_dir);
  write_orbit_csv(orbit, out_dir + "/orbit.csv");
  write_orbit_json(orbit, out_dir + "/orbit.json");
  std::printf("period %.17g, %zu samples, gamma1 in [%.17g, %.17g]\n",
              orbit.period, orbit.size(),
              *std::min_element(orbit.gamma1.begin(), orbit.gamma1.end()),
              *std::max_element(orbit.gamma1.begin(), orbit.gamma1.end()));
  return 0;
}

int cmd_analyze(const ModelArgs& margs, const CycleOptions& copt, int kappa,
                int kappa_m, const std::string& out_dir) {
  Preset p = resolve_model(margs);
  PeriodicOrbit orbit = find_limit_cycle(p.model, p.start, copt);
  GeneralizedFunctions gf = compute_gen_functions(p.model, orbit);
  fs::create_directories(out_dir);
  write_genfunc_csv(gf, out_dir + "/genfuncs.csv");

  ScaleElasticityCoeffs coeffs;
  coeffs.beta_s = dft(gf.beta_s, gf.period, kappa);
  coeffs.beta_1 = dft(gf.beta_1, gf.period, kappa);
  coeffs.beta_2 = dft(gf.beta_2, gf.period, kappa);
  coeffs.beta_m = dft(gf.beta_m, gf.period, kappa);
  coeffs.s_x = dft(gf.s_x, gf.period, kappa);
  coeffs.g_x = dft(gf.g_x, gf.period, kappa);
  {
    nlohmann::json j;
    j["beta_s"] = fourier_to_json(coeffs.beta_s);
    j["beta_1"] = fourier_to_json(coeffs.beta_1);
    j["beta_2"] = fourier_to_json(coeffs.beta_2);
    j["beta_m"] = fourier_to_json(coeffs.beta_m);
    j["s_x"] = fourier_to_json(coeffs.s_x);
    j["g_x"] = fourier_to_json(coeffs.g_x);
    std::ofstream out(out_dir + "/fourier.json");
    out << j.dump(2) << "\n";
  }

  ModuliResiduals mres = moduli_residual(gf);
  ResidualSet rset = algebraic_residuals(coeffs, kappa_m);
  {
    nlohmann::json j;
    j["kappa"] = kappa;
    j["kappa_m"] = kappa_m;
    j["moduli"] = {{"beta_s", mres.beta_s}, {"beta_1", mres.beta_1},
                   {"beta_2", mres.beta_2}, {"beta_m", mres.beta_m},
                   {"max", mres.max()}};
    j["algebraic_max"] = rset.max_abs();
    std::ofstream out(out_dir + "/residuals.json");
    out << j.dump(2) << "\n";
  }

  MonodromyResult mono = monodromy(p.model, orbit, copt.tol);
  double lam_mono = std::abs(mono.nontrivial);

  double dev_gy = 0.0, dev_my = 0.0;
  for (std::size_t j = 0; j < gf.size(); ++j) {
    dev_gy = std::max(dev_gy, std::abs(gf.g_y[j] - 1.0));
    dev_my = std::max(dev_my, std::abs(gf.m_y[j] - 1.0));
  }
  bool spectral = dev_gy < 1e-8 && dev_my < 1e-8;

  FourierSeries bs16 = dft(gf.beta_s, gf.period, std::min(kappa, 16));
  FourierSeries sx16 = dft(gf.s_x, gf.period, std::min(kappa, 16));
  FourierSeries b116 = dft(gf.beta_1, gf.period, std::min(kappa, 16));
  FourierSeries gx16 = dft(gf.g_x, gf.period, std::min(kappa, 16));
  auto [c1, c2] = c_constants(bs16, sx16, b116, gx16);
  FloquetResult fres = multiplier(c1, c2, gf.period);
  if (!spectral) {
    fres.lambda = general_multiplier(gf);
    fres.stable = fres.lambda < 1.0;
  }
  double gap = std::abs(fres.lambda - lam_mono) / lam_mono;
  double lgap = liouville_gap(mono);
  {
    nlohmann::json j = floquet_to_json(fres);
    j["lambda_monodromy"] = lam_mono;
    j["relative_gap"] = gap;
    j["liouville_gap"] = lgap;
    j["formula"] = spectral ? "spectral" : "general";
    std::ofstream out(out_dir + "/floquet.json");
    out << j.dump(2) << "\n";
  }

  std::printf("period %.17g, lambda %.17g (monodromy %.17g, gap %.3g), %s\n",
              orbit.period, fres.lambda, lam_mono, gap,
              fres.stable ? "stable" : "unstable");
  std::printf("moduli residual %.3g, algebraic residual %.3g, liouville gap %.3g\n",
              mres.max(), rset.max_abs(), lgap);

  if (lgap > 1e-6) {
    std::fprintf(stderr, "invariant check failed: liouville gap %.3g > 1e-6\n", lgap);
    return 3;
  }
  if (gap > 1e-3) {
    std::fprintf(stderr,
                 "invariant check failed: multiplier gap %.3g > 1e-3 between "
                 "formula and monodromy\n",
                 gap);
    return 3;
  }
  return 0;
}

int cmd_sample(std::size_t count, std::uint64_t seed, SamplingOptions opt,
               const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::string jsonl = out_dir + "/samples.jsonl";

  std::vector<SampleRecord> existing;
  if (fs::exists(jsonl)) existing = read_records_jsonl(jsonl);
  if (existing.size() > count) {
    std::fprintf(stderr,
                 "samples.jsonl already holds %zu records, more than the "
                 "requested %zu\n",
                 existing.size(), count);
    return 2;
  }

  std::size_t todo = count - existing.size();
  opt.first_index = existing.size() + 1;
  opt.progress = [](std::size_t done, std::size_t total) {
    std::fprintf(stderr, "sampled %zu/%zu\n", done, total);
  };
  if (todo > 0) {
    std::vector<SampleRecord> fresh = run_sampling(todo, seed, opt);
    write_records_jsonl(fresh, jsonl, /*append=*/!existing.empty());
    existing.insert(existing.end(), fresh.begin(), fresh.end());
  }

  StatsSummary stats = summarize(existing, opt.kappa_m);
  write_stats_json(stats, out_dir + "/stats.json");
  write_hist_csv(stats, out_dir + "/hist.csv");

  double frac = stats.total ? static_cast<double>(stats.accepted) /
                                  static_cast<double>(stats.total)
                            : 0.0;
  double sfrac = stats.accepted ? static_cast<double>(stats.stable.count) /
                                      static_cast<double>(stats.accepted)
                                : 0.0;
  std::printf("%zu samples, %zu accepted (%.3f), %zu stable (%.3f of accepted)\n",
              stats.total, stats.accepted, frac, stats.stable.count, sfrac);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal generalized-modeling toolkit for predator-prey cycles"};
  app.require_subcommand(1);

  ModelArgs margs;
  CycleOptions copt;
  std::string out_dir;
  int kappa = 17, kappa_m = -1;
  std::size_t count = 0;
  std::uint64_t seed = 42;
  std::string range = "0.5:1.5";
  SamplingOptions sopt;

  CLI::App* orbit_cmd = app.add_subcommand("orbit", "Locate a limit cycle and write it out");
  add_model_flags(orbit_cmd, margs);
  orbit_cmd->add_option("--n", copt.n, "Grid size (power of two)")->capture_default_str();
  orbit_cmd->add_option("--tol", copt.tol, "Integrator tolerance")->capture_default_str();
  orbit_cmd->add_option("--burn-in", copt.burn_in, "Transient burn-in time")->capture_default_str();
  orbit_cmd->add_option("--horizon", copt.search_horizon, "Section search horizon")->capture_default_str();
  orbit_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "Full pipeline: orbit, generalized functions, spectra, stability");
  add_model_flags(analyze_cmd, margs);
  analyze_cmd->add_option("--n", copt.n, "Grid size (power of two)")->capture_default_str();
  analyze_cmd->add_option("--tol", copt.tol, "Integrator tolerance")->capture_default_str();
  analyze_cmd->add_option("--burn-in", copt.burn_in, "Transient burn-in time")->capture_default_str();
  analyze_cmd->add_option("--horizon", copt.search_horizon, "Section search horizon")->capture_default_str();
  analyze_cmd->add_option("--kappa", kappa, "Spectrum truncation for output")->capture_default_str();
  analyze_cmd->add_option("--kappa-m", kappa_m,
                          "Residual truncation (defaults to --kappa)");
  analyze_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* sample_cmd = app.add_subcommand(
      "sample", "Sample the coefficient space and classify stability");
  sample_cmd->add_option("--count", count, "Number of samples")
      ->required()
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample_cmd->add_option("--kappa-m", sopt.kappa_m, "Harmonic truncation")->capture_default_str();
  sample_cmd->add_option("--tol", sopt.tol, "Acceptance threshold on the residual norm")
      ->capture_default_str();
  sample_cmd->add_option("--range", range, "Initial point box lo:hi")->capture_default_str();
  sample_cmd->add_option("--max-evals", sopt.max_evals,
                         "Objective evaluation budget per sample (0: 2000 * dim)");
  sample_cmd->add_flag("--enforce-constant-beta-m", sopt.enforce_constant_beta_m,
                       "Penalize beta_m harmonics in the objective");
  sample_cmd->add_flag("--strict-positivity", sopt.strict_positivity,
                       "Require each scale function positive on a fine grid");
  sample_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (orbit_cmd->parsed()) return cmd_orbit(margs, copt, out_dir);
    if (analyze_cmd->parsed()) {
      if (kappa < 0 || 2 * static_cast<std::size_t>(kappa) >= copt.n) {
        std::fprintf(stderr, "--kappa must satisfy 0 <= kappa < n/2\n");
        return 1;
      }
      return cmd_analyze(margs, copt, kappa, kappa_m < 0 ? kappa : kappa_m, out_dir);
    }
    if (sample_cmd->parsed()) {
      auto [lo, hi] = parse_pair(range, "--range");
      sopt.lo = lo;
      sopt.hi = hi;
      return cmd_sample(count, seed, sopt, out_dir);
    }
  } catch (const NoCycleError& e) {
    std::fprintf(stderr, "no cycle found: %s\n", e.what());
    return 2;
  } catch (const NotConvergedError& e) {
    std::fprintf(stderr, "cycle search did not converge: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
