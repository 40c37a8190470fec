#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gmcycles/fourier.hpp"

namespace gmcycles {

// Deterministic 64-bit stream; identical across platforms, unlike the
// distributions in <random>.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t s) : state_(s) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    double u = static_cast<double>(next() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + u * (hi - lo);
  }

 private:
  std::uint64_t state_;
};

// One generator per (seed, sample index), so results do not depend on which
// worker draws first.
SplitMix64 sample_rng(std::uint64_t seed, std::uint64_t index);

// Reusable evaluator of the coefficient-space residual norm; owns all
// scratch so repeated calls do not allocate. Not thread-safe, one per worker.
class ObjectiveEval {
 public:
  explicit ObjectiveEval(int kappa_m, bool enforce_constant_beta_m = false);

  double operator()(const std::vector<double>& x);
  int dimension() const { return 6 * (2 * kappa_m_ + 1); }

 private:
  int kappa_m_;
  bool enforce_;
  ScaleElasticityCoeffs coeffs_;
  ConvWorkspace ws_;
  ResidualSet res_;
};

double objective(const std::vector<double>& x, int kappa_m);

struct MinimizeOptions {
  std::size_t max_evals = 0;   // 0 means 2000 * dimension
  double ftol = 1e-10;         // stop when the best objective drops below this
  double diameter_tol = 1e-8;  // simplex collapse threshold (max-norm)
  double edge = 0.05;          // initial simplex edge
  bool restart_on_stagnation = true;  // one rebuild around the best point
};

struct MinimizeResult {
  std::vector<double> x;
  double fx = 0.0;
  std::size_t evals = 0;
  bool converged = false;  // false only when the evaluation budget ran out
};

// Nelder-Mead with the standard (1, 2, 0.5, 0.5) coefficients.
MinimizeResult minimize(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x0, const MinimizeOptions& opt = {});

enum class RejectReason { none, positivity, tolerance, optimizer_failure };

const char* to_string(RejectReason r);
RejectReason reject_reason_from_string(const std::string& s);

struct SampleRecord {
  std::uint64_t seed_index = 0;
  std::vector<double> x;      // optimized coefficient vector
  double objective = 0.0;
  double lambda = 0.0;
  bool stable = false;        // strict lambda < 1
  bool accepted = false;
  RejectReason reason = RejectReason::none;
  bool converged = false;
  std::size_t evals = 0;
};

struct SamplingOptions {
  int kappa_m = 2;
  double tol = 1e-4;          // acceptance threshold on the objective
  double lo = 0.5, hi = 1.5;  // initial-point box
  std::size_t max_evals = 0;  // per sample; 0 means 2000 * dimension
  unsigned threads = 0;       // 0: hardware count; GMCYCLES_THREADS caps it
  bool enforce_constant_beta_m = false;
  bool strict_positivity = false;  // also require min of each beta series > 0
  std::uint64_t first_index = 1;   // seed_index of the first sample (resume)
  std::optional<std::vector<double>> initial_override;  // testing hook
  std::function<void(std::size_t, std::size_t)> progress;  // (done, count)
};

// Results come back ordered by seed_index regardless of thread count.
std::vector<SampleRecord> run_sampling(std::size_t count, std::uint64_t seed,
                                       const SamplingOptions& opt = {});

// Undefined (nullopt) when either argument has zero variance.
std::optional<double> pearson(const std::vector<double>& a,
                              const std::vector<double>& b);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::uint64_t> counts;  // 64 bins
};

struct ClassStats {
  std::size_t count = 0;
  std::vector<double> mean, variance;  // per coordinate, sample variance
  std::vector<Histogram> hist;
};

struct StatsSummary {
  std::size_t total = 0, accepted = 0;
  ClassStats stable, unstable;
  std::vector<std::optional<double>> r_lambda;  // coordinate vs lambda, accepted set
  std::vector<std::string> names;
};

std::vector<std::string> coordinate_names(int kappa_m);
StatsSummary summarize(const std::vector<SampleRecord>& records, int kappa_m);

nlohmann::json record_to_json(const SampleRecord& r);
SampleRecord record_from_json(const nlohmann::json& j);
void write_records_jsonl(const std::vector<SampleRecord>& records,
                         const std::string& path, bool append = false);
std::vector<SampleRecord> read_records_jsonl(const std::string& path);

nlohmann::json stats_to_json(const StatsSummary& s);
// Histograms travel in hist.csv, not in the stats document.
StatsSummary stats_from_json(const nlohmann::json& j);
void write_stats_json(const StatsSummary& s, const std::string& path);
StatsSummary read_stats_json(const std::string& path);

struct HistRow {
  std::string coordinate;
  std::string klass;  // "stable" | "unstable"
  double lo = 0.0, hi = 0.0;
  std::uint64_t count = 0;
};

void write_hist_csv(const StatsSummary& s, const std::string& path);
std::vector<HistRow> read_hist_csv(const std::string& path);

}  // namespace gmcycles
