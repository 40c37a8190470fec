#include "gmcycles/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gmcycles/floquet.hpp"

namespace gmcycles {

SplitMix64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 h(seed);
  std::uint64_t a = h.next();
  return SplitMix64(a ^ (index * 0xD1B54A32D192ED03ull));
}

ObjectiveEval::ObjectiveEval(int kappa_m, bool enforce_constant_beta_m)
    : kappa_m_(kappa_m), enforce_(enforce_constant_beta_m) {
  if (kappa_m < 0) throw std::invalid_argument("kappa_m must be nonnegative");
}

double ObjectiveEval::operator()(const std::vector<double>& x) {
  unpack_into(x, kappa_m_, 1.0, coeffs_);
  algebraic_residuals_into(coeffs_, kappa_m_, ws_, res_);
  double f = res_.norm2();
  if (enforce_) {
    for (int k = 1; k <= kappa_m_; ++k) f += 2.0 * std::norm(coeffs_.beta_m.c[k]);
  }
  return f;
}

double objective(const std::vector<double>& x, int kappa_m) {
  ObjectiveEval eval(kappa_m);
  return eval(x);
}

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& v,
                        std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == best) continue;
    for (std::size_t j = 0; j < v[i].size(); ++j)
      d = std::max(d, std::abs(v[i][j] - v[best][j]));
  }
  return d;
}

}  // namespace

MinimizeResult minimize(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x0, const MinimizeOptions& opt) {
  const std::size_t d = x0.size();
  if (d == 0) throw std::invalid_argument("minimize: empty starting point");
  const std::size_t max_evals = opt.max_evals ? opt.max_evals : 2000 * d;
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> v(d + 1, x0);
  std::vector<double> fv(d + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    return f(p);
  };

  auto build_simplex = [&](const std::vector<double>& center) {
    for (std::size_t i = 0; i <= d; ++i) {
      v[i] = center;
      if (i > 0) v[i][i - 1] += opt.edge;
      fv[i] = eval(v[i]);
    }
  };
  build_simplex(x0);

  bool restarted = !opt.restart_on_stagnation;
  bool converged = false;
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);

  for (;;) {
    std::size_t best = 0, worst = 0, second = 0;
    for (std::size_t i = 1; i <= d; ++i) {
      if (fv[i] < fv[best]) best = i;
      if (fv[i] > fv[worst]) worst = i;
    }
    second = best;
    for (std::size_t i = 0; i <= d; ++i)
      if (i != worst && fv[i] > fv[second]) second = i;

    if (fv[best] < opt.ftol) {
      converged = true;
      break;
    }
    if (simplex_diameter(v, best) < opt.diameter_tol) {
      if (!restarted) {
        restarted = true;
        build_simplex(v[best]);
        continue;
      }
      converged = true;  // collapsed; nothing left to explore
      break;
    }
    if (evals >= max_evals) break;

    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        if (i != worst) acc += v[i][j];
      centroid[j] = acc / static_cast<double>(d);
    }

    for (std::size_t j = 0; j < d; ++j)
      xr[j] = centroid[j] + alpha * (centroid[j] - v[worst][j]);
    double fr = eval(xr);

    if (fr < fv[best]) {
      for (std::size_t j = 0; j < d; ++j)
        xe[j] = centroid[j] + gamma * (xr[j] - centroid[j]);
      double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[worst]) {
        for (std::size_t j = 0; j < d; ++j)
          xc[j] = centroid[j] + rho * (xr[j] - centroid[j]);
        double fc = eval(xc);
        if (fc <= fr) {
          v[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        for (std::size_t j = 0; j < d; ++j)
          xc[j] = centroid[j] + rho * (v[worst][j] - centroid[j]);
        double fc = eval(xc);
        if (fc < fv[worst]) {
          v[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < d; ++j)
            v[i][j] = v[best][j] + sigma * (v[i][j] - v[best][j]);
          fv[i] = eval(v[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[best]) best = i;

  MinimizeResult r;
  r.x = v[best];
  r.fx = fv[best];
  r.evals = evals;
  r.converged = converged;
  return r;
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::positivity: return "positivity";
    case RejectReason::tolerance: return "tolerance";
    case RejectReason::optimizer_failure: return "optimizer_failure";
  }
  return "none";
}

RejectReason reject_reason_from_string(const std::string& s) {
  if (s == "none") return RejectReason::none;
  if (s == "positivity") return RejectReason::positivity;
  if (s == "tolerance") return RejectReason::tolerance;
  if (s == "optimizer_failure") return RejectReason::optimizer_failure;
  throw std::invalid_argument("unknown rejection reason '" + s + "'");
}

namespace {

unsigned env_thread_cap() {
  const char* env = std::getenv("GMCYCLES_THREADS");
  if (!env) return 0;
  long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 0;
}

// Strict positivity of the four zeroth coefficients; optionally of the full
// series on a fine grid.
bool betas_positive(const std::vector<double>& x, int kappa_m, bool strict) {
  std::size_t stride = 2 * static_cast<std::size_t>(kappa_m) + 1;
  for (int b = 0; b < 4; ++b)
    if (!(x[static_cast<std::size_t>(b) * stride] > 0.0)) return false;
  if (!strict) return true;
  ScaleElasticityCoeffs c = unpack(x, kappa_m, 1.0);
  for (const FourierSeries* s : {&c.beta_s, &c.beta_1, &c.beta_2, &c.beta_m}) {
    for (int j = 0; j < 256; ++j) {
      if (!(s->evaluate(static_cast<double>(j) / 256.0) > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<SampleRecord> run_sampling(std::size_t count, std::uint64_t seed,
                                       const SamplingOptions& opt) {
  if (opt.kappa_m < 0) throw std::invalid_argument("kappa_m must be nonnegative");
  if (!(opt.lo < opt.hi))
    throw std::invalid_argument("sampling range must satisfy lo < hi");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  const std::size_t dim = 6 * (2 * static_cast<std::size_t>(opt.kappa_m) + 1);
  if (opt.initial_override && opt.initial_override->size() != dim)
    throw std::invalid_argument("initial_override has the wrong dimension");

  std::vector<SampleRecord> records(count);
  if (count == 0) return records;

  unsigned threads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  if (unsigned cap = env_thread_cap()) threads = std::min(threads, cap);
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, count));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::size_t progress_step = std::max<std::size_t>(1, count / 20);

  auto worker = [&]() {
    ObjectiveEval obj(opt.kappa_m, opt.enforce_constant_beta_m);
    auto f = [&obj](const std::vector<double>& x) { return obj(x); };
    MinimizeOptions mo;
    mo.max_evals = opt.max_evals;

    for (;;) {
      std::size_t slot = next.fetch_add(1);
      if (slot >= count) break;
      std::uint64_t index = opt.first_index + slot;

      std::vector<double> x0(dim);
      if (opt.initial_override) {
        x0 = *opt.initial_override;
      } else {
        SplitMix64 rng = sample_rng(seed, index);
        for (auto& xi : x0) xi = rng.uniform(opt.lo, opt.hi);
      }

      MinimizeResult mr = minimize(f, std::move(x0), mo);

      SampleRecord rec;
      rec.seed_index = index;
      rec.objective = mr.fx;
      rec.converged = mr.converged;
      rec.evals = mr.evals;

      ScaleElasticityCoeffs c = unpack(mr.x, opt.kappa_m, 1.0);
      auto [c1, c2] = c_constants(c.beta_s, c.s_x, c.beta_1, c.g_x);
      FloquetResult fr = multiplier(c1, c2, 1.0);
      rec.lambda = fr.lambda;
      rec.stable = fr.stable;

      if (!(mr.fx < opt.tol)) {
        rec.accepted = false;
        rec.reason = mr.converged ? RejectReason::tolerance
                                  : RejectReason::optimizer_failure;
      } else if (!betas_positive(mr.x, opt.kappa_m, opt.strict_positivity)) {
        rec.accepted = false;
        rec.reason = RejectReason::positivity;
      } else {
        rec.accepted = true;
        rec.reason = RejectReason::none;
      }
      rec.x = std::move(mr.x);
      records[slot] = std::move(rec);

      std::size_t d = done.fetch_add(1) + 1;
      if (opt.progress && (d % progress_step == 0 || d == count)) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        opt.progress(d, count);
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

std::optional<double> pearson(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
  double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::string> coordinate_names(int kappa_m) {
  const char* fn[] = {"beta_s", "beta_1", "beta_2", "beta_m", "s_x", "g_x"};
  std::vector<std::string> names;
  names.reserve(6 * (2 * static_cast<std::size_t>(kappa_m) + 1));
  for (const char* f : fn) {
    names.push_back(std::string(f) + "_0");
    for (int k = 1; k <= kappa_m; ++k) {
      names.push_back(std::string(f) + "_re" + std::to_string(k));
      names.push_back(std::string(f) + "_im" + std::to_string(k));
    }
  }
  return names;
}

namespace {

ClassStats class_stats(const std::vector<const SampleRecord*>& recs,
                       std::size_t dim) {
  ClassStats cs;
  cs.count = recs.size();
  if (recs.empty()) return cs;
  cs.mean.assign(dim, 0.0);
  cs.variance.assign(dim, 0.0);
  for (const auto* r : recs)
    for (std::size_t j = 0; j < dim; ++j) cs.mean[j] += r->x[j];
  for (std::size_t j = 0; j < dim; ++j)
    cs.mean[j] /= static_cast<double>(recs.size());
  if (recs.size() > 1) {
    for (const auto* r : recs)
      for (std::size_t j = 0; j < dim; ++j) {
        double d = r->x[j] - cs.mean[j];
        cs.variance[j] += d * d;
      }
    for (std::size_t j = 0; j < dim; ++j)
      cs.variance[j] /= static_cast<double>(recs.size() - 1);
  }

  cs.hist.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double lo = recs[0]->x[j], hi = lo;
    for (const auto* r : recs) {
      lo = std::min(lo, r->x[j]);
      hi = std::max(hi, r->x[j]);
    }
    Histogram& h = cs.hist[j];
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(64, 0);
    double width = hi - lo;
    for (const auto* r : recs) {
      std::size_t bin = 0;
      if (width > 0.0) {
        bin = static_cast<std::size_t>((r->x[j] - lo) / width * 64.0);
        if (bin > 63) bin = 63;
      }
      ++h.counts[bin];
    }
  }
  return cs;
}

}  // namespace

StatsSummary summarize(const std::vector<SampleRecord>& records, int kappa_m) {
  const std::size_t dim = 6 * (2 * static_cast<std::size_t>(kappa_m) + 1);
  StatsSummary s;
  s.names = coordinate_names(kappa_m);
  s.total = records.size();

  std::vector<const SampleRecord*> accepted, stable, unstable;
  for (const auto& r : records) {
    if (!r.accepted) continue;
    if (r.x.size() != dim)
      throw std::invalid_argument("summarize: record dimension mismatch");
    accepted.push_back(&r);
    (r.stable ? stable : unstable).push_back(&r);
  }
  s.accepted = accepted.size();
  s.stable = class_stats(stable, dim);
  s.unstable = class_stats(unstable, dim);

  s.r_lambda.assign(dim, std::nullopt);
  if (accepted.size() >= 2) {
    std::vector<double> lambdas(accepted.size());
    for (std::size_t i = 0; i < accepted.size(); ++i)
      lambdas[i] = accepted[i]->lambda;
    std::vector<double> coord(accepted.size());
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t i = 0; i < accepted.size(); ++i)
        coord[i] = accepted[i]->x[j];
      s.r_lambda[j] = pearson(coord, lambdas);
    }
  }
  return s;
}

nlohmann::json record_to_json(const SampleRecord& r) {
  return {{"seed_index", r.seed_index}, {"x", r.x},
          {"objective", r.objective},   {"lambda", r.lambda},
          {"stable", r.stable},         {"accepted", r.accepted},
          {"reason", to_string(r.reason)}, {"converged", r.converged},
          {"evals", r.evals}};
}

SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.seed_index = j.at("seed_index").get<std::uint64_t>();
  r.x = j.at("x").get<std::vector<double>>();
  r.objective = j.at("objective").get<double>();
  r.lambda = j.at("lambda").get<double>();
  r.stable = j.at("stable").get<bool>();
  r.accepted = j.at("accepted").get<bool>();
  r.reason = reject_reason_from_string(j.at("reason").get<std::string>());
  r.converged = j.at("converged").get<bool>();
  r.evals = j.at("evals").get<std::size_t>();
  return r;
}

void write_records_jsonl(const std::vector<SampleRecord>& records,
                         const std::string& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

std::vector<SampleRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<SampleRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

namespace {

nlohmann::json class_to_json(const ClassStats& cs) {
  return {{"count", cs.count}, {"mean", cs.mean}, {"variance", cs.variance}};
}

ClassStats class_from_json(const nlohmann::json& j) {
  ClassStats cs;
  cs.count = j.at("count").get<std::size_t>();
  cs.mean = j.at("mean").get<std::vector<double>>();
  cs.variance = j.at("variance").get<std::vector<double>>();
  return cs;
}

}  // namespace

nlohmann::json stats_to_json(const StatsSummary& s) {
  nlohmann::json r;
  r["counts"] = {{"total", s.total},
                 {"accepted", s.accepted},
                 {"stable", s.stable.count},
                 {"unstable", s.unstable.count}};
  r["names"] = s.names;
  r["stable"] = class_to_json(s.stable);
  r["unstable"] = class_to_json(s.unstable);
  nlohmann::json rl = nlohmann::json::array();
  for (const auto& v : s.r_lambda) {
    if (v)
      rl.push_back(*v);
    else
      rl.push_back(nullptr);
  }
  r["pearson_lambda"] = rl;
  return r;
}

StatsSummary stats_from_json(const nlohmann::json& j) {
  StatsSummary s;
  s.total = j.at("counts").at("total").get<std::size_t>();
  s.accepted = j.at("counts").at("accepted").get<std::size_t>();
  s.names = j.at("names").get<std::vector<std::string>>();
  s.stable = class_from_json(j.at("stable"));
  s.unstable = class_from_json(j.at("unstable"));
  for (const auto& v : j.at("pearson_lambda")) {
    if (v.is_null())
      s.r_lambda.push_back(std::nullopt);
    else
      s.r_lambda.push_back(v.get<double>());
  }
  return s;
}

void write_stats_json(const StatsSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << stats_to_json(s).dump(2) << "\n";
}

StatsSummary read_stats_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return stats_from_json(j);
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void hist_rows(const ClassStats& cs, const char* klass,
               const std::vector<std::string>& names, std::ofstream& out) {
  for (std::size_t j = 0; j < cs.hist.size(); ++j) {
    const Histogram& h = cs.hist[j];
    double width = (h.hi - h.lo) / 64.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      double lo = h.lo + width * static_cast<double>(b);
      double hi = (b + 1 == h.counts.size()) ? h.hi : lo + width;
      out << names[j] << "," << klass << "," << fmt17(lo) << "," << fmt17(hi)
          << "," << h.counts[b] << "\n";
    }
  }
}

}  // namespace

void write_hist_csv(const StatsSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "coordinate,class,bin_lo,bin_hi,count\n";
  hist_rows(s.stable, "stable", s.names, out);
  hist_rows(s.unstable, "unstable", s.names, out);
}

std::vector<HistRow> read_hist_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "coordinate,class,bin_lo,bin_hi,count")
    throw std::runtime_error("hist csv: missing column header");
  std::vector<HistRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    HistRow r;
    std::string lo, hi, count;
    if (!std::getline(row, r.coordinate, ',') || !std::getline(row, r.klass, ',') ||
        !std::getline(row, lo, ',') || !std::getline(row, hi, ',') ||
        !std::getline(row, count, ','))
      throw std::runtime_error("hist csv: malformed row '" + line + "'");
    r.lo = std::stod(lo);
    r.hi = std::stod(hi);
    r.count = std::stoull(count);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace gmcycles
