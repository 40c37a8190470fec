#include "gmcycles/genfunc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gmcycles/fourier.hpp"
#include "gmcycles/integrate.hpp"

namespace gmcycles {

GeneralizedFunctions compute_gen_functions(const ModelSpec& model,
                                           const PeriodicOrbit& orbit) {
  validate(model);
  std::size_t n = orbit.size();
  if (n == 0) throw std::invalid_argument("empty orbit");

  GeneralizedFunctions gf;
  gf.period = orbit.period;
  for (auto* v : {&gf.beta_s, &gf.beta_1, &gf.beta_2, &gf.beta_m, &gf.s_x,
                  &gf.g_x, &gf.g_y, &gf.m_y})
    v->resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    double x = orbit.gamma1[j];
    double y = orbit.gamma2[j];
    double s = growth_value(model.growth, x);
    double g = predation_value(model.predation, x, y);
    double m = mortality_value(model.mortality, y);
    if (!(s > 0.0))
      throw std::domain_error(
          "growth rate S vanishes or changes sign along the orbit near t = " +
          std::to_string(orbit.time_at(j)));
    if (!(g > 0.0))
      throw std::domain_error(
          "predation rate G vanishes along the orbit near t = " +
          std::to_string(orbit.time_at(j)));
    if (!(m > 0.0))
      throw std::domain_error(
          "mortality rate M vanishes along the orbit near t = " +
          std::to_string(orbit.time_at(j)));
    gf.beta_s[j] = s / x;
    gf.beta_1[j] = g / x;
    gf.beta_2[j] = g / y;
    gf.beta_m[j] = m / y;
    gf.s_x[j] = x * growth_deriv(model.growth, x) / s;
    gf.g_x[j] = x * predation_dx(model.predation, x, y) / g;
    gf.g_y[j] = y * predation_dy(model.predation, x, y) / g;
    gf.m_y[j] = y * mortality_deriv(model.mortality, y) / m;
  }
  return gf;
}

ScaleState moduli_rhs(const ScaleState& b, const ElasticityState& e) {
  double ds = b.beta_s - b.beta_1;
  double dm = b.beta_2 - b.beta_m;
  ScaleState out;
  out.beta_s = b.beta_s * ds * (e.s_x - 1.0);
  out.beta_m = b.beta_m * dm * (e.m_y - 1.0);
  out.beta_1 = b.beta_1 * (ds * e.g_x - ds + dm * e.g_y);
  out.beta_2 = b.beta_2 * (dm * e.g_y - dm + ds * e.g_x);
  return out;
}

ElasticityFunctions elasticities_of(const GeneralizedFunctions& gf) {
  ElasticityFunctions el;
  el.period = gf.period;
  el.s_x = gf.s_x;
  el.g_x = gf.g_x;
  el.g_y = gf.g_y;
  el.m_y = gf.m_y;
  return el;
}

namespace {

struct ModuliDriver {
  const FourierSeries* s_x;
  const FourierSeries* g_x;
  const FourierSeries* g_y;
  const FourierSeries* m_y;

  void operator()(double t, const VecN<4>& y, VecN<4>& dy) const {
    ScaleState b{y[0], y[1], y[2], y[3]};
    ElasticityState e{s_x->evaluate(t), g_x->evaluate(t), g_y->evaluate(t),
                      m_y->evaluate(t)};
    ScaleState d = moduli_rhs(b, e);
    dy[0] = d.beta_s;
    dy[1] = d.beta_1;
    dy[2] = d.beta_2;
    dy[3] = d.beta_m;
  }
};

}  // namespace

ModuliFlow integrate_moduli_flow(const ElasticityFunctions& el,
                                 const ScaleState& beta0, double duration,
                                 double tol) {
  std::size_t n = el.s_x.size();
  if (n == 0 || el.g_x.size() != n || el.g_y.size() != n || el.m_y.size() != n)
    throw std::invalid_argument("elasticity series must share one grid");
  if (!(std::isfinite(duration) && duration > 0.0))
    throw std::invalid_argument("duration must be positive");
  for (double b : {beta0.beta_s, beta0.beta_1, beta0.beta_2, beta0.beta_m})
    if (!(std::isfinite(b) && b > 0.0))
      throw std::invalid_argument("initial scale functions must be positive");

  // Full-width trigonometric interpolation reproduces the samples exactly at
  // the grid times, so the driver carries no interpolation bias there.
  int kappa = static_cast<int>(n / 2) - 1;
  FourierSeries fsx = dft(el.s_x, el.period, kappa);
  FourierSeries fgx = dft(el.g_x, el.period, kappa);
  FourierSeries fgy = dft(el.g_y, el.period, kappa);
  FourierSeries fmy = dft(el.m_y, el.period, kappa);
  ModuliDriver rhs{&fsx, &fgx, &fgy, &fmy};

  std::size_t n_out = static_cast<std::size_t>(std::max<long long>(
      2, std::llround(static_cast<double>(n) * duration / el.period)));
  ModuliFlow flow;
  flow.t.resize(n_out);
  for (auto* v : {&flow.beta_s, &flow.beta_1, &flow.beta_2, &flow.beta_m})
    v->resize(n_out);
  std::vector<double> times(n_out);
  for (std::size_t j = 0; j < n_out; ++j)
    times[j] = duration * static_cast<double>(j) / static_cast<double>(n_out);

  VecN<4> y0{beta0.beta_s, beta0.beta_1, beta0.beta_2, beta0.beta_m};
  integrate_to_times<4>(rhs, y0, 0.0, times, tol,
                        [&](std::size_t j, double t, const VecN<4>& y) {
                          for (double v : y)
                            if (!(v > 0.0))
                              throw std::domain_error(
                                  "scale-function flow left the positive cone "
                                  "near t = " +
                                  std::to_string(t));
                          flow.t[j] = t;
                          flow.beta_s[j] = y[0];
                          flow.beta_1[j] = y[1];
                          flow.beta_2[j] = y[2];
                          flow.beta_m[j] = y[3];
                        });
  return flow;
}

double ModuliResiduals::max() const {
  return std::max(std::max(beta_s, beta_1), std::max(beta_2, beta_m));
}

ModuliResiduals moduli_residual(const GeneralizedFunctions& gf) {
  std::size_t n = gf.size();
  std::vector<double> d_s = spectral_derivative(gf.beta_s, gf.period);
  std::vector<double> d_1 = spectral_derivative(gf.beta_1, gf.period);
  std::vector<double> d_2 = spectral_derivative(gf.beta_2, gf.period);
  std::vector<double> d_m = spectral_derivative(gf.beta_m, gf.period);

  ModuliResiduals r{0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    ScaleState b{gf.beta_s[j], gf.beta_1[j], gf.beta_2[j], gf.beta_m[j]};
    ElasticityState e{gf.s_x[j], gf.g_x[j], gf.g_y[j], gf.m_y[j]};
    ScaleState rhs = moduli_rhs(b, e);
    r.beta_s = std::max(r.beta_s, std::abs(d_s[j] - rhs.beta_s));
    r.beta_1 = std::max(r.beta_1, std::abs(d_1[j] - rhs.beta_1));
    r.beta_2 = std::max(r.beta_2, std::abs(d_2[j] - rhs.beta_2));
    r.beta_m = std::max(r.beta_m, std::abs(d_m[j] - rhs.beta_m));
  }
  return r;
}

double second_order_check(const ModelSpec& model, const PeriodicOrbit& orbit) {
  GeneralizedFunctions gf = compute_gen_functions(model, orbit);
  std::vector<double> ds = spectral_derivative(gf.s_x, gf.period);
  double worst = 0.0;
  for (std::size_t j = 0; j < gf.size(); ++j) {
    double x = orbit.gamma1[j];
    double y = orbit.gamma2[j];
    double dgamma1 = growth_value(model.growth, x) -
                     predation_value(model.predation, x, y);
    double rhs = gf.s_x[j] * (1.0 - gf.s_x[j]) * (gf.beta_s[j] - gf.beta_1[j]) +
                 dgamma1 * growth_deriv2(model.growth, x) / gf.beta_s[j];
    worst = std::max(worst, std::abs(ds[j] - rhs));
  }
  return worst;
}

SpecificTerms specific_terms(const ModelSpec& model, const PeriodicOrbit& orbit) {
  GeneralizedFunctions gf = compute_gen_functions(model, orbit);
  std::size_t n = gf.size();
  SpecificTerms st;
  st.growth_term.resize(n);
  st.growth_closed.resize(n);
  st.predation_term.resize(n);
  st.predation_closed.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    double x = orbit.gamma1[j];
    double y = orbit.gamma2[j];
    st.growth_term[j] = gf.beta_s[j] * (gf.s_x[j] - 1.0);
    st.predation_term[j] = gf.beta_1[j] * (gf.g_x[j] - 1.0);
    st.growth_closed[j] = std::visit(
        [x](const auto& g) -> double {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, LinearGrowth>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, PowerGrowth>) {
            return g.k1 * (g.p - 1.0) * std::pow(x, g.p - 1.0);
          } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
            return -g.k2 * x;
          } else {
            return g.k1 * x * (g.k2 + g.k3 - 2.0 * x);
          }
        },
        model.growth);
    st.predation_closed[j] = std::visit(
        [x, y](const auto& g) -> double {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, HollingI>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, HollingII>) {
            double d = g.k2 + x;
            return -g.k1 * x * y / (d * d);
          } else if constexpr (std::is_same_v<T, HollingIII>) {
            double d = g.k2 + x * x;
            return g.k1 * x * y * (g.k2 - x * x) / (d * d);
          } else if constexpr (std::is_same_v<T, HollingIV>) {
            double d = g.k2 + x + g.k3 * x * x;
            return g.k1 * x * y * (g.k2 - g.k3 * x * x) / (d * d);
          } else {
            return g.k1 * (g.px - 1.0) * std::pow(x, g.px - 1.0) *
                   std::pow(y, g.py);
          }
        },
        model.predation);
  }
  return st;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_genfunc_csv(const GeneralizedFunctions& gf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "# T=" << fmt17(gf.period) << "\n";
  out << "t,beta_s,beta_1,beta_2,beta_m,s_x,g_x,g_y,m_y\n";
  for (std::size_t j = 0; j < gf.size(); ++j) {
    out << fmt17(gf.time_at(j)) << "," << fmt17(gf.beta_s[j]) << ","
        << fmt17(gf.beta_1[j]) << "," << fmt17(gf.beta_2[j]) << ","
        << fmt17(gf.beta_m[j]) << "," << fmt17(gf.s_x[j]) << ","
        << fmt17(gf.g_x[j]) << "," << fmt17(gf.g_y[j]) << ","
        << fmt17(gf.m_y[j]) << "\n";
  }
}

GeneralizedFunctions read_genfunc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# T=", 0) != 0)
    throw std::runtime_error("genfunc csv: missing '# T=' header");
  GeneralizedFunctions gf;
  gf.period = std::stod(line.substr(4));
  if (!std::getline(in, line) ||
      line != "t,beta_s,beta_1,beta_2,beta_m,s_x,g_x,g_y,m_y")
    throw std::runtime_error("genfunc csv: missing column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tok;
    double vals[9];
    for (int i = 0; i < 9; ++i) {
      if (!std::getline(row, tok, ','))
        throw std::runtime_error("genfunc csv: malformed row '" + line + "'");
      vals[i] = std::stod(tok);
    }
    gf.beta_s.push_back(vals[1]);
    gf.beta_1.push_back(vals[2]);
    gf.beta_2.push_back(vals[3]);
    gf.beta_m.push_back(vals[4]);
    gf.s_x.push_back(vals[5]);
    gf.g_x.push_back(vals[6]);
    gf.g_y.push_back(vals[7]);
    gf.m_y.push_back(vals[8]);
  }
  return gf;
}

}  // namespace gmcycles
