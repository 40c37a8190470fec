#include "gmcycles/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gmcycles {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void validate(const ModelSpec& model) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearGrowth>) {
          require(positive_finite(f.k1), "linear growth: k1 must be positive");
        } else if constexpr (std::is_same_v<T, PowerGrowth>) {
          require(positive_finite(f.k1), "power growth: k1 must be positive");
          require(std::isfinite(f.p), "power growth: p must be finite");
        } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
          require(positive_finite(f.k1) && positive_finite(f.k2),
                  "logistic growth: k1, k2 must be positive");
        } else {
          require(positive_finite(f.k1) && positive_finite(f.k2) &&
                      positive_finite(f.k3),
                  "allee growth: k1, k2, k3 must be positive");
          require(f.k2 < f.k3, "allee growth: requires k2 < k3");
        }
      },
      model.growth);
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, HollingI>) {
          require(positive_finite(f.k1), "holling I: k1 must be positive");
        } else if constexpr (std::is_same_v<T, HollingII>) {
          require(positive_finite(f.k1) && positive_finite(f.k2),
                  "holling II: k1, k2 must be positive");
        } else if constexpr (std::is_same_v<T, HollingIII>) {
          require(positive_finite(f.k1) && positive_finite(f.k2),
                  "holling III: k1, k2 must be positive");
        } else if constexpr (std::is_same_v<T, HollingIV>) {
          require(positive_finite(f.k1) && positive_finite(f.k2) &&
                      positive_finite(f.k3),
                  "holling IV: k1, k2, k3 must be positive");
        } else {
          require(positive_finite(f.k1), "power predation: k1 must be positive");
          require(std::isfinite(f.px) && std::isfinite(f.py),
                  "power predation: exponents must be finite");
        }
      },
      model.predation);
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearMortality>) {
          require(positive_finite(f.k), "linear mortality: k must be positive");
        } else {
          require(positive_finite(f.k), "power mortality: k must be positive");
          require(std::isfinite(f.q), "power mortality: q must be finite");
        }
      },
      model.mortality);
}

double growth_value(const GrowthForm& f, double x) {
  return std::visit(
      [x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearGrowth>) {
          return g.k1 * x;
        } else if constexpr (std::is_same_v<T, PowerGrowth>) {
          return g.k1 * std::pow(x, g.p);
        } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
          return g.k1 * x - g.k2 * x * x;
        } else {
          return g.k1 * x * (g.k2 - x) * (x - g.k3);
        }
      },
      f);
}

double growth_deriv(const GrowthForm& f, double x) {
  return std::visit(
      [x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearGrowth>) {
          return g.k1;
        } else if constexpr (std::is_same_v<T, PowerGrowth>) {
          return g.k1 * g.p * std::pow(x, g.p - 1.0);
        } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
          return g.k1 - 2.0 * g.k2 * x;
        } else {
          // S = k1 (-x^3 + (k2 + k3) x^2 - k2 k3 x)
          return g.k1 * (-3.0 * x * x + 2.0 * (g.k2 + g.k3) * x - g.k2 * g.k3);
        }
      },
      f);
}

double growth_deriv2(const GrowthForm& f, double x) {
  return std::visit(
      [x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearGrowth>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PowerGrowth>) {
          return g.k1 * g.p * (g.p - 1.0) * std::pow(x, g.p - 2.0);
        } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
          return -2.0 * g.k2;
        } else {
          return g.k1 * (-6.0 * x + 2.0 * (g.k2 + g.k3));
        }
      },
      f);
}

double predation_value(const PredationForm& f, double x, double y) {
  return std::visit(
      [x, y](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, HollingI>) {
          return g.k1 * x * y;
        } else if constexpr (std::is_same_v<T, HollingII>) {
          return g.k1 * x * y / (g.k2 + x);
        } else if constexpr (std::is_same_v<T, HollingIII>) {
          return g.k1 * x * x * y / (g.k2 + x * x);
        } else if constexpr (std::is_same_v<T, HollingIV>) {
          return g.k1 * x * x * y / (g.k2 + x + g.k3 * x * x);
        } else {
          return g.k1 * std::pow(x, g.px) * std::pow(y, g.py);
        }
      },
      f);
}

double predation_dx(const PredationForm& f, double x, double y) {
  return std::visit(
      [x, y](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, HollingI>) {
          return g.k1 * y;
        } else if constexpr (std::is_same_v<T, HollingII>) {
          double d = g.k2 + x;
          return g.k1 * g.k2 * y / (d * d);
        } else if constexpr (std::is_same_v<T, HollingIII>) {
          double d = g.k2 + x * x;
          return 2.0 * g.k1 * g.k2 * x * y / (d * d);
        } else if constexpr (std::is_same_v<T, HollingIV>) {
          double d = g.k2 + x + g.k3 * x * x;
          return g.k1 * x * (2.0 * g.k2 + x) * y / (d * d);
        } else {
          return g.k1 * g.px * std::pow(x, g.px - 1.0) * std::pow(y, g.py);
        }
      },
      f);
}

double predation_dy(const PredationForm& f, double x, double y) {
  return std::visit(
      [x, y](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, HollingI>) {
          return g.k1 * x;
        } else if constexpr (std::is_same_v<T, HollingII>) {
          return g.k1 * x / (g.k2 + x);
        } else if constexpr (std::is_same_v<T, HollingIII>) {
          return g.k1 * x * x / (g.k2 + x * x);
        } else if constexpr (std::is_same_v<T, HollingIV>) {
          return g.k1 * x * x / (g.k2 + x + g.k3 * x * x);
        } else {
          return g.k1 * g.py * std::pow(x, g.px) * std::pow(y, g.py - 1.0);
        }
      },
      f);
}

double mortality_value(const MortalityForm& f, double y) {
  return std::visit(
      [y](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearMortality>) {
          return g.k * y;
        } else {
          return g.k * std::pow(y, g.q);
        }
      },
      f);
}

double mortality_deriv(const MortalityForm& f, double y) {
  return std::visit(
      [y](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearMortality>) {
          return g.k;
        } else {
          return g.k * g.q * std::pow(y, g.q - 1.0);
        }
      },
      f);
}

Field field_raw(const ModelSpec& model, double x, double y) {
  double s = growth_value(model.growth, x);
  double g = predation_value(model.predation, x, y);
  double m = mortality_value(model.mortality, y);
  return {s - g, g - m};
}

Mat2 jacobian_raw(const ModelSpec& model, double x, double y) {
  double sp = growth_deriv(model.growth, x);
  double gx = predation_dx(model.predation, x, y);
  double gy = predation_dy(model.predation, x, y);
  double mp = mortality_deriv(model.mortality, y);
  return {sp - gx, -gy, gx, gy - mp};
}

namespace {

void check_state(const State& s) {
  if (!(std::isfinite(s.X) && std::isfinite(s.Y)) || s.X <= 0.0 || s.Y <= 0.0)
    throw std::invalid_argument("state must be strictly positive and finite");
}

}  // namespace

Field eval_field(const ModelSpec& model, const State& s) {
  check_state(s);
  Field f = field_raw(model, s.X, s.Y);
  if (!(std::isfinite(f.dX) && std::isfinite(f.dY)))
    throw std::runtime_error("field evaluation produced a non-finite value");
  return f;
}

Mat2 eval_jacobian(const ModelSpec& model, const State& s) {
  check_state(s);
  Mat2 j = jacobian_raw(model, s.X, s.Y);
  if (!(std::isfinite(j.a) && std::isfinite(j.b) && std::isfinite(j.c) &&
        std::isfinite(j.d)))
    throw std::runtime_error("jacobian evaluation produced a non-finite value");
  return j;
}

EqGenParams equilibrium_gen_params(const ModelSpec& model, const State& eq,
                                   double tol) {
  check_state(eq);
  double s = growth_value(model.growth, eq.X);
  double g = predation_value(model.predation, eq.X, eq.Y);
  double m = mortality_value(model.mortality, eq.Y);
  if (!(s > 0.0)) throw std::domain_error("growth rate S is not positive at the equilibrium");
  if (!(g > 0.0)) throw std::domain_error("predation rate G is not positive at the equilibrium");
  if (!(m > 0.0)) throw std::domain_error("mortality rate M is not positive at the equilibrium");

  // Residual measured against the flux scale; an equilibrium of a realized
  // power-law model may sit at large |S| where an absolute 1e-8 is unfair.
  double scale = std::max({1.0, std::abs(s), std::abs(g), std::abs(m)});
  Field f = field_raw(model, eq.X, eq.Y);
  if (std::abs(f.dX) > tol * scale || std::abs(f.dY) > tol * scale)
    throw std::invalid_argument("state is not an equilibrium of the model");

  EqGenParams p;
  p.beta_s = s / eq.X;
  p.beta_1 = g / eq.X;
  p.beta_2 = g / eq.Y;
  p.beta_m = m / eq.Y;
  p.s_x = eq.X * growth_deriv(model.growth, eq.X) / s;
  p.g_x = eq.X * predation_dx(model.predation, eq.X, eq.Y) / g;
  p.g_y = eq.Y * predation_dy(model.predation, eq.X, eq.Y) / g;
  p.m_y = eq.Y * mortality_deriv(model.mortality, eq.Y) / m;
  return p;
}

Mat2 equilibrium_jacobian(const EqGenParams& p) {
  return {p.beta_1 * (p.s_x - p.g_x), -p.beta_1 * p.g_y,
          p.beta_2 * p.g_x, p.beta_2 * (p.g_y - p.m_y)};
}

Realization realize_power_law(const PowerLawTargets& t) {
  if (!(positive_finite(t.beta_1) && positive_finite(t.beta_2)))
    throw std::invalid_argument("realize_power_law: beta_1, beta_2 must be positive");
  if (!(std::isfinite(t.s_x) && std::isfinite(t.g_x) && std::isfinite(t.g_y) &&
        std::isfinite(t.m_y)))
    throw std::invalid_argument("realize_power_law: elasticities must be finite");

  // With G = X^g_x Y^g_y the per-capita rates at (X*, Y*) satisfy
  //   ln b1 = (g_x - 1) u + g_y v,  ln b2 = g_x u + (g_y - 1) v
  // in u = ln X*, v = ln Y*. The system is singular iff g_x + g_y = 1.
  double det = 1.0 - t.g_x - t.g_y;
  if (std::abs(det) < 1e-12 * (1.0 + std::abs(t.g_x) + std::abs(t.g_y)))
    throw std::domain_error("realize_power_law: g_x + g_y = 1 is singular");

  double lb1 = std::log(t.beta_1);
  double lb2 = std::log(t.beta_2);
  double u = ((t.g_y - 1.0) * lb1 - t.g_y * lb2) / det;
  double v = u + lb1 - lb2;

  double xs = std::exp(u);
  double ys = std::exp(v);
  double ps = t.beta_1 * std::exp(-u * (t.s_x - 1.0));
  double pm = t.beta_2 * std::exp(-v * (t.m_y - 1.0));
  if (!(positive_finite(xs) && positive_finite(ys) && positive_finite(ps) &&
        positive_finite(pm)))
    throw std::domain_error("realize_power_law: solution overflows double range");

  Realization r;
  r.model.growth = PowerGrowth{ps, t.s_x};
  r.model.predation = PowerPredation{1.0, t.g_x, t.g_y};
  r.model.mortality = PowerMortality{pm, t.m_y};
  r.equilibrium = {xs, ys};
  return r;
}

Preset preset(const std::string& name) {
  if (name == "rm") {
    Preset p;
    p.model.growth = LogisticGrowth{2.0, 0.5};
    p.model.predation = HollingII{1.0, 1.0};
    p.model.mortality = LinearMortality{0.5};
    p.start = {1.0, 1.0};
    return p;
  }
  if (name == "lv") {
    Preset p;
    p.model.growth = LinearGrowth{1.0};
    p.model.predation = HollingI{1.0};
    p.model.mortality = LinearMortality{1.0};
    p.start = {1.2, 1.0};
    return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (expected rm or lv)");
}

nlohmann::json model_to_json(const ModelSpec& model) {
  nlohmann::json j;
  j["growth"] = std::visit(
      [](const auto& g) -> nlohmann::json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearGrowth>) {
          return {{"form", "linear"}, {"k1", g.k1}};
        } else if constexpr (std::is_same_v<T, PowerGrowth>) {
          return {{"form", "power"}, {"k1", g.k1}, {"p", g.p}};
        } else if constexpr (std::is_same_v<T, LogisticGrowth>) {
          return {{"form", "logistic"}, {"k1", g.k1}, {"k2", g.k2}};
        } else {
          return {{"form", "allee"}, {"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}};
        }
      },
      model.growth);
  j["predation"] = std::visit(
      [](const auto& g) -> nlohmann::json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, HollingI>) {
          return {{"form", "hollingi"}, {"k1", g.k1}};
        } else if constexpr (std::is_same_v<T, HollingII>) {
          return {{"form", "hollingii"}, {"k1", g.k1}, {"k2", g.k2}};
        } else if constexpr (std::is_same_v<T, HollingIII>) {
          return {{"form", "hollingiii"}, {"k1", g.k1}, {"k2", g.k2}};
        } else if constexpr (std::is_same_v<T, HollingIV>) {
          return {{"form", "hollingiv"}, {"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}};
        } else {
          return {{"form", "power"}, {"k1", g.k1}, {"px", g.px}, {"py", g.py}};
        }
      },
      model.predation);
  j["mortality"] = std::visit(
      [](const auto& g) -> nlohmann::json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LinearMortality>) {
          return {{"form", "linear"}, {"k", g.k}};
        } else {
          return {{"form", "power"}, {"k", g.k}, {"q", g.q}};
        }
      },
      model.mortality);
  return j;
}

namespace {

double jnum(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::invalid_argument(std::string("model json: missing numeric field '") +
                                key + "'");
  return j[key].get<double>();
}

std::string jform(const nlohmann::json& j, const char* section) {
  if (!j.is_object() || !j.contains("form") || !j["form"].is_string())
    throw std::invalid_argument(std::string("model json: section '") + section +
                                "' needs a string 'form'");
  return j["form"].get<std::string>();
}

}  // namespace

ModelSpec model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("growth") || !j.contains("predation") ||
      !j.contains("mortality"))
    throw std::invalid_argument("model json: expected growth/predation/mortality sections");

  ModelSpec m;
  {
    const auto& g = j["growth"];
    std::string form = jform(g, "growth");
    if (form == "linear") m.growth = LinearGrowth{jnum(g, "k1")};
    else if (form == "power") m.growth = PowerGrowth{jnum(g, "k1"), jnum(g, "p")};
    else if (form == "logistic") m.growth = LogisticGrowth{jnum(g, "k1"), jnum(g, "k2")};
    else if (form == "allee") m.growth = AlleeGrowth{jnum(g, "k1"), jnum(g, "k2"), jnum(g, "k3")};
    else throw std::invalid_argument("model json: unknown growth form '" + form + "'");
  }
  {
    const auto& g = j["predation"];
    std::string form = jform(g, "predation");
    if (form == "hollingi") m.predation = HollingI{jnum(g, "k1")};
    else if (form == "hollingii") m.predation = HollingII{jnum(g, "k1"), jnum(g, "k2")};
    else if (form == "hollingiii") m.predation = HollingIII{jnum(g, "k1"), jnum(g, "k2")};
    else if (form == "hollingiv") m.predation = HollingIV{jnum(g, "k1"), jnum(g, "k2"), jnum(g, "k3")};
    else if (form == "power") m.predation = PowerPredation{jnum(g, "k1"), jnum(g, "px"), jnum(g, "py")};
    else throw std::invalid_argument("model json: unknown predation form '" + form + "'");
  }
  {
    const auto& g = j["mortality"];
    std::string form = jform(g, "mortality");
    if (form == "linear") m.mortality = LinearMortality{jnum(g, "k")};
    else if (form == "power") m.mortality = PowerMortality{jnum(g, "k"), jnum(g, "q")};
    else throw std::invalid_argument("model json: unknown mortality form '" + form + "'");
  }
  validate(m);
  return m;
}

void write_model_json(const ModelSpec& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << model_to_json(model).dump(2) << "\n";
}

ModelSpec read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

std::array<std::complex<double>, 2> eigenvalues(const Mat2& m) {
  double tr = m.trace();
  double dt = m.det();
  double disc = tr * tr - 4.0 * dt;
  std::complex<double> l1, l2;
  if (disc >= 0.0) {
    double r = std::sqrt(disc);
    l1 = {0.5 * (tr + r), 0.0};
    l2 = {0.5 * (tr - r), 0.0};
  } else {
    double r = std::sqrt(-disc);
    l1 = {0.5 * tr, 0.5 * r};
    l2 = {0.5 * tr, -0.5 * r};
  }
  if (std::abs(l2 - 1.0) < std::abs(l1 - 1.0)) std::swap(l1, l2);
  return {l1, l2};
}

}  // namespace gmcycles
