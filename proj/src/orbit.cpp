#include "gmcycles/orbit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gmcycles/integrate.hpp"

namespace gmcycles {

namespace {

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

double dist2(const VecN<2>& a, const VecN<2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

struct Crossing {
  double t;
  VecN<2> y;
};

// Upward crossings of gamma1 = level on a dense segment, refined by
// bisection on the interpolant until the bracket is below 1e-12.
void scan_crossings(const DenseSolution<2>& sol, double level,
                    std::vector<Crossing>& out) {
  const auto& nodes = sol.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    check_quadrant(nodes[i].t, nodes[i].y);
    double g0 = nodes[i - 1].y[0] - level;
    double g1 = nodes[i].y[0] - level;
    if (!(g0 < 0.0 && g1 >= 0.0)) continue;
    double lo = nodes[i - 1].t, hi = nodes[i].t;
    while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
      double mid = 0.5 * (lo + hi);
      if (sol.eval(mid)[0] - level < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    double tc = 0.5 * (lo + hi);
    Crossing c{tc, sol.eval(tc)};
    // require the prey component to actually be rising
    if (nodes[i].y[0] > nodes[i - 1].y[0]) out.push_back(c);
  }
}

// Integrate forward in chunks, collecting upward crossings of the level,
// until stop(crossings) says done or the horizon runs out. The predicate is
// consulted after every single crossing, so a stop meaning "first return"
// really does cut at the first one. Crossings before min_t are discarded; a
// hunt that starts exactly on the section would otherwise report itself as an
// instant return. Returns false if the horizon was exhausted.
template <class Stop>
bool hunt(const ModelSpec& model, VecN<2>& y, double tol, double level,
          double horizon, double min_t, std::vector<Crossing>& crossings,
          Stop&& stop) {
  FieldRhs rhs{&model};
  double chunk = 50.0;
  double t = 0.0;
  while (t < horizon) {
    double t1 = std::min(t + chunk, horizon);
    DenseSolution<2> sol;
    AdaptiveRk45<2, FieldRhs> stepper(rhs, y, t, tol);
    sol.push(t, stepper.y(), stepper.f());
    stepper.advance_to(t1, [&sol](double tt, const VecN<2>& yy, const VecN<2>& ff) {
      sol.push(tt, yy, ff);
    });
    std::vector<Crossing> fresh;
    scan_crossings(sol, level, fresh);
    y = stepper.y();
    t = t1;
    for (const Crossing& c : fresh) {
      if (c.t < min_t) continue;
      crossings.push_back(c);
      if (stop(crossings)) return true;
    }
  }
  return false;
}

}  // namespace

PeriodicOrbit make_orbit(double period, std::vector<double> g1,
                         std::vector<double> g2) {
  if (!(std::isfinite(period) && period > 0.0))
    throw std::invalid_argument("orbit period must be positive");
  if (g1.size() != g2.size()) throw std::invalid_argument("orbit sample lengths differ");
  if (!power_of_two(g1.size()))
    throw std::invalid_argument("orbit sample count must be a power of two");
  for (std::size_t j = 0; j < g1.size(); ++j)
    if (!(std::isfinite(g1[j]) && std::isfinite(g2[j])) || g1[j] <= 0.0 || g2[j] <= 0.0)
      throw std::invalid_argument("orbit samples must be strictly positive");
  PeriodicOrbit o;
  o.period = period;
  o.gamma1 = std::move(g1);
  o.gamma2 = std::move(g2);
  return o;
}

PeriodicOrbit find_limit_cycle(const ModelSpec& model, const State& start,
                               const CycleOptions& opt) {
  validate(model);
  if (!(std::isfinite(start.X) && std::isfinite(start.Y)) || start.X <= 0.0 ||
      start.Y <= 0.0)
    throw std::invalid_argument("start state must be strictly positive");
  if (!power_of_two(opt.n)) throw std::invalid_argument("grid size must be a power of two");
  if (!(opt.burn_in > 0.0 && opt.search_horizon > 0.0))
    throw std::invalid_argument("burn_in and search_horizon must be positive");

  FieldRhs rhs{&model};

  // Transient burn-in; keep the tail to estimate a section level.
  VecN<2> y{start.X, start.Y};
  double window = std::min(50.0, 0.5 * opt.burn_in);
  {
    AdaptiveRk45<2, FieldRhs> stepper(rhs, y, 0.0, opt.tol);
    stepper.advance_to(opt.burn_in - window,
                       [](double t, const VecN<2>& yy, const VecN<2>&) {
                         check_quadrant(t, yy);
                       });
    y = stepper.y();
  }
  double x_ref;
  {
    DenseSolution<2> tail;
    AdaptiveRk45<2, FieldRhs> stepper(rhs, y, 0.0, opt.tol);
    tail.push(0.0, stepper.y(), stepper.f());
    stepper.advance_to(window, [&tail](double tt, const VecN<2>& yy, const VecN<2>& ff) {
      check_quadrant(tt, yy);
      tail.push(tt, yy, ff);
    });
    y = stepper.y();
    // time average of gamma1 over the window, trapezoid on a fine grid
    std::size_t m = 4096;
    double acc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      double t = window * static_cast<double>(j) / static_cast<double>(m);
      double w = (j == 0 || j == m) ? 0.5 : 1.0;
      acc += w * tail.eval(t)[0];
    }
    x_ref = acc / static_cast<double>(m);
  }

  // Hunt returns to the provisional section until the return map settles.
  std::vector<Crossing> crossings;
  std::size_t mult = 0, hit = 0;
  auto settled = [&](const std::vector<Crossing>& cs) {
    for (std::size_t m = 1; m <= 3; ++m) {
      std::size_t i = cs.size() - 1;
      if (i < m) continue;
      double scale = std::max(1.0, std::hypot(cs[i].y[0], cs[i].y[1]));
      if (dist2(cs[i].y, cs[i - m].y) < 1e-7 * scale) {
        mult = m;
        hit = i;
        return true;
      }
    }
    return false;
  };
  bool ok = hunt(model, y, opt.tol, x_ref, opt.search_horizon, 0.0, crossings,
                 settled);
  if (!ok) {
    if (crossings.empty())
      throw NoCycleError("no cycle found: the section was never crossed within the horizon");
    throw NotConvergedError(
        "limit cycle search did not converge: returns to the section keep moving");
  }
  double period0 = crossings[hit].t - crossings[hit - mult].t;
  VecN<2> anchor = crossings[hit].y;

  // The window mean depends on the burn-in phase; replace it by the cycle
  // mean of gamma1, which is intrinsic, and re-anchor the grid there.
  double x_bar;
  {
    std::vector<double> times(opt.n);
    for (std::size_t j = 0; j < opt.n; ++j)
      times[j] = period0 * static_cast<double>(j) / static_cast<double>(opt.n);
    double acc = 0.0;
    integrate_to_times<2>(rhs, anchor, 0.0, times, opt.tol,
                          [&acc](std::size_t, double, const VecN<2>& yy) {
                            acc += yy[0];
                          });
    x_bar = acc / static_cast<double>(opt.n);
  }

  std::vector<Crossing> rc;
  VecN<2> yh = anchor;
  if (!hunt(model, yh, opt.tol, x_bar, 2.5 * period0, 0.0, rc,
            [](const std::vector<Crossing>& cs) { return !cs.empty(); }))
    throw NotConvergedError("re-anchoring the cycle on its mean section failed");
  VecN<2> anchor2 = rc.front().y;

  // Period: first return to the re-anchored point.
  rc.clear();
  yh = anchor2;
  double scale2 = std::max(1.0, std::hypot(anchor2[0], anchor2[1]));
  auto returned = [&](const std::vector<Crossing>& cs) {
    return dist2(cs.back().y, anchor2) < 1e-5 * scale2;
  };
  if (!hunt(model, yh, opt.tol, x_bar, (static_cast<double>(mult) + 1.5) * period0,
            0.1 * period0, rc, returned))
    throw NotConvergedError("period refinement failed: the orbit does not return");
  double period = rc.back().t;

  // Final sampling pass plus the closure point at t = T.
  std::vector<double> times(opt.n + 1);
  for (std::size_t j = 0; j <= opt.n; ++j)
    times[j] = period * static_cast<double>(j) / static_cast<double>(opt.n);
  std::vector<double> g1(opt.n), g2(opt.n);
  VecN<2> closure{0.0, 0.0};
  integrate_to_times<2>(rhs, anchor2, 0.0, times, opt.tol,
                        [&](std::size_t j, double, const VecN<2>& yy) {
                          if (j < opt.n) {
                            g1[j] = yy[0];
                            g2[j] = yy[1];
                          } else {
                            closure = yy;
                          }
                        });

  double rel = dist2(closure, anchor2) / std::hypot(anchor2[0], anchor2[1]);
  if (rel > opt.closure_tol)
    throw NotConvergedError("detected orbit fails the closure test");

  // Minimality: no integer fraction of the period may close.
  for (std::size_t m = 2; m <= 8; ++m) {
    std::size_t j = (opt.n + m / 2) / m;
    double d = std::hypot(g1[j] - g1[0], g2[j] - g2[0]);
    if (d <= 100.0 * opt.closure_tol * scale2)
      throw NotConvergedError("detected period is not minimal");
  }

  return make_orbit(period, std::move(g1), std::move(g2));
}

namespace {

struct VariationalRhs {
  const ModelSpec* model;
  // y = (X, Y, m11, m21, m12, m22); columns of M evolve by the Jacobian.
  void operator()(double, const VecN<6>& y, VecN<6>& dy) const {
    Field f = field_raw(*model, y[0], y[1]);
    Mat2 j = jacobian_raw(*model, y[0], y[1]);
    dy[0] = f.dX;
    dy[1] = f.dY;
    dy[2] = j.a * y[2] + j.b * y[3];
    dy[3] = j.c * y[2] + j.d * y[3];
    dy[4] = j.a * y[4] + j.b * y[5];
    dy[5] = j.c * y[4] + j.d * y[5];
  }
};

}  // namespace

MonodromyResult monodromy(const ModelSpec& model, const PeriodicOrbit& orbit,
                          double tol) {
  if (orbit.size() == 0) throw std::invalid_argument("empty orbit");
  VariationalRhs rhs{&model};
  VecN<6> y0{orbit.gamma1[0], orbit.gamma2[0], 1.0, 0.0, 0.0, 1.0};
  AdaptiveRk45<6, VariationalRhs> stepper(rhs, y0, 0.0, tol);
  stepper.advance_to(orbit.period, [](double, const VecN<6>&, const VecN<6>&) {});
  const VecN<6>& y = stepper.y();

  MonodromyResult r;
  r.m_t = {y[2], y[4], y[3], y[5]};
  auto eig = eigenvalues(r.m_t);
  r.trivial = eig[0];
  r.nontrivial = eig[1];
  r.trivial_deviation = std::abs(r.trivial - 1.0);
  r.degenerate = std::abs(r.m_t.trace() * r.m_t.trace() - 4.0 * r.m_t.det()) <
                     1e-12 ||
                 eig[0].imag() != 0.0;
  r.warn = r.trivial_deviation > 1e-2;

  double acc = 0.0;
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    Mat2 jac = jacobian_raw(model, orbit.gamma1[j], orbit.gamma2[j]);
    acc += jac.trace();
  }
  r.trace_integral = acc * orbit.period / static_cast<double>(orbit.size());
  return r;
}

double liouville_gap(const MonodromyResult& m) {
  double e = std::exp(m.trace_integral);
  return std::abs(m.m_t.det() - e) / e;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_orbit_csv(const PeriodicOrbit& orbit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "# T=" << fmt17(orbit.period) << "\n";
  out << "t,gamma1,gamma2\n";
  for (std::size_t j = 0; j < orbit.size(); ++j)
    out << fmt17(orbit.time_at(j)) << "," << fmt17(orbit.gamma1[j]) << ","
        << fmt17(orbit.gamma2[j]) << "\n";
}

PeriodicOrbit read_orbit_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# T=", 0) != 0)
    throw std::runtime_error("orbit csv: missing '# T=' header");
  double period = std::stod(line.substr(4));
  if (!std::getline(in, line) || line != "t,gamma1,gamma2")
    throw std::runtime_error("orbit csv: missing column header");
  std::vector<double> g1, g2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tok;
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, tok, ','))
        throw std::runtime_error("orbit csv: malformed row '" + line + "'");
      vals[i] = std::stod(tok);
    }
    g1.push_back(vals[1]);
    g2.push_back(vals[2]);
  }
  return make_orbit(period, std::move(g1), std::move(g2));
}

nlohmann::json orbit_to_json(const PeriodicOrbit& orbit) {
  nlohmann::json j;
  j["T"] = orbit.period;
  j["n"] = orbit.size();
  j["gamma1"] = orbit.gamma1;
  j["gamma2"] = orbit.gamma2;
  return j;
}

PeriodicOrbit orbit_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("T") || !j.contains("n") ||
      !j.contains("gamma1") || !j.contains("gamma2"))
    throw std::invalid_argument("orbit json: expected T, n, gamma1, gamma2");
  auto g1 = j["gamma1"].get<std::vector<double>>();
  auto g2 = j["gamma2"].get<std::vector<double>>();
  if (j["n"].get<std::size_t>() != g1.size())
    throw std::invalid_argument("orbit json: n inconsistent with sample arrays");
  return make_orbit(j["T"].get<double>(), std::move(g1), std::move(g2));
}

void write_orbit_json(const PeriodicOrbit& orbit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << orbit_to_json(orbit).dump(2) << "\n";
}

PeriodicOrbit read_orbit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return orbit_from_json(j);
}

}  // namespace gmcycles
