#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gmcycles/model.hpp"

namespace gmcycles {

template <std::size_t N>
using VecN = std::array<double, N>;

// Accepted step endpoint with its derivative, enough for cubic Hermite
// interpolation between neighbors.
template <std::size_t N>
struct DenseNode {
  double t;
  VecN<N> y;
  VecN<N> f;
};

template <std::size_t N>
class DenseSolution {
 public:
  void push(double t, const VecN<N>& y, const VecN<N>& f) {
    nodes_.push_back({t, y, f});
  }

  const std::vector<DenseNode<N>>& nodes() const { return nodes_; }
  double t_front() const { return nodes_.front().t; }
  double t_back() const { return nodes_.back().t; }
  const VecN<N>& y_back() const { return nodes_.back().y; }

  VecN<N> eval(double t) const {
    if (nodes_.empty()) throw std::logic_error("empty dense solution");
    if (t <= nodes_.front().t) return nodes_.front().y;
    if (t >= nodes_.back().t) return nodes_.back().y;
    // first node with node.t > t
    std::size_t lo = 0, hi = nodes_.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (nodes_[mid].t <= t)
        lo = mid;
      else
        hi = mid;
    }
    const auto& n0 = nodes_[lo];
    const auto& n1 = nodes_[hi];
    double h = n1.t - n0.t;
    double s = (t - n0.t) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    double h10 = s3 - 2.0 * s2 + s;
    double h01 = -2.0 * s3 + 3.0 * s2;
    double h11 = s3 - s2;
    VecN<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = h00 * n0.y[i] + h10 * h * n0.f[i] + h01 * n1.y[i] + h11 * h * n1.f[i];
    return out;
  }

 private:
  std::vector<DenseNode<N>> nodes_;
};

// Dormand-Prince 5(4) with PI-free step control and FSAL. The right-hand
// side is rhs(t, y, dy); non-finite stage values reject the step.
template <std::size_t N, class Rhs>
class AdaptiveRk45 {
 public:
  AdaptiveRk45(Rhs rhs, const VecN<N>& y0, double t0, double tol)
      : rhs_(rhs), t_(t0), y_(y0), tol_(tol) {
    if (!(tol >= 1e-12 && tol <= 1e-3))
      throw std::invalid_argument("integration tolerance must lie in [1e-12, 1e-3]");
    rhs_(t_, y_, f_);
    if (!finite(f_)) throw std::runtime_error("right-hand side not finite at the initial state");
    double ynorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      ynorm = std::max(ynorm, std::abs(y_[i]));
      fnorm = std::max(fnorm, std::abs(f_[i]));
    }
    h_ = 0.01 * (1.0 + ynorm) / (1.0 + fnorm);
  }

  double t() const { return t_; }
  const VecN<N>& y() const { return y_; }
  const VecN<N>& f() const { return f_; }

  // Advance to exactly t_target (> t), invoking on_node(t, y, f) after every
  // accepted step including the final clamped one.
  template <class OnNode>
  void advance_to(double t_target, OnNode&& on_node) {
    while (t_ < t_target) {
      double h = std::min(h_, t_target - t_);
      bool clamped = h < h_;
      VecN<N> y_new, f_new;
      double err = 0.0;
      bool ok = try_step(h, y_new, f_new, err);
      if (ok && err <= 1.0) {
        t_ = (t_ + h >= t_target) ? t_target : t_ + h;
        y_ = y_new;
        f_ = f_new;
        if (!clamped) h_ *= factor(err);
        on_node(t_, y_, f_);
      } else {
        double fac = ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
        if (clamped)
          h_ = h * fac;
        else
          h_ *= fac;
        if (h_ < 1e-14 * std::max(1.0, std::abs(t_)))
          throw std::runtime_error("integration step size underflow");
      }
    }
  }

 private:
  static bool finite(const VecN<N>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  static double factor(double err) {
    if (err <= 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
  }

  bool try_step(double h, VecN<N>& y_out, VecN<N>& f_out, double& err) {
    // Dormand-Prince tableau.
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                            b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = b1 - 5179.0 / 57600.0, e3 = b3 - 7571.0 / 16695.0,
                            e4 = b4 - 393.0 / 640.0, e5 = b5 + 92097.0 / 339200.0,
                            e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

    VecN<N> k2, k3, k4, k5, k6, tmp;
    const VecN<N>& k1 = f_;  // FSAL

    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1[i];
    rhs_(t_ + h / 5.0, tmp, k2);
    if (!finite(k2)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs_(t_ + 3.0 * h / 10.0, tmp, k3);
    if (!finite(k3)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_(t_ + 4.0 * h / 5.0, tmp, k4);
    if (!finite(k4)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_(t_ + 8.0 * h / 9.0, tmp, k5);
    if (!finite(k5)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs_(t_ + h, tmp, k6);
    if (!finite(k6)) return false;

    for (std::size_t i = 0; i < N; ++i)
      y_out[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                              b5 * k5[i] + b6 * k6[i]);
    rhs_(t_ + h, y_out, f_out);  // stage 7, reused as k1 of the next step
    if (!finite(y_out) || !finite(f_out)) return false;

    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * f_out[i]);
      double sc = tol_ + tol_ * std::max(std::abs(y_[i]), std::abs(y_out[i]));
      acc += (e / sc) * (e / sc);
    }
    err = std::sqrt(acc / static_cast<double>(N));
    return true;
  }

  Rhs rhs_;
  double t_;
  VecN<N> y_, f_;
  double tol_;
  double h_ = 1e-4;
};

// Convenience drivers.

template <std::size_t N, class Rhs>
DenseSolution<N> integrate_dense(Rhs rhs, const VecN<N>& y0, double t0,
                                 double t1, double tol) {
  AdaptiveRk45<N, Rhs> stepper(rhs, y0, t0, tol);
  DenseSolution<N> sol;
  sol.push(t0, stepper.y(), stepper.f());
  stepper.advance_to(t1, [&sol](double t, const VecN<N>& y, const VecN<N>& f) {
    sol.push(t, y, f);
  });
  return sol;
}

// Steps land exactly on each requested time; on_sample(index, t, y) fires per
// target. Times must be nondecreasing and start at or after t0.
template <std::size_t N, class Rhs, class OnSample>
VecN<N> integrate_to_times(Rhs rhs, const VecN<N>& y0, double t0,
                           const std::vector<double>& times, double tol,
                           OnSample&& on_sample) {
  AdaptiveRk45<N, Rhs> stepper(rhs, y0, t0, tol);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < stepper.t() - 1e-12 * std::max(1.0, std::abs(stepper.t())))
      throw std::invalid_argument("sample times must be nondecreasing");
    if (times[i] > stepper.t())
      stepper.advance_to(times[i], [](double, const VecN<N>&, const VecN<N>&) {});
    on_sample(i, times[i], stepper.y());
  }
  return stepper.y();
}

// Field right-hand side over the positive quadrant.
struct FieldRhs {
  const ModelSpec* model;
  void operator()(double, const VecN<2>& y, VecN<2>& dy) const {
    Field f = field_raw(*model, y[0], y[1]);
    dy[0] = f.dX;
    dy[1] = f.dY;
  }
};

// Accepted states may not cross the axes beyond roundoff.
inline void check_quadrant(double t, const VecN<2>& y) {
  if (y[0] < -1e-9 || y[1] < -1e-9)
    throw std::runtime_error("trajectory left the positive quadrant near t = " +
                             std::to_string(t));
}

struct TrajectoryPoint {
  double t;
  State y;
};

// Accepted-step trajectory of the predator-prey field.
std::vector<TrajectoryPoint> integrate(const ModelSpec& model, const State& start,
                                       double duration, double tol = 1e-10);

}  // namespace gmcycles
