#include "gmcycles/integrate.hpp"

namespace gmcycles {

std::vector<TrajectoryPoint> integrate(const ModelSpec& model, const State& start,
                                       double duration, double tol) {
  validate(model);
  if (!(std::isfinite(start.X) && std::isfinite(start.Y)) || start.X <= 0.0 ||
      start.Y <= 0.0)
    throw std::invalid_argument("start state must be strictly positive");
  if (!(std::isfinite(duration) && duration > 0.0))
    throw std::invalid_argument("duration must be positive");

  FieldRhs rhs{&model};
  AdaptiveRk45<2, FieldRhs> stepper(rhs, {start.X, start.Y}, 0.0, tol);
  std::vector<TrajectoryPoint> out;
  out.push_back({0.0, start});
  stepper.advance_to(duration, [&out](double t, const VecN<2>& y, const VecN<2>&) {
    check_quadrant(t, y);
    out.push_back({t, {y[0], y[1]}});
  });
  return out;
}

}  // namespace gmcycles
