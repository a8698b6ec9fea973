#include "hjsafe/safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hjsafe {

namespace {

// central node gradient (D- + D+)/2 of each dimension, multilinearly
// interpolated over the cell containing x
std::vector<double> interpolated_costate(const ScalarField& field,
                                         std::span<const double> x) {
  const Grid& grid = field.grid();
  const std::size_t nd = grid.ndims();
  std::vector<double> costate(nd, 0.0);

  // locate the cell (clamped)
  std::vector<std::size_t> base(nd);
  std::vector<double> frac(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto& dim = grid.dim(d);
    double t = (x[d] - dim.min) / grid.spacing(d);
    t = std::clamp(t, 0.0, double(dim.n - 1));
    std::size_t i0 = static_cast<std::size_t>(t);
    if (i0 > dim.n - 2) i0 = dim.n - 2;
    base[d] = i0;
    frac[d] = t - double(i0);
  }

  const std::size_t corners = std::size_t{1} << nd;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t lin = 0;
    for (std::size_t d = 0; d < nd; ++d) {
      const bool hi = (corner >> d) & 1u;
      w *= hi ? frac[d] : 1.0 - frac[d];
      lin += (base[d] + (hi ? 1 : 0)) * grid.stride(d);
    }
    if (w == 0.0) continue;
    for (std::size_t d = 0; d < nd; ++d) {
      auto [left, right] = gradient_at(field, lin, d);
      costate[d] += w * 0.5 * (left + right);
    }
  }
  return costate;
}

}  // namespace

SafetyFilter::State SafetyFilter::make_state(const SolveResult& solved,
                                             IntervalField dbounds, const Config& cfg) {
  if (!solved.converged)
    throw std::invalid_argument("SafetyFilter: value function is not converged");
  dbounds.validate();
  State s;
  s.value = solved.value;
  s.dbounds = std::move(dbounds);
  s.eta_floor = cfg.eta_floor;
  s.min_value = *std::min_element(s.value.values().begin(), s.value.values().end());
  s.lambda = 0.0;
  s.emergency = s.min_value >= 0.0;  // no safe set at all
  return s;
}

SafetyFilter::SafetyFilter(std::shared_ptr<const DynamicsModel> model,
                           const SolveResult& solved, IntervalField dbounds)
    : SafetyFilter(std::move(model), solved, std::move(dbounds), Config{}) {}

SafetyFilter::SafetyFilter(std::shared_ptr<const DynamicsModel> model,
                           const SolveResult& solved, IntervalField dbounds, Config cfg)
    : model_(std::move(model)), cfg_(cfg) {
  if (!model_) throw std::invalid_argument("SafetyFilter: null model");
  if (solved.value.grid().ndims() != model_->state_dim())
    throw std::invalid_argument("SafetyFilter: grid rank does not match model");
  state_ = std::make_shared<State>(make_state(solved, std::move(dbounds), cfg_));
}

std::shared_ptr<const SafetyFilter::State> SafetyFilter::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

FilterDecision SafetyFilter::optimal_control(std::span<const double> x) const {
  const auto s = snapshot();
  FilterDecision d;
  const auto q = interp_ex(s->value, x);
  d.value = q.value;
  d.out_of_domain = q.out_of_domain;

  const auto costate = interpolated_costate(s->value, x);

  // disturbance bounds at the (clamped) query point
  std::vector<Interval> db(s->dbounds.channels());
  for (std::size_t ch = 0; ch < db.size(); ++ch) db[ch] = s->dbounds.at(ch, x);

  const auto ext = extremal_inputs(*model_, x, costate, db);
  d.degenerate = ext.degenerate;
  d.control.assign(ext.u.begin(), ext.u.begin() + model_->control_dim());
  d.worst_disturbance.assign(ext.d.begin(), ext.d.begin() + model_->disturbance_dim());
  d.override_active = true;
  return d;
}

FilterDecision SafetyFilter::filter(std::span<const double> x,
                                    std::span<const double> u_perf) const {
  if (u_perf.size() != model_->control_dim())
    throw std::invalid_argument("filter: control dim mismatch");
  const auto s = snapshot();
  const auto q = interp_ex(s->value, x);
  const double eta = std::max(s->eta_floor, 0.5 * max_cell_jump(s->value, x));

  if (!q.out_of_domain && q.value <= -s->lambda - eta) {
    FilterDecision d;
    d.control.assign(u_perf.begin(), u_perf.end());
    d.override_active = false;
    d.value = q.value;
    d.band = eta;
    return d;
  }
  FilterDecision d = optimal_control(x);
  d.band = eta;
  return d;
}

double SafetyFilter::contract(std::span<const Violation> violations) {
  std::lock_guard lock(mutex_);
  if (violations.empty()) return state_->lambda;

  // deepest value among violation sites decides the schedule step
  double deepest = -std::numeric_limits<double>::infinity();
  for (const auto& v : violations)
    deepest = std::max(deepest, -interp(state_->value, v.x));

  const double cap = cfg_.cap_fraction * std::abs(state_->min_value);
  double lambda = cfg_.contract_base;
  bool emergency = false;
  while (lambda <= deepest) {
    lambda *= cfg_.contract_ratio;
    if (lambda > cap) {
      lambda = cap;
      emergency = true;
      break;
    }
  }
  lambda = std::max(lambda, state_->lambda);

  auto next = std::make_shared<State>(*state_);
  next->lambda = lambda;
  next->emergency = next->emergency || emergency;
  state_ = std::move(next);
  return lambda;
}

void SafetyFilter::adopt(const SolveResult& solved, IntervalField dbounds) {
  if (solved.value.grid().ndims() != model_->state_dim())
    throw std::invalid_argument("adopt: grid rank does not match model");
  auto next = std::make_shared<State>(make_state(solved, std::move(dbounds), cfg_));
  std::lock_guard lock(mutex_);
  state_ = std::move(next);
}

double SafetyFilter::lambda() const { return snapshot()->lambda; }
bool SafetyFilter::emergency() const { return snapshot()->emergency; }

double SafetyFilter::value_at(std::span<const double> x) const {
  return interp(snapshot()->value, x);
}

Interval SafetyFilter::dbound_at(std::size_t channel, std::span<const double> x) const {
  return snapshot()->dbounds.at(channel, x);
}

IntervalField SafetyFilter::dbounds_snapshot() const { return snapshot()->dbounds; }
ScalarField SafetyFilter::value_snapshot() const { return snapshot()->value; }

}  // namespace hjsafe
