#include "hjsafe/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hjsafe {

std::vector<double> project(std::span<const double> x_full, const Subsystem& sub) {
  std::vector<double> x(sub.state_map.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_full[sub.state_map[i]];
  return x;
}

void scatter(std::span<const double> x_sub, const Subsystem& sub,
             std::span<double> x_full) {
  for (std::size_t i = 0; i < sub.state_map.size(); ++i)
    x_full[sub.state_map[i]] = x_sub[i];
}

namespace {

void check_cover(const std::vector<Subsystem>& subs, std::size_t dim,
                 std::vector<std::size_t> Subsystem::* map, const char* what) {
  std::vector<char> seen(dim, 0);
  for (const auto& s : subs) {
    for (std::size_t i : s.*map) {
      if (i >= dim) throw std::invalid_argument(std::string(what) + ": index out of range");
      if (seen[i]) throw std::invalid_argument(std::string(what) + ": index maps overlap");
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::invalid_argument(std::string(what) + ": index maps do not cover all entries");
}

}  // namespace

Decomposition::Decomposition(std::vector<Subsystem> subsystems, std::size_t full_state_dim,
                             std::size_t full_control_dim,
                             std::size_t full_disturbance_dim)
    : subs_(std::move(subsystems)),
      state_dim_(full_state_dim),
      control_dim_(full_control_dim),
      disturbance_dim_(full_disturbance_dim) {
  if (subs_.empty()) throw std::invalid_argument("Decomposition: no subsystems");
  for (const auto& s : subs_) {
    if (!s.model) throw std::invalid_argument("Decomposition: null model");
    if (s.state_map.size() != s.model->state_dim() ||
        s.control_map.size() != s.model->control_dim() ||
        s.disturbance_map.size() != s.model->disturbance_dim())
      throw std::invalid_argument("Decomposition: index map sizes do not match model");
  }
  check_cover(subs_, state_dim_, &Subsystem::state_map, "state_map");
  check_cover(subs_, control_dim_, &Subsystem::control_map, "control_map");
  check_cover(subs_, disturbance_dim_, &Subsystem::disturbance_map, "disturbance_map");
}

void Decomposition::attach(std::vector<std::shared_ptr<SafetyFilter>> filters) {
  if (filters.size() != subs_.size())
    throw std::invalid_argument("Decomposition: one filter per subsystem");
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    if (!filters[i]) throw std::invalid_argument("Decomposition: null filter");
    if (&filters[i]->model() == nullptr)
      throw std::invalid_argument("Decomposition: filter without model");
  }
  std::lock_guard lock(mutex_);
  filters_ = std::move(filters);
}

double Decomposition::combined_value_locked(std::span<const double> x_full) const {
  double value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    const auto xs = project(x_full, subs_[i]);
    const auto dec = filters_[i]->optimal_control(xs);
    if (dec.out_of_domain) return std::numeric_limits<double>::infinity();
    value = std::max(value, dec.value);
  }
  return value;
}

double Decomposition::combined_value(std::span<const double> x_full) const {
  std::lock_guard lock(mutex_);
  if (filters_.empty()) throw std::logic_error("Decomposition: filters not attached");
  return combined_value_locked(x_full);
}

CombinedDecision Decomposition::combined_control(std::span<const double> x_full,
                                                 std::span<const double> u_perf) const {
  if (x_full.size() != state_dim_ || u_perf.size() != control_dim_)
    throw std::invalid_argument("combined_control: dimension mismatch");
  std::lock_guard lock(mutex_);
  if (filters_.empty()) throw std::logic_error("Decomposition: filters not attached");

  CombinedDecision out;
  out.value = -std::numeric_limits<double>::infinity();
  double band = 0.0;
  std::vector<FilterDecision> decisions(subs_.size());
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    const auto xs = project(x_full, subs_[i]);
    decisions[i] = filters_[i]->filter(xs, std::vector<double>(subs_[i].control_map.size(), 0.0));
    if (decisions[i].out_of_domain) {
      out.out_of_domain = true;
      out.value = std::numeric_limits<double>::infinity();
    } else {
      out.value = std::max(out.value, decisions[i].value);
    }
    band = std::max(band, decisions[i].band);
  }
  out.band = band;

  if (!out.out_of_domain && out.value <= -lambda_ - band) {
    out.control.assign(u_perf.begin(), u_perf.end());
    out.override_active = false;
    return out;
  }

  // override: every channel takes its subsystem's optimal safety value
  out.override_active = true;
  out.control.assign(control_dim_, 0.0);
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    const auto xs = project(x_full, subs_[i]);
    const auto dec = filters_[i]->optimal_control(xs);
    for (std::size_t j = 0; j < subs_[i].control_map.size(); ++j)
      out.control[subs_[i].control_map[j]] = dec.control[j];
  }
  return out;
}

double Decomposition::contract(std::span<const Violation> violations_full) {
  std::lock_guard lock(mutex_);
  if (filters_.empty()) throw std::logic_error("Decomposition: filters not attached");
  if (violations_full.empty()) return lambda_;

  double deepest = -std::numeric_limits<double>::infinity();
  for (const auto& v : violations_full)
    deepest = std::max(deepest, -combined_value_locked(v.x));

  // conservative |min V| estimate: the deepest any subsystem can certify
  double min_combined = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    const auto field = filters_[i]->value_snapshot();
    const double m = *std::min_element(field.values().begin(), field.values().end());
    min_combined = std::max(min_combined, m);
  }
  const double cap = schedule_.cap_fraction * std::abs(std::min(min_combined, 0.0));

  double lambda = schedule_.contract_base;
  bool emergency = min_combined >= 0.0;
  while (lambda <= deepest) {
    lambda *= schedule_.contract_ratio;
    if (lambda > cap) {
      lambda = cap;
      emergency = true;
      break;
    }
  }
  lambda_ = std::max(lambda_, lambda);
  emergency_ = emergency_ || emergency;
  return lambda_;
}

double Decomposition::lambda() const {
  std::lock_guard lock(mutex_);
  return lambda_;
}

bool Decomposition::emergency() const {
  std::lock_guard lock(mutex_);
  return emergency_;
}

void Decomposition::adopt(std::span<const SolveResult> solved,
                          std::span<IntervalField> dbounds) {
  if (solved.size() != subs_.size() || dbounds.size() != subs_.size())
    throw std::invalid_argument("adopt: one result per subsystem");
  std::lock_guard lock(mutex_);
  if (filters_.empty()) throw std::logic_error("Decomposition: filters not attached");
  for (std::size_t i = 0; i < subs_.size(); ++i)
    filters_[i]->adopt(solved[i], std::move(dbounds[i]));
  lambda_ = 0.0;
}

}  // namespace hjsafe
