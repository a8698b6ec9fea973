#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hjsafe/safety.hpp"

namespace hjsafe {

/// One self-contained subsystem: its dynamics depend only on its own
/// states, so its reachability problem solves independently and exactly.
struct Subsystem {
  std::string name;
  std::shared_ptr<const DynamicsModel> model;
  std::vector<std::size_t> state_map;        // full-state indices, in order
  std::vector<std::size_t> control_map;      // full-control indices
  std::vector<std::size_t> disturbance_map;  // full-disturbance channels
};

std::vector<double> project(std::span<const double> x_full, const Subsystem& sub);
void scatter(std::span<const double> x_sub, const Subsystem& sub,
             std::span<double> x_full);

struct CombinedDecision {
  std::vector<double> control;
  bool override_active = false;
  bool out_of_domain = false;
  double value = 0.0;  // combined (max over subsystems) value
  double band = 0.0;
};

/// Split filter over self-contained subsystems: the full safe set is the
/// intersection of the back-projected subsystem safe sets, so membership is
/// the max of subsystem values. Subsystem solves run independently; this
/// class recombines their filters for queries in the full state space, with
/// one shared contraction level on the combined value.
class Decomposition {
 public:
  Decomposition(std::vector<Subsystem> subsystems, std::size_t full_state_dim,
                std::size_t full_control_dim, std::size_t full_disturbance_dim);

  /// Install one filter per subsystem, same order as the subsystem list.
  void attach(std::vector<std::shared_ptr<SafetyFilter>> filters);

  std::size_t count() const { return subs_.size(); }
  const Subsystem& subsystem(std::size_t i) const { return subs_[i]; }
  SafetyFilter& filter(std::size_t i) { return *filters_[i]; }
  const SafetyFilter& filter(std::size_t i) const { return *filters_[i]; }

  /// max over subsystems of the interpolated subsystem value; +inf when any
  /// subsystem query leaves its grid (unsafe).
  double combined_value(std::span<const double> x_full) const;

  CombinedDecision combined_control(std::span<const double> x_full,
                                    std::span<const double> u_perf) const;

  /// Same geometric schedule as SafetyFilter::contract, applied to the
  /// combined value.
  double contract(std::span<const Violation> violations_full);
  double lambda() const;
  bool emergency() const;

  /// Replace every subsystem's value/bounds in one step and reset lambda.
  void adopt(std::span<const SolveResult> solved, std::span<IntervalField> dbounds);

 private:
  double combined_value_locked(std::span<const double> x_full) const;

  std::vector<Subsystem> subs_;
  std::vector<std::shared_ptr<SafetyFilter>> filters_;
  std::size_t state_dim_;
  std::size_t control_dim_;
  std::size_t disturbance_dim_;
  SafetyFilter::Config schedule_;
  mutable std::mutex mutex_;
  double lambda_ = 0.0;
  bool emergency_ = false;
};

}  // namespace hjsafe
