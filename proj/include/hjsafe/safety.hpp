#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "hjsafe/dynamics.hpp"
#include "hjsafe/grid.hpp"
#include "hjsafe/interval_field.hpp"
#include "hjsafe/solver.hpp"

namespace hjsafe {

struct FilterDecision {
  std::vector<double> control;
  std::vector<double> worst_disturbance;  // maximizing d* from the extremal rule
  bool override_active = false;
  bool degenerate = false;     // costate vanished, tie-rule control returned
  bool out_of_domain = false;  // query clamped to the grid, treated as unsafe
  double value = 0.0;          // interpolated V*(x)
  double band = 0.0;           // switch band eta used for this query
};

struct Violation {
  std::vector<double> x;
  double margin = 0.0;
};

/// Least-restrictive safety filter around a converged value function.
/// Passes the performance control through while V*(x) <= -lambda - eta and
/// overrides with the optimal safety control otherwise. Out-of-grid states
/// are unsafe by definition. contract() retreats to a deeper sublevel set
/// after disturbance-bound violations; adopt() installs a freshly converged
/// value function and resets the contraction.
class SafetyFilter {
 public:
  struct Config {
    double eta_floor = 1e-5;       // lower bound on the switch band
    double contract_base = 0.05;   // geometric contraction schedule
    double contract_ratio = 1.5;
    double cap_fraction = 0.8;     // lambda cap as a fraction of |min V*|
  };

  SafetyFilter(std::shared_ptr<const DynamicsModel> model, const SolveResult& solved,
               IntervalField dbounds);
  SafetyFilter(std::shared_ptr<const DynamicsModel> model, const SolveResult& solved,
               IntervalField dbounds, Config cfg);

  FilterDecision filter(std::span<const double> x, std::span<const double> u_perf) const;

  /// argmin_u max_d <grad V*(x), f(x,u,d)> with the costate interpolated
  /// from central node gradients.
  FilterDecision optimal_control(std::span<const double> x) const;

  /// Raise lambda to the smallest schedule value excluding every violation
  /// site from the contracted set {V <= -lambda}. Returns the new lambda;
  /// never decreases it. An empty list leaves lambda unchanged.
  double contract(std::span<const Violation> violations);

  /// Replace value and bounds atomically between filter calls; resets
  /// lambda. Rejects non-converged solves.
  void adopt(const SolveResult& solved, IntervalField dbounds);

  double lambda() const;
  bool emergency() const;
  double value_at(std::span<const double> x) const;
  /// Current disturbance interval interpolated at x, per channel.
  Interval dbound_at(std::size_t channel, std::span<const double> x) const;
  IntervalField dbounds_snapshot() const;
  ScalarField value_snapshot() const;

  const DynamicsModel& model() const { return *model_; }

 private:
  struct State {
    ScalarField value;
    IntervalField dbounds;
    double eta_floor = 0.0;
    double min_value = 0.0;
    double lambda = 0.0;
    bool emergency = false;
  };

  std::shared_ptr<const State> snapshot() const;
  static State make_state(const SolveResult& solved, IntervalField dbounds,
                          const Config& cfg);

  std::shared_ptr<const DynamicsModel> model_;
  Config cfg_;
  mutable std::mutex mutex_;
  std::shared_ptr<const State> state_;
};

}  // namespace hjsafe
