#pragma once

#include <cstddef>
#include <vector>

#include "hjsafe/dynamics.hpp"
#include "hjsafe/grid.hpp"
#include "hjsafe/interval_field.hpp"

namespace hjsafe {

struct SolveConfig {
  double cfl_factor = 0.8;   // in (0, 1]
  double tolerance = 1e-3;   // residual threshold, value units per unit backward time
  std::size_t max_iters = 20000;
  /// Numerical Hamiltonian. Godunov upwinding is exact for models whose
  /// input channels each feed a single state row (every model here) and
  /// reaches the discrete fixed point without the interior dissipation bias
  /// of Lax-Friedrichs; LF is kept as a cross-check mode.
  enum class Scheme { kGodunov, kLaxFriedrichs } scheme = Scheme::kGodunov;
  enum class Dissipation { kPerNode, kGlobal } dissipation = Dissipation::kPerNode;
  unsigned threads = 0;      // 0 = hardware concurrency

  void validate() const;
};

struct SolveResult {
  ScalarField value;  // converged V*
  std::size_t iterations = 0;
  double dt = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // max |dV|/dt per iteration
  std::vector<double> wall_ms_history;   // cumulative wall clock per iteration
  std::size_t nodes_per_sweep = 0;
};

/// Two-stage coarse-then-fine solve.
struct CoarseToFineResult {
  SolveResult coarse;
  SolveResult fine;  // fine.value is the final V*
  double wall_seconds = 0.0;
};

/// CFL-limited time step: dt = cfl_factor / max over nodes of
/// sum_i alpha_i(x)/dx_i, with alpha from flow_bounds. Throws when the flow
/// is identically zero over the grid.
double cfl_dt(const Grid& grid, const DynamicsModel& model, const IntervalField& dbounds,
              double cfl_factor, unsigned threads = 0);

/// One step of the variational-inequality recursion:
///   Hhat = H(x, (D+ + D-)/2) - sum_i alpha_i (D+_i - D-_i)/2
///   V_new = max(c, V + dt * Hhat)
/// Throws when dt violates the CFL bound.
ScalarField vi_step(const ScalarField& value, const ScalarField& constraint,
                    const DynamicsModel& model, const IntervalField& dbounds, double dt,
                    const SolveConfig& cfg = {});

/// Iterate vi_step to a fixed point. `init` is the constraint itself for a
/// cold solve, a previous V* for a warm update, or a resampled coarse V* for
/// the refinement stage. Non-convergence at max_iters is returned flagged;
/// a residual growing 10x above its running minimum throws (divergence).
SolveResult solve(const ScalarField& init, const ScalarField& constraint,
                  const DynamicsModel& model, const IntervalField& dbounds,
                  const SolveConfig& cfg);

/// Coarse grid first, then refine: cold (or warm, when warm_init_fine is
/// given) solve on the coarse grid against resampled inputs, resample the
/// converged coarse V* onto the fine grid, and finish with a warm solve.
CoarseToFineResult solve_coarse_to_fine(const ScalarField& constraint_fine,
                                        const DynamicsModel& model,
                                        const IntervalField& dbounds_fine,
                                        const Grid& coarse_grid, const SolveConfig& cfg,
                                        const ScalarField* warm_init_fine = nullptr);

/// Resample an interval field channel-by-channel.
IntervalField resample(const IntervalField& field, const Grid& target);

}  // namespace hjsafe
