#include "hjsafe/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hjsafe/parallel.hpp"

namespace hjsafe {

void SolveConfig::validate() const {
  if (!(cfl_factor > 0.0) || cfl_factor > 1.0)
    throw std::invalid_argument("SolveConfig: cfl_factor must be in (0,1]");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("SolveConfig: tolerance must be > 0");
}

namespace {

constexpr std::size_t kChunk = 4096;

struct NodeContext {
  const Grid* grid = nullptr;
  const DynamicsModel* model = nullptr;
  const IntervalField* dbounds = nullptr;
  std::vector<Interval> ubounds;
  std::vector<double> inv_spacing;
  SolveConfig::Scheme scheme = SolveConfig::Scheme::kGodunov;
  // global-dissipation coefficients; empty in per-node mode
  std::vector<double> global_alpha;
};

// One-kink Hamiltonian along a single dimension: H_d(p) = s_pos * max(p,0)
// + s_neg * min(p,0), where s_pos/s_neg are the flow rates realized by the
// optimal inputs for positive/negative costate. Valid whenever every input
// channel feeds exactly one state row.
struct DimSlopes {
  double pos = 0.0;
  double neg = 0.0;
};

inline double kink_h(const DimSlopes& s, double p) {
  return p > 0.0 ? s.pos * p : s.neg * p;
}

// Godunov flux for V_new = V + dt * Hhat: non-decreasing in D+, non-
// increasing in D-. Rarefaction (D- <= D+) takes the max of H over the
// gradient interval, shock the min; extrema of the one-kink H sit at the
// interval ends or at p = 0.
inline double godunov_flux(const DimSlopes& s, double dminus, double dplus) {
  const double ha = kink_h(s, dminus);
  const double hb = kink_h(s, dplus);
  if (dminus <= dplus) {
    double h = ha > hb ? ha : hb;
    if (dminus <= 0.0 && 0.0 <= dplus && h < 0.0) h = 0.0;
    return h;
  }
  double h = ha < hb ? ha : hb;
  if (dplus <= 0.0 && 0.0 <= dminus && h > 0.0) h = 0.0;
  return h;
}

// Fill per-dimension slopes from the affine decomposition; throws if an
// input channel feeds more than one state row (Godunov separability).
inline void dim_slopes(const AffineFlow& af, std::span<const Interval> ub,
                       std::span<const Interval> db, std::span<DimSlopes> out) {
  for (std::size_t d = 0; d < af.state_dim; ++d) {
    double pos = af.drift[d];
    double neg = af.drift[d];
    for (std::size_t j = 0; j < af.control_dim; ++j) {
      const double a = af.control[d][j] * ub[j].lo;
      const double b = af.control[d][j] * ub[j].hi;
      pos += a < b ? a : b;  // control minimizes p*f
      neg += a > b ? a : b;
    }
    for (std::size_t k = 0; k < af.disturbance_dim; ++k) {
      const double a = af.disturbance[d][k] * db[k].lo;
      const double b = af.disturbance[d][k] * db[k].hi;
      pos += a > b ? a : b;  // disturbance maximizes
      neg += a < b ? a : b;
    }
    out[d] = {pos, neg};
  }
}

inline bool rows_separable(const AffineFlow& af) {
  for (std::size_t j = 0; j < af.control_dim; ++j) {
    int rows = 0;
    for (std::size_t i = 0; i < af.state_dim; ++i)
      if (af.control[i][j] != 0.0) ++rows;
    if (rows > 1) return false;
  }
  for (std::size_t k = 0; k < af.disturbance_dim; ++k) {
    int rows = 0;
    for (std::size_t i = 0; i < af.state_dim; ++i)
      if (af.disturbance[i][k] != 0.0) ++rows;
    if (rows > 1) return false;
  }
  return true;
}

// Per-node VI update over one chunk of linear indices. Maintains the
// multi-index as an odometer so neighbor lookups need no division.
double update_chunk(const NodeContext& ctx, std::span<const double> v,
                    std::span<const double> c, std::span<double> out, double dt,
                    std::size_t lo, std::size_t hi) {
  const Grid& grid = *ctx.grid;
  const std::size_t nd = grid.ndims();
  const std::size_t nch = ctx.dbounds->channels();

  std::size_t idx[32];
  grid.unravel(lo, {idx, nd});
  double x[kMaxStateDim];
  double dminus[kMaxStateDim];
  double dplus[kMaxStateDim];
  double costate[kMaxStateDim];
  double alpha[kMaxStateDim];
  DimSlopes slopes[kMaxStateDim];
  Interval db[kMaxInputDim];
  AffineFlow af;

  const bool godunov = ctx.scheme == SolveConfig::Scheme::kGodunov;
  double max_dv = 0.0;
  for (std::size_t lin = lo; lin < hi; ++lin) {
    for (std::size_t d = 0; d < nd; ++d) x[d] = grid.coord(d, idx[d]);

    // Boundary handling: the gradient pair replicates the available
    // one-sided difference (linear-extrapolation ghosts) for the LF path;
    // the Godunov flux instead takes a zero ghost difference on the missing
    // side, since reading the downwind difference there couples boundary
    // rows anti-diffusively and they never settle.
    for (std::size_t d = 0; d < nd; ++d) {
      const std::size_t stride = grid.stride(d);
      const std::size_t k = idx[d];
      const std::size_t n = grid.dim(d).n;
      double left, right;
      if (k > 0 && k < n - 1) {
        left = (v[lin] - v[lin - stride]) * ctx.inv_spacing[d];
        right = (v[lin + stride] - v[lin]) * ctx.inv_spacing[d];
      } else if (k == 0) {
        right = (v[lin + stride] - v[lin]) * ctx.inv_spacing[d];
        left = godunov ? 0.0 : right;
      } else {
        left = (v[lin] - v[lin - stride]) * ctx.inv_spacing[d];
        right = godunov ? 0.0 : left;
      }
      dminus[d] = left;
      dplus[d] = right;
    }

    for (std::size_t ch = 0; ch < nch; ++ch) db[ch] = ctx.dbounds->at_node(ch, lin);
    ctx.model->affine({x, nd}, af);

    double hhat = 0.0;
    if (godunov) {
      dim_slopes(af, ctx.ubounds, {db, nch}, {slopes, nd});
      for (std::size_t d = 0; d < nd; ++d)
        hhat += godunov_flux(slopes[d], dminus[d], dplus[d]);
    } else {
      for (std::size_t d = 0; d < nd; ++d) costate[d] = 0.5 * (dminus[d] + dplus[d]);
      hhat = hamiltonian(af, {costate, nd}, ctx.ubounds, {db, nch});
      // The step direction is V + dt*Hhat (value grows backward in time), so
      // the Lax-Friedrichs viscosity enters with a plus sign: the update's
      // neighbor coefficients dt*(alpha +- H_p)/(2 dx) stay non-negative and
      // the scheme is monotone under the CFL bound.
      if (ctx.global_alpha.empty()) {
        flow_bounds(af, ctx.ubounds, {db, nch}, {alpha, nd});
        for (std::size_t d = 0; d < nd; ++d)
          hhat += alpha[d] * 0.5 * (dplus[d] - dminus[d]);
      } else {
        for (std::size_t d = 0; d < nd; ++d)
          hhat += ctx.global_alpha[d] * 0.5 * (dplus[d] - dminus[d]);
      }
    }

    const double stepped = v[lin] + dt * hhat;
    const double vnew = stepped > c[lin] ? stepped : c[lin];
    out[lin] = vnew;
    const double dv = std::abs(vnew - v[lin]);
    if (dv > max_dv) max_dv = dv;

    for (std::size_t d = nd; d-- > 0;) {
      if (++idx[d] < grid.dim(d).n) break;
      idx[d] = 0;
    }
  }
  return max_dv;
}

NodeContext make_context(const Grid& grid, const DynamicsModel& model,
                         const IntervalField& dbounds, const SolveConfig& cfg) {
  if (!(dbounds.grid() == grid))
    throw std::invalid_argument("solver: disturbance bounds grid mismatch");
  if (grid.ndims() != model.state_dim())
    throw std::invalid_argument("solver: grid rank does not match model state");
  if (dbounds.channels() != model.disturbance_dim())
    throw std::invalid_argument("solver: disturbance channel count mismatch");

  NodeContext ctx;
  ctx.grid = &grid;
  ctx.model = &model;
  ctx.dbounds = &dbounds;
  ctx.ubounds = model.control_bounds();
  ctx.scheme = cfg.scheme;
  ctx.inv_spacing.resize(grid.ndims());
  for (std::size_t d = 0; d < grid.ndims(); ++d)
    ctx.inv_spacing[d] = 1.0 / grid.spacing(d);
  return ctx;
}

// max over nodes of sum_i alpha_i/dx_i, per-dim alpha maxima, and whether
// the model's input channels stay row-separable over the grid
struct AlphaScan {
  double max_speed_sum = 0.0;
  std::vector<double> max_alpha;
  bool separable = true;
};

AlphaScan scan_alpha(const NodeContext& ctx, unsigned threads) {
  const Grid& grid = *ctx.grid;
  const std::size_t nd = grid.ndims();
  const std::size_t count = grid.size();
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> chunk_sum(nchunks, 0.0);
  std::vector<std::vector<double>> chunk_alpha(nchunks, std::vector<double>(nd, 0.0));
  std::vector<char> chunk_sep(nchunks, 1);

  parallel_for(0, nchunks, threads, [&](std::size_t chunk_id) {
    const std::size_t lo = chunk_id * kChunk;
    const std::size_t hi = std::min(lo + kChunk, count);
    std::size_t idx[32];
    grid.unravel(lo, {idx, nd});
    double x[kMaxStateDim];
    double alpha[kMaxStateDim];
    Interval db[kMaxInputDim];
    AffineFlow af;
    const std::size_t nch = ctx.dbounds->channels();
    for (std::size_t lin = lo; lin < hi; ++lin) {
      for (std::size_t d = 0; d < nd; ++d) x[d] = grid.coord(d, idx[d]);
      for (std::size_t ch = 0; ch < nch; ++ch) db[ch] = ctx.dbounds->at_node(ch, lin);
      ctx.model->affine({x, nd}, af);
      if (!rows_separable(af)) chunk_sep[chunk_id] = 0;
      flow_bounds(af, ctx.ubounds, {db, nch}, {alpha, nd});
      double speed = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        speed += alpha[d] * ctx.inv_spacing[d];
        chunk_alpha[chunk_id][d] = std::max(chunk_alpha[chunk_id][d], alpha[d]);
      }
      chunk_sum[chunk_id] = std::max(chunk_sum[chunk_id], speed);
      for (std::size_t d = nd; d-- > 0;) {
        if (++idx[d] < grid.dim(d).n) break;
        idx[d] = 0;
      }
    }
  });

  AlphaScan scan;
  scan.max_alpha.assign(nd, 0.0);
  for (std::size_t cidx = 0; cidx < nchunks; ++cidx) {
    scan.max_speed_sum = std::max(scan.max_speed_sum, chunk_sum[cidx]);
    if (!chunk_sep[cidx]) scan.separable = false;
    for (std::size_t d = 0; d < nd; ++d)
      scan.max_alpha[d] = std::max(scan.max_alpha[d], chunk_alpha[cidx][d]);
  }
  return scan;
}

}  // namespace

double cfl_dt(const Grid& grid, const DynamicsModel& model, const IntervalField& dbounds,
              double cfl_factor, unsigned threads) {
  SolveConfig probe;
  probe.cfl_factor = cfl_factor;
  probe.validate();
  const NodeContext ctx = make_context(grid, model, dbounds, probe);
  const AlphaScan scan = scan_alpha(ctx, threads);
  if (!(scan.max_speed_sum > 0.0))
    throw std::runtime_error("cfl_dt: flow is identically zero on the grid");
  return cfl_factor / scan.max_speed_sum;
}

ScalarField vi_step(const ScalarField& value, const ScalarField& constraint,
                    const DynamicsModel& model, const IntervalField& dbounds, double dt,
                    const SolveConfig& cfg) {
  if (!(value.grid() == constraint.grid()))
    throw std::invalid_argument("vi_step: value/constraint grid mismatch");
  NodeContext ctx = make_context(value.grid(), model, dbounds, cfg);
  const AlphaScan scan = scan_alpha(ctx, cfg.threads);
  if (dt * scan.max_speed_sum > 1.0 + 1e-12)
    throw std::invalid_argument("vi_step: dt violates the CFL bound");
  if (ctx.scheme == SolveConfig::Scheme::kGodunov && !scan.separable)
    throw std::invalid_argument(
        "vi_step: model inputs are not row-separable, use the Lax-Friedrichs scheme");
  if (cfg.dissipation == SolveConfig::Dissipation::kGlobal)
    ctx.global_alpha = scan.max_alpha;

  ScalarField out(value.grid());
  const std::size_t count = value.size();
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  parallel_for(0, nchunks, cfg.threads, [&](std::size_t chunk_id) {
    const std::size_t lo = chunk_id * kChunk;
    const std::size_t hi = std::min(lo + kChunk, count);
    update_chunk(ctx, value.values(), constraint.values(), out.values(), dt, lo, hi);
  });
  return out;
}

SolveResult solve(const ScalarField& init, const ScalarField& constraint,
                  const DynamicsModel& model, const IntervalField& dbounds,
                  const SolveConfig& cfg) {
  cfg.validate();
  if (!(init.grid() == constraint.grid()))
    throw std::invalid_argument("solve: init/constraint grid mismatch");
  NodeContext ctx = make_context(init.grid(), model, dbounds, cfg);
  const AlphaScan scan = scan_alpha(ctx, cfg.threads);
  if (!(scan.max_speed_sum > 0.0))
    throw std::runtime_error("solve: flow is identically zero on the grid");
  if (ctx.scheme == SolveConfig::Scheme::kGodunov && !scan.separable)
    throw std::invalid_argument(
        "solve: model inputs are not row-separable, use the Lax-Friedrichs scheme");
  if (cfg.dissipation == SolveConfig::Dissipation::kGlobal)
    ctx.global_alpha = scan.max_alpha;
  const double dt = cfg.cfl_factor / scan.max_speed_sum;

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t count = init.size();
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> chunk_max(nchunks, 0.0);

  SolveResult result;
  result.dt = dt;
  result.nodes_per_sweep = count;

  std::vector<double> front(init.values().begin(), init.values().end());
  std::vector<double> back(count);

  double min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    parallel_for(0, nchunks, cfg.threads, [&](std::size_t chunk_id) {
      const std::size_t lo = chunk_id * kChunk;
      const std::size_t hi = std::min(lo + kChunk, count);
      chunk_max[chunk_id] =
          update_chunk(ctx, front, constraint.values(), back, dt, lo, hi);
    });
    double max_dv = 0.0;
    for (double m : chunk_max) max_dv = std::max(max_dv, m);
    const double residual = max_dv / dt;

    front.swap(back);
    result.iterations = iter;
    result.residual_history.push_back(residual);
    result.wall_ms_history.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count());

    if (residual < cfg.tolerance) {
      result.converged = true;
      break;
    }
    min_residual = std::min(min_residual, residual);
    // Divergence guard. The residual legitimately climbs while the value
    // front steepens, so growth is measured against the larger of the
    // running minimum and the initial residual; a CFL-violating blow-up
    // multiplies per iteration and trips this within a few steps.
    if (!std::isfinite(residual) ||
        residual > 10.0 * std::max(min_residual, result.residual_history.front()))
      throw std::runtime_error("solve: diverging (residual grew 10x above its minimum)");
  }

  result.value = ScalarField(init.grid(), std::move(front));
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

IntervalField resample(const IntervalField& field, const Grid& target) {
  IntervalField out(target, field.channels());
  for (std::size_t ch = 0; ch < field.channels(); ++ch) {
    out.lo(ch) = resample(field.lo(ch), target);
    out.hi(ch) = resample(field.hi(ch), target);
  }
  return out;
}

CoarseToFineResult solve_coarse_to_fine(const ScalarField& constraint_fine,
                                        const DynamicsModel& model,
                                        const IntervalField& dbounds_fine,
                                        const Grid& coarse_grid, const SolveConfig& cfg,
                                        const ScalarField* warm_init_fine) {
  if (coarse_grid.ndims() != constraint_fine.grid().ndims())
    throw std::invalid_argument("solve_coarse_to_fine: grid rank mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  const ScalarField c_coarse = resample(constraint_fine, coarse_grid);
  const IntervalField db_coarse = resample(dbounds_fine, coarse_grid);

  // Migrated initializations are lowered by one source-grid cell of value
  // slack before clamping to the constraint. A seed below the fixed point
  // converges back up everywhere, whereas excess carried into regions with
  // weak characteristics (e.g. hover states) would never drain and would
  // leave a conservative offset.
  const auto seed_from = [](const ScalarField& src, const Grid& target,
                            const ScalarField& constraint) {
    ScalarField init = resample(src, target);
    const double slack = max_adjacent_jump(src);
    for (std::size_t i = 0; i < init.size(); ++i)
      init[i] = std::max(init[i] - slack, constraint[i]);
    return init;
  };

  ScalarField init_coarse =
      warm_init_fine ? seed_from(*warm_init_fine, coarse_grid, c_coarse) : c_coarse;

  CoarseToFineResult out;
  out.coarse = solve(init_coarse, c_coarse, model, db_coarse, cfg);

  const ScalarField init_fine =
      seed_from(out.coarse.value, constraint_fine.grid(), constraint_fine);
  out.fine = solve(init_fine, constraint_fine, model, dbounds_fine, cfg);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hjsafe
