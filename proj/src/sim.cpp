#include "hjsafe/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "hjsafe/levelset.hpp"
#include "hjsafe/lqr.hpp"

namespace hjsafe {

double GaussianRng::uniform() {
  return std::ldexp(double(rng_() >> 11), -53);
}

double GaussianRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

namespace {

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

void WindSpec::sample_params(std::span<const double> x, double t,
                             std::span<double> mean_out, std::span<double> sd_out) const {
  std::fill(mean_out.begin(), mean_out.end(), 0.0);
  std::fill(sd_out.begin(), sd_out.end(), 0.0);
  if (kind == Kind::kNone || t < onset_time) return;

  if (kind == Kind::kAltitudeProfile) {
    const double h = x[altitude_state];
    const double taper = std::max(0.0, 1.0 - h / a0);
    mean_out[altitude_channel] = w0 * taper;
    sd_out[altitude_channel] = s0 * taper;
    return;
  }

  // corner box with a smoothstep shoulder outside each face
  double weight = 1.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = x[box_states[i]];
    const double in_lo = smoothstep((v - (box_lo[i] - ramp)) / ramp);
    const double in_hi = smoothstep(((box_hi[i] + ramp) - v) / ramp);
    weight *= std::min(in_lo, in_hi);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    mean_out[box_channels[i]] = mean * weight;
    sd_out[box_channels[i]] = sd * weight;
  }
}

ReferencePoint reference_point(const Scenario& sc, double t) {
  ReferencePoint rp;
  rp.state.assign(sc.state_dim, 0.0);
  rp.control_ff.assign(sc.control_dim, 0.0);

  if (sc.reference.kind == ReferenceSpec::Kind::kSinusoid) {
    const double mid = 0.5 * (sc.reference.lo + sc.reference.hi);
    const double amp = 0.5 * (sc.reference.hi - sc.reference.lo);
    const double w = 2.0 * std::numbers::pi / sc.reference.period;
    rp.state[0] = mid + amp * std::sin(w * t);
    rp.state[1] = amp * w * std::cos(w * t);
    const auto* quad = dynamic_cast<const Quad2DVert*>(sc.full_model.get());
    if (quad)
      rp.control_ff[0] =
          (-quad->params().gravity - quad->params().k_offset) / quad->params().k_thrust;
    return rp;
  }

  // figure eight: 1:2 Lissajous in (p_x, p_y) at constant altitude
  const double w = 2.0 * std::numbers::pi / sc.reference.period_8;
  const double ax = sc.reference.amp_x, ay = sc.reference.amp_y;
  const double px = ax * std::sin(w * t);
  const double py = ay * std::sin(2.0 * w * t);
  const double vx = ax * w * std::cos(w * t);
  const double vy = 2.0 * ay * w * std::cos(2.0 * w * t);
  const double accx = -ax * w * w * std::sin(w * t);
  const double accy = -4.0 * ay * w * w * std::sin(2.0 * w * t);

  const auto* ten = dynamic_cast<const NearHover10D*>(sc.full_model.get());
  const double g = ten ? ten->planar_x().params().gravity : 9.8;
  const double theta_x = std::atan(accx / g);
  const double theta_y = std::atan(accy / g);

  rp.state[0] = px;
  rp.state[1] = vx;
  rp.state[2] = theta_x;
  rp.state[3] = 0.0;
  rp.state[4] = py;
  rp.state[5] = vy;
  rp.state[6] = theta_y;
  rp.state[7] = 0.0;
  rp.state[8] = sc.reference.altitude;
  rp.state[9] = 0.0;

  // equilibrium feedforward: omega = d1*theta, S = d0*theta/n0; hover thrust
  if (ten) {
    const auto& pp = ten->planar_x().params();
    rp.control_ff[0] = pp.d0 * theta_x / pp.n0;
    rp.control_ff[1] = pp.d0 * theta_y / pp.n0;
    rp.control_ff[2] = ten->vertical().params().gravity / ten->vertical().params().thrust_gain;
  }
  return rp;
}

namespace {

// (A, B) of the hover linearization for the models used in the demos
void linearize(const DynamicsModel& model, std::vector<double>& a, std::vector<double>& b) {
  const std::size_t n = model.state_dim();
  a.assign(n * n, 0.0);
  b.assign(n * model.control_dim(), 0.0);
  AffineFlow af;
  std::vector<double> x0(n, 0.0);
  model.affine(x0, af);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < model.control_dim(); ++j)
      b[i * model.control_dim() + j] = af.control[i][j];

  if (const auto* planar = dynamic_cast<const NearHoverPlanar4D*>(&model)) {
    const auto& p = planar->params();
    a[0 * n + 1] = 1.0;
    a[1 * n + 2] = p.gravity;  // d(g tan th)/d th at 0
    a[2 * n + 2] = -p.d1;
    a[2 * n + 3] = 1.0;
    a[3 * n + 2] = -p.d0;
    return;
  }
  if (dynamic_cast<const NearHoverVertical2D*>(&model) ||
      dynamic_cast<const Quad2DVert*>(&model) ||
      dynamic_cast<const DoubleIntegrator*>(&model)) {
    a[0 * n + 1] = 1.0;
    return;
  }
  throw std::invalid_argument("linearize: unsupported model " + model.name());
}

class PerformanceController {
 public:
  explicit PerformanceController(const Scenario& sc) : sc_(sc) {
    if (sc.controller.kind != ControllerSpec::Kind::kLqr) return;
    for (const auto& ss : sc.subsystems) {
      const auto& model = *ss.subsystem.model;
      std::vector<double> a, b;
      linearize(model, a, b);
      const std::size_t n = model.state_dim();
      std::vector<double> q(n * n, 0.0);
      if (n == 4) {
        q[0] = 8.0;
        q[1 * n + 1] = 2.0;
        q[2 * n + 2] = 1.0;
        q[3 * n + 3] = 0.2;
      } else {
        q[0] = 10.0;
        q[1 * n + 1] = 3.0;
      }
      std::vector<double> r{sc.controller.lqr_r_scale * (n == 4 ? 40.0 : 0.5)};
      gains_.push_back(lqr_gain(n, 1, a, b, q, r));
    }
  }

  std::vector<double> operator()(double t, std::span<const double> x) const {
    const auto rp = reference_point(sc_, t);
    std::vector<double> u(sc_.control_dim, 0.0);

    if (sc_.controller.kind == ControllerSpec::Kind::kDetunedPd) {
      const double e_p = rp.state[0] - x[0];
      const double e_v = rp.state[1] - x[1];
      u[0] = std::clamp(rp.control_ff[0] + sc_.controller.kp * e_p + sc_.controller.kd * e_v,
                        0.0, 1.0);
      return u;
    }

    for (std::size_t s = 0; s < sc_.subsystems.size(); ++s) {
      const auto& sub = sc_.subsystems[s].subsystem;
      const auto& gain = gains_[s];
      double cmd = rp.control_ff[sub.control_map[0]];
      for (std::size_t j = 0; j < sub.state_map.size(); ++j) {
        const std::size_t full = sub.state_map[j];
        cmd -= gain.at(0, j) * (x[full] - rp.state[full]);
      }
      const auto cb = sub.model->control_bounds()[0];
      u[sub.control_map[0]] = std::clamp(cmd, cb.lo, cb.hi);
    }
    return u;
  }

 private:
  const Scenario& sc_;
  std::vector<LqrGain> gains_;
};

void rk4(const DynamicsModel& model, std::vector<double>& x, std::span<const double> u,
         std::span<const double> d, double dt, std::size_t substeps,
         std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
         std::vector<double>& k4, std::vector<double>& tmp) {
  const double h = dt / double(substeps);
  const std::size_t n = x.size();
  for (std::size_t s = 0; s < substeps; ++s) {
    model.flow(x, u, d, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    model.flow(tmp, u, d, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    model.flow(tmp, u, d, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    model.flow(tmp, u, d, k4);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

std::vector<double> performance_control(const Scenario& sc, double t,
                                        std::span<const double> x) {
  return PerformanceController(sc)(t, x);
}

StepResult step(const DynamicsModel& model, std::span<const double> x,
                std::span<const double> u, std::span<const double> d, double dt,
                std::size_t substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const std::size_t n = model.state_dim();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  StepResult out;
  out.next_state.assign(x.begin(), x.end());
  rk4(model, out.next_state, u, d, dt, substeps, k1, k2, k3, k4, tmp);

  // same step under the nominal model (d = 0): the difference in the
  // disturbance-fed velocity rows, divided by dt, estimates d
  std::vector<double> nominal(x.begin(), x.end());
  std::vector<double> zero(model.disturbance_dim(), 0.0);
  rk4(model, nominal, u, zero, dt, substeps, k1, k2, k3, k4, tmp);

  const auto rows = model.disturbance_rows();
  out.measured_disturbance.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.measured_disturbance[k] = (out.next_state[rows[k]] - nominal[rows[k]]) / dt;
  return out;
}

InitialSafety initial_safety(const Scenario& sc) {
  InitialSafety out;
  std::vector<Subsystem> subs;
  std::vector<std::shared_ptr<SafetyFilter>> filters;

  for (const auto& ss : sc.subsystems) {
    std::vector<Interval> prior_band(ss.subsystem.disturbance_map.size());
    const double band = 3.0 * std::sqrt(sc.gp_prior.signal_var + sc.gp_prior.noise_var);
    for (auto& b : prior_band) b = {-band, band};
    IntervalField dbounds = IntervalField::constant(ss.grid, prior_band);

    SolveResult solved;
    if (ss.coarse_grid) {
      auto ctf = solve_coarse_to_fine(ss.constraint, *ss.subsystem.model, dbounds,
                                      *ss.coarse_grid, sc.solver);
      solved = std::move(ctf.fine);
      solved.wall_seconds = ctf.wall_seconds;
    } else {
      solved = solve(ss.constraint, ss.constraint, *ss.subsystem.model, dbounds, sc.solver);
    }
    if (!solved.converged)
      throw std::runtime_error("initial_safety: solve did not converge for " +
                               ss.subsystem.name);

    SafetyFilter::Config fcfg;
    fcfg.eta_floor = sc.solver.tolerance * solved.dt;
    filters.push_back(std::make_shared<SafetyFilter>(ss.subsystem.model, solved,
                                                     dbounds, fcfg));
    subs.push_back(ss.subsystem);
    out.solves.push_back(std::move(solved));
    out.dbounds.push_back(std::move(dbounds));
  }

  out.decomposition = std::make_shared<Decomposition>(std::move(subs), sc.state_dim,
                                                      sc.control_dim, sc.disturbance_dim);
  out.decomposition->attach(std::move(filters));
  return out;
}

namespace {

struct UpdateJob {
  std::thread worker;
  double trigger_time = 0.0;
  double adopt_time = 0.0;
  std::vector<SolveResult> solves;
  std::vector<IntervalField> dbounds;
  UpdateTiming timing;
  bool failed = false;
  std::string error;
};

// background refit + warm solve for every subsystem
void run_update_job(const Scenario& sc, Decomposition& deco,
                    std::vector<std::vector<DisturbanceMeasurement>> data, UpdateJob* job) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t count = sc.subsystems.size();
    job->solves.resize(count);
    job->dbounds.resize(count);
    job->timing.iterations.assign(count, 0);

    // fit one GP per disturbance channel
    std::vector<GpModel> models(sc.disturbance_dim);
    for (std::size_t ch = 0; ch < sc.disturbance_dim; ++ch) {
      GpHyperparams prior = sc.gp_prior;
      if (data[ch].size() >= 20) {
        models[ch] = GpModel::fit(data[ch], sc.gp);
      } else {
        models[ch] = GpModel::prior(prior);
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    job->timing.gp_seconds = std::chrono::duration<double>(t1 - t0).count();

    // warm subsystem solves, one thread each
    std::vector<std::thread> workers;
    std::vector<std::string> errors(count);
    for (std::size_t s = 0; s < count; ++s) {
      workers.emplace_back([&, s] {
        try {
          const auto& ss = sc.subsystems[s];
          std::vector<GpModel> chans;
          std::vector<std::vector<std::size_t>> dims;
          for (std::size_t k = 0; k < ss.subsystem.disturbance_map.size(); ++k) {
            chans.push_back(models[ss.subsystem.disturbance_map[k]]);
            dims.push_back(ss.gp_input_dims);
          }
          IntervalField bounds = bounds_on_grid(chans, dims, ss.grid, 3.0, 1);
          ScalarField init = deco.filter(s).value_snapshot();
          auto solved = solve(init, ss.constraint, *ss.subsystem.model, bounds, sc.solver);
          job->timing.iterations[s] = solved.iterations;
          job->solves[s] = std::move(solved);
          job->dbounds[s] = std::move(bounds);
        } catch (const std::exception& e) {
          errors[s] = e.what();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
      if (!e.empty()) throw std::runtime_error(e);

    job->timing.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  } catch (const std::exception& e) {
    job->failed = true;
    job->error = e.what();
  }
}

void write_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void EpisodeLog::write_csv(std::ostream& os) const {
  if (samples.empty()) return;
  const auto& first = samples.front();
  os << "t";
  for (std::size_t i = 0; i < first.state.size(); ++i) os << ",x" << i;
  for (std::size_t i = 0; i < first.u_perf.size(); ++i) os << ",u_perf" << i;
  for (std::size_t i = 0; i < first.u_applied.size(); ++i) os << ",u" << i;
  os << ",override,value,lambda";
  for (std::size_t i = 0; i < first.d_hat.size(); ++i) os << ",d_hat" << i;
  for (std::size_t i = 0; i < first.d_hat.size(); ++i) os << ",d_lo" << i << ",d_hi" << i;
  os << "\n";
  for (const auto& s : samples) {
    write_double(os, s.time);
    for (double v : s.state) {
      os << ',';
      write_double(os, v);
    }
    for (double v : s.u_perf) {
      os << ',';
      write_double(os, v);
    }
    for (double v : s.u_applied) {
      os << ',';
      write_double(os, v);
    }
    os << ',' << (s.override_active ? 1 : 0) << ',';
    write_double(os, s.value);
    os << ',';
    write_double(os, s.lambda);
    for (double v : s.d_hat) {
      os << ',';
      write_double(os, v);
    }
    for (std::size_t i = 0; i < s.d_lo.size(); ++i) {
      os << ',';
      write_double(os, s.d_lo[i]);
      os << ',';
      write_double(os, s.d_hi[i]);
    }
    os << "\n";
  }
}

void EpisodeLog::write_events(std::ostream& os) const {
  for (const auto& e : events) {
    os << "{\"t\":";
    write_double(os, e.time);
    os << ",\"type\":\"" << e.type << "\",\"lambda\":";
    write_double(os, e.lambda);
    os << ",\"detail\":";
    write_double(os, e.detail);
    os << "}\n";
  }
}

EpisodeLog run_episode(const Scenario& sc, Decomposition& deco) {
  if (!sc.full_model) throw std::invalid_argument("run_episode: scenario has no model");
  if (sc.initial_state.size() != sc.state_dim)
    throw std::invalid_argument("run_episode: bad initial state");

  EpisodeLog log;
  GaussianRng rng(sc.seed);
  PerformanceController perf(sc);

  std::vector<double> x = sc.initial_state;
  const std::size_t substeps =
      std::max<std::size_t>(1, std::llround(sc.control_dt / sc.physics_dt));
  const std::size_t ticks =
      static_cast<std::size_t>(std::llround(sc.duration / sc.control_dt));

  std::vector<std::vector<DisturbanceMeasurement>> data(sc.disturbance_dim);
  std::unique_ptr<UpdateJob> job;
  double last_fit_time = 0.0;
  bool wind_logged = false;
  bool in_violation_box = true;

  std::vector<double> wind_mean(sc.disturbance_dim), wind_sd(sc.disturbance_dim);
  std::vector<double> d(sc.disturbance_dim);

  auto start_update = [&](double t) {
    job = std::make_unique<UpdateJob>();
    job->trigger_time = t;
    job->adopt_time = t + sc.update_latency;
    job->timing.trigger_time = t;
    auto snapshot = data;
    job->worker = std::thread(run_update_job, std::cref(sc), std::ref(deco),
                              std::move(snapshot), job.get());
    log.events.push_back({t, "update_started", deco.lambda(), 0.0});
  };

  for (std::size_t tick = 0; tick < ticks; ++tick) {
    const double t = double(tick) * sc.control_dt;

    if (!wind_logged && sc.wind.kind != WindSpec::Kind::kNone && t >= sc.wind.onset_time) {
      log.events.push_back({t, "wind_onset", deco.lambda(), 0.0});
      wind_logged = true;
    }

    // adoption happens between control ticks, deterministically in sim time
    if (job && t >= job->adopt_time) {
      job->worker.join();
      if (job->failed) {
        log.events.push_back({t, "update_failed", deco.lambda(), 0.0});
      } else {
        deco.adopt(job->solves, job->dbounds);
        log.update_timings.push_back(job->timing);
        log.events.push_back({t, "adoption", deco.lambda(), 0.0});
      }
      job.reset();
    }

    const auto u_perf = perf(t, x);
    CombinedDecision decision;
    if (sc.filter_enabled) {
      decision = deco.combined_control(x, u_perf);
    } else {
      decision.control = u_perf;
      decision.override_active = false;
      decision.value = deco.combined_value(x);
    }
    if (decision.override_active) ++log.override_count;

    // one wind draw per channel per control period
    sc.wind.sample_params(x, t, wind_mean, wind_sd);
    for (std::size_t ch = 0; ch < sc.disturbance_dim; ++ch)
      d[ch] = wind_mean[ch] + wind_sd[ch] * rng.normal();

    auto stepres = step(*sc.full_model, x, decision.control, d, sc.control_dt, substeps);

    // record the measurement at the pre-step state, per channel
    EpisodeSample sample;
    sample.time = t;
    sample.state = x;
    sample.u_perf = u_perf;
    sample.u_applied = decision.control;
    sample.override_active = decision.override_active;
    sample.value = decision.value;
    sample.lambda = deco.lambda();
    sample.d_hat = stepres.measured_disturbance;

    bool violated = false;
    double worst_margin = 0.0;
    for (std::size_t s = 0; s < sc.subsystems.size(); ++s) {
      const auto& ss = sc.subsystems[s];
      const auto xs = project(x, ss.subsystem);
      for (std::size_t k = 0; k < ss.subsystem.disturbance_map.size(); ++k) {
        const std::size_t ch = ss.subsystem.disturbance_map[k];
        const double dhat = stepres.measured_disturbance[ch];

        std::vector<double> gp_x(ss.gp_input_dims.size());
        for (std::size_t i = 0; i < gp_x.size(); ++i) gp_x[i] = xs[ss.gp_input_dims[i]];
        data[ch].push_back({gp_x, dhat, t});

        const Interval band = deco.filter(s).dbound_at(k, xs);
        sample.d_lo.push_back(band.lo);
        sample.d_hi.push_back(band.hi);
        const double margin = std::min(dhat - band.lo, band.hi - dhat);
        if (margin < 0.0) {
          violated = true;
          worst_margin = std::min(worst_margin, margin);
        }
      }
    }

    if (violated) {
      log.events.push_back({t, "violation", deco.lambda(), worst_margin});
      std::vector<Violation> v{{x, worst_margin}};
      const double before = deco.lambda();
      const double after = deco.contract(v);
      if (after > before)
        log.events.push_back({t, "contraction", after, after - before});
      if (deco.emergency())
        log.events.push_back({t, "emergency", after, 0.0});
      if (!job) start_update(t);
    } else if (sc.periodic_updates && !job && t - last_fit_time >= sc.gp_refit_period) {
      bool enough = false;
      for (const auto& buf : data) enough = enough || buf.size() >= 50;
      if (enough) {
        start_update(t);
        last_fit_time = t;
      }
    }

    x = stepres.next_state;

    // constraint metric on the post-step state
    bool inside = true;
    for (const auto& box : sc.constraint_box)
      inside = inside && x[box.dim] >= box.lo && x[box.dim] <= box.hi;
    if (!inside) {
      ++log.constraint_violations;
      if (in_violation_box)
        log.events.push_back({t + sc.control_dt, "constraint_violation", deco.lambda(), 0.0});
      in_violation_box = false;
    } else {
      in_violation_box = true;
    }

    log.samples.push_back(std::move(sample));
  }

  if (job) {
    job->worker.join();
    job.reset();
  }
  return log;
}

Scenario build_scenario_quad2d(std::uint64_t seed) {
  Scenario sc;
  sc.name = "quad2d_safe_learning";
  sc.state_dim = 2;
  sc.control_dim = 1;
  sc.disturbance_dim = 1;
  auto model = std::make_shared<Quad2DVert>();
  sc.full_model = model;

  SubsystemScenario ss;
  ss.subsystem = {"vertical", model, {0, 1}, {0}, {0}};
  ss.grid = Grid({{0.0, 3.2, 101}, {-5.0, 5.0, 101}});
  ss.coarse_grid = Grid({{0.0, 3.2, 51}, {-5.0, 5.0, 51}});
  ss.constraint = signed_distance_band(ss.grid, 0, 0.35, 2.8);
  ss.gp_input_dims = {0};  // wind depends on altitude
  sc.subsystems.push_back(std::move(ss));

  sc.initial_state = {1.325, 0.0};
  sc.constraint_box = {{0, 0.35, 2.8}};
  sc.wind.kind = WindSpec::Kind::kAltitudeProfile;
  sc.wind.onset_time = 8.0;
  sc.reference.kind = ReferenceSpec::Kind::kSinusoid;
  sc.controller.kind = ControllerSpec::Kind::kDetunedPd;
  sc.duration = 25.0;
  sc.update_latency = 2.0;
  sc.seed = seed;
  sc.gp_prior = {0.01, {0.5}, 0.0};
  return sc;
}

Scenario build_scenario_10d(std::uint64_t seed) {
  Scenario sc;
  sc.name = "near_hover_10d_figure_eight";
  sc.state_dim = 10;
  sc.control_dim = 3;
  sc.disturbance_dim = 3;
  auto model = std::make_shared<NearHover10D>();
  sc.full_model = model;

  const double theta_max = std::numbers::pi / 8.0;
  auto planar_grid = Grid({{-3.0, 3.0, 21}, {-4.0, 4.0, 21}, {-0.45, 0.45, 15},
                           {-2.5, 2.5, 15}});
  auto planar_coarse = Grid({{-3.0, 3.0, 11}, {-4.0, 4.0, 11}, {-0.45, 0.45, 9},
                             {-2.5, 2.5, 9}});
  auto planar_constraint = [&](const Grid& g) {
    return field_max(field_max(signed_distance_band(g, 0, -2.5, 2.5),
                               signed_distance_band(g, 1, -3.5, 3.5)),
                     field_max(signed_distance_band(g, 2, -theta_max, theta_max),
                               signed_distance_band(g, 3, -2.0, 2.0)));
  };

  SubsystemScenario x4d;
  x4d.subsystem = {"x4d", std::make_shared<NearHoverPlanar4D>("x"), {0, 1, 2, 3}, {0}, {0}};
  x4d.grid = planar_grid;
  x4d.coarse_grid = planar_coarse;
  x4d.constraint = planar_constraint(planar_grid);
  x4d.gp_input_dims = {0};
  sc.subsystems.push_back(x4d);

  SubsystemScenario y4d = x4d;
  y4d.subsystem = {"y4d", std::make_shared<NearHoverPlanar4D>("y"), {4, 5, 6, 7}, {1}, {1}};
  sc.subsystems.push_back(y4d);

  SubsystemScenario z2d;
  z2d.subsystem = {"z2d", std::make_shared<NearHoverVertical2D>(), {8, 9}, {2}, {2}};
  z2d.grid = Grid({{0.0, 3.2, 61}, {-4.0, 4.0, 61}});
  z2d.coarse_grid = Grid({{0.0, 3.2, 31}, {-4.0, 4.0, 31}});
  z2d.constraint = field_max(signed_distance_band(z2d.grid, 0, 0.35, 2.8),
                             signed_distance_band(z2d.grid, 1, -3.5, 3.5));
  z2d.gp_input_dims = {0};
  sc.subsystems.push_back(std::move(z2d));

  sc.constraint_box = {{0, -2.5, 2.5}, {4, -2.5, 2.5}, {8, 0.35, 2.8},
                       {1, -3.5, 3.5}, {5, -3.5, 3.5}, {9, -3.5, 3.5},
                       {2, -theta_max, theta_max}, {6, -theta_max, theta_max}};

  sc.wind.kind = WindSpec::Kind::kCornerBox;
  sc.wind.onset_time = 5.0;
  sc.wind.box_states = {0, 4};
  sc.wind.box_channels = {0, 1};

  sc.reference.kind = ReferenceSpec::Kind::kFigureEight;
  sc.controller.kind = ControllerSpec::Kind::kLqr;
  sc.duration = 30.0;
  sc.update_latency = 5.0;
  sc.gp_refit_period = 8.0;
  sc.seed = seed;
  sc.gp_prior = {0.01, {0.8}, 0.0};
  sc.solver.tolerance = 5e-3;  // 4D hover tail, see SolveConfig docs

  sc.initial_state = reference_point(sc, 0.0).state;
  return sc;
}

}  // namespace hjsafe
