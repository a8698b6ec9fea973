#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hjsafe/decomposition.hpp"
#include "hjsafe/gp.hpp"
#include "hjsafe/solver.hpp"

namespace hjsafe {

/// Deterministic Gaussian draw on top of mt19937_64; avoids the
/// implementation-defined std distributions so identical seeds give
/// identical episodes.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : rng_(seed) {}
  double uniform();             // [0, 1)
  double normal();              // standard normal, Box-Muller
 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Wind model: per disturbance channel, a state-dependent mean and standard
/// deviation, zero before the onset time.
struct WindSpec {
  enum class Kind {
    kNone,
    kAltitudeProfile,  // mean/sd taper linearly from the ground: w0*(1 - h/a0)+
    kCornerBox,        // constant inside a horizontal box, smooth ramp at edges
  };
  Kind kind = Kind::kNone;
  double onset_time = 0.0;

  // altitude profile
  double w0 = 1.5;               // m/s^2 at ground level
  double s0 = 0.3;               // std at ground level
  double a0 = 1.2;               // decay altitude
  std::size_t altitude_state = 0;
  std::size_t altitude_channel = 0;  // disturbance channel receiving the wind

  // corner box on two position states
  double mean = 1.0;
  double sd = 0.2;
  double ramp = 0.3;  // smoothstep width outside the box faces
  std::array<std::size_t, 2> box_states{0, 4};
  std::array<double, 2> box_lo{-2.5, -2.5};
  std::array<double, 2> box_hi{-1.0, -1.0};
  std::array<std::size_t, 2> box_channels{0, 1};  // channels receiving it

  /// mean/sd per channel at state x and time t.
  void sample_params(std::span<const double> x, double t, std::span<double> mean_out,
                     std::span<double> sd_out) const;
};

struct ReferenceSpec {
  enum class Kind { kSinusoid, kFigureEight } kind = Kind::kSinusoid;
  // sinusoid on one position state (2D demo): cycles lo..hi
  double lo = 0.35, hi = 2.3, period = 8.0;
  // figure eight in (p_x, p_y) at fixed altitude (10D demo)
  double amp_x = 2.2, amp_y = 1.8, altitude = 1.5, period_8 = 20.0;
};

struct ControllerSpec {
  enum class Kind { kDetunedPd, kLqr } kind = Kind::kDetunedPd;
  // detuned PD (2D): aggressive stiffness, weak damping, saturating
  double kp = 2.0, kd = 0.15;
  // LQR weights per subsystem are built in; scale knob for tests
  double lqr_r_scale = 1.0;
};

/// Everything one subsystem needs for solving and updating online.
struct SubsystemScenario {
  Subsystem subsystem;
  Grid grid;
  std::optional<Grid> coarse_grid;
  ScalarField constraint;                 // on grid
  std::vector<std::size_t> gp_input_dims; // subsystem-grid dims the GP sees
};

/// Full simulation description; build_scenario_* make the two stock demos.
struct Scenario {
  std::string name = "scenario";
  std::size_t state_dim = 0, control_dim = 0, disturbance_dim = 0;
  std::shared_ptr<const DynamicsModel> full_model;
  std::vector<SubsystemScenario> subsystems;
  std::vector<double> initial_state;

  // full-state constraint box entries (dim, lo, hi) for the violation metric
  struct BoxEntry { std::size_t dim; double lo; double hi; };
  std::vector<BoxEntry> constraint_box;

  WindSpec wind;
  ReferenceSpec reference;
  ControllerSpec controller;

  double duration = 20.0;
  double physics_dt = 1e-3;
  double control_dt = 0.01;
  double gp_refit_period = 5.0;
  double update_latency = 2.0;   // sim-time delay between trigger and adoption
  bool periodic_updates = true;
  bool filter_enabled = true;

  std::uint64_t seed = 0;
  SolveConfig solver;
  GpConfig gp;
  GpHyperparams gp_prior{0.01, {1.0}, 0.0};  // +-0.3 m/s^2 initial band
};

/// Reference state/control for the performance controller at time t.
struct ReferencePoint {
  std::vector<double> state;
  std::vector<double> control_ff;
};
ReferencePoint reference_point(const Scenario& sc, double t);

std::vector<double> performance_control(const Scenario& sc, double t,
                                        std::span<const double> x);

/// One integration step (RK4) under piecewise-constant control and
/// disturbance; also returns the finite-difference disturbance estimate
/// d_hat = (dv_observed - dv_model_without_disturbance) / dt per channel.
struct StepResult {
  std::vector<double> next_state;
  std::vector<double> measured_disturbance;
};
StepResult step(const DynamicsModel& model, std::span<const double> x,
                std::span<const double> u, std::span<const double> d, double dt,
                std::size_t substeps = 1);

struct EpisodeEvent {
  double time = 0.0;
  std::string type;  // wind_onset | violation | contraction | update_started |
                     // adoption | emergency | constraint_violation
  double lambda = 0.0;
  double detail = 0.0;  // margin, channel, or other scalar payload
};

struct EpisodeSample {
  double time = 0.0;
  std::vector<double> state;
  std::vector<double> u_perf;
  std::vector<double> u_applied;
  bool override_active = false;
  double value = 0.0;
  double lambda = 0.0;
  std::vector<double> d_hat;
  std::vector<double> d_lo, d_hi;  // current bound at the state
};

struct UpdateTiming {
  double trigger_time = 0.0;
  double gp_seconds = 0.0;
  double solve_seconds = 0.0;
  std::vector<std::size_t> iterations;  // per subsystem
};

struct EpisodeLog {
  std::vector<EpisodeSample> samples;
  std::vector<EpisodeEvent> events;
  std::vector<UpdateTiming> update_timings;  // wall clock, excluded from CSV
  std::size_t constraint_violations = 0;
  std::size_t override_count = 0;

  void write_csv(std::ostream& os) const;
  void write_events(std::ostream& os) const;  // JSON lines, deterministic
};

/// Initial solves for every subsystem (coarse-to-fine when a coarse grid is
/// configured), under the scenario's prior disturbance bounds.
struct InitialSafety {
  std::vector<SolveResult> solves;
  std::vector<IntervalField> dbounds;
  std::shared_ptr<Decomposition> decomposition;
};
InitialSafety initial_safety(const Scenario& sc);

/// Run the closed loop: filter, integrate, measure disturbances, check them
/// against the current bounds, contract on violations, refit + warm-solve in
/// the background, adopt on a deterministic sim-time schedule.
EpisodeLog run_episode(const Scenario& sc, Decomposition& decomposition);

/// Stock scenarios mirroring the two demos.
Scenario build_scenario_quad2d(std::uint64_t seed = 0);
Scenario build_scenario_10d(std::uint64_t seed = 0);

}  // namespace hjsafe
