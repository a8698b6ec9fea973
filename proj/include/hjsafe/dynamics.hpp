#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjsafe {

inline constexpr std::size_t kMaxStateDim = 10;
inline constexpr std::size_t kMaxInputDim = 3;

/// Interval bounds per channel, e.g. control box U or disturbance set D(x).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Control-affine flow at a point, f(x,u,d) = drift + B u + C d, with the
/// matrices stored row-per-state-dimension. Fixed-capacity so the solver's
/// inner loop stays allocation-free.
struct AffineFlow {
  std::size_t state_dim = 0;
  std::size_t control_dim = 0;
  std::size_t disturbance_dim = 0;
  std::array<double, kMaxStateDim> drift{};
  std::array<std::array<double, kMaxInputDim>, kMaxStateDim> control{};      // B
  std::array<std::array<double, kMaxInputDim>, kMaxStateDim> disturbance{};  // C

  void reset(std::size_t n, std::size_t m, std::size_t p);
};

/// Control-affine dynamics with box-bounded inputs. Models are immutable
/// value objects; every operation is pure and thread-safe.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t control_dim() const = 0;
  virtual std::size_t disturbance_dim() const = 0;
  virtual std::string name() const = 0;

  /// Box control bounds U, one interval per channel.
  virtual std::vector<Interval> control_bounds() const = 0;

  /// Affine decomposition of the flow at x.
  virtual void affine(std::span<const double> x, AffineFlow& out) const = 0;

  /// State rows that each disturbance channel feeds (unit coefficient in all
  /// models here); used by the sim's disturbance estimator.
  virtual std::vector<std::size_t> disturbance_rows() const;

  /// f(x, u, d), evaluated through the affine decomposition.
  void flow(std::span<const double> x, std::span<const double> u,
            std::span<const double> d, std::span<double> xdot) const;
};

struct ExtremalInputs {
  std::array<double, kMaxInputDim> u{};
  std::array<double, kMaxInputDim> d{};
  bool degenerate = false;  // every input coefficient vanished
};

/// argmin_u argmax_d <p, f(x,u,d)> for affine dynamics: each channel sits at
/// a box vertex decided by the sign of its costate coefficient; ties take
/// the lower bound so results are reproducible.
ExtremalInputs extremal_inputs(const AffineFlow& flow, std::span<const double> costate,
                               std::span<const Interval> ubounds,
                               std::span<const Interval> dbounds);

ExtremalInputs extremal_inputs(const DynamicsModel& model, std::span<const double> x,
                               std::span<const double> costate,
                               std::span<const Interval> dbounds);

/// min_u max_d <p, f(x,u,d)>, exact for affine dynamics.
double hamiltonian(const AffineFlow& flow, std::span<const double> costate,
                   std::span<const Interval> ubounds, std::span<const Interval> dbounds);

double hamiltonian(const DynamicsModel& model, std::span<const double> x,
                   std::span<const double> costate, std::span<const Interval> dbounds);

/// Per-dimension max |f_i| over the input boxes; attained at box vertices.
/// These are the Lax-Friedrichs dissipation coefficients.
void flow_bounds(const AffineFlow& flow, std::span<const Interval> ubounds,
                 std::span<const Interval> dbounds, std::span<double> alpha);

std::vector<double> flow_bounds(const DynamicsModel& model, std::span<const double> x,
                                std::span<const Interval> dbounds);

// ---------------------------------------------------------------------------
// Models

/// Vertical-axis quadrotor: x1 altitude, x2 vertical velocity, normalized
/// thrust command u in [0,1].
///   x1' = x2
///   x2' = k_T u + g + k_0 + d
/// Defaults give net acceleration spanning [-9.8, 9.8] m/s^2 with hover at
/// u = 0.5.
class Quad2DVert final : public DynamicsModel {
 public:
  struct Params {
    double k_thrust = 19.6;  // m/s^2 per unit thrust command
    double k_offset = 0.0;   // m/s^2
    double gravity = -9.8;   // m/s^2
  };

  Quad2DVert() : p_{} {}
  explicit Quad2DVert(Params p) : p_(p) {}

  std::size_t state_dim() const override { return 2; }
  std::size_t control_dim() const override { return 1; }
  std::size_t disturbance_dim() const override { return 1; }
  std::string name() const override { return "quad2d_vert"; }
  std::vector<Interval> control_bounds() const override { return {{0.0, 1.0}}; }
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1}; }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Planar-axis subsystem of the 10D near-hover quadrotor (x or y axis):
/// states (p, v, theta, omega), control is the commanded angle S.
///   p'     = v
///   v'     = g tan(theta) + d
///   theta' = -d1 theta + omega
///   omega' = -d0 theta + n0 S
class NearHoverPlanar4D final : public DynamicsModel {
 public:
  struct Params {
    double d0 = 10.0;
    double d1 = 8.0;
    double n0 = 10.0;
    double gravity = 9.8;
    double max_angle_cmd = 0.2443;  // 14 degrees in radians
  };

  explicit NearHoverPlanar4D(std::string axis = "x")
      : axis_(std::move(axis)), p_{} {}
  NearHoverPlanar4D(std::string axis, Params p) : axis_(std::move(axis)), p_(p) {}

  std::size_t state_dim() const override { return 4; }
  std::size_t control_dim() const override { return 1; }
  std::size_t disturbance_dim() const override { return 1; }
  std::string name() const override { return "near_hover_" + axis_ + "4d"; }
  std::vector<Interval> control_bounds() const override {
    return {{-p_.max_angle_cmd, p_.max_angle_cmd}};
  }
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1}; }

  const Params& params() const { return p_; }

 private:
  std::string axis_;
  Params p_;
};

/// Vertical subsystem of the 10D near-hover quadrotor: states (p_z, v_z),
/// control is thrust in weight units.
///   p_z' = v_z
///   v_z' = thrust_gain * T_z - g + d
/// Thrust spans 0.6..1.4 of hover weight, so the net vertical authority is
/// +-0.4 g around hover.
class NearHoverVertical2D final : public DynamicsModel {
 public:
  struct Params {
    double gravity = 9.8;
    double thrust_gain = 1.0;  // k_T/m after normalizing thrust to weight units
    double thrust_frac_lo = 0.6;
    double thrust_frac_hi = 1.4;
  };

  NearHoverVertical2D() : p_{} {}
  explicit NearHoverVertical2D(Params p) : p_(p) {}

  std::size_t state_dim() const override { return 2; }
  std::size_t control_dim() const override { return 1; }
  std::size_t disturbance_dim() const override { return 1; }
  std::string name() const override { return "near_hover_z2d"; }
  std::vector<Interval> control_bounds() const override {
    const double w = p_.gravity / p_.thrust_gain;
    return {{p_.thrust_frac_lo * w, p_.thrust_frac_hi * w}};
  }
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1}; }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Double integrator (p, v) with acceleration input and additive
/// disturbance; the analytic oracle model for tests.
class DoubleIntegrator final : public DynamicsModel {
 public:
  struct Params {
    double a_min = -1.0;
    double a_max = 1.0;
  };

  DoubleIntegrator() : p_{} {}
  explicit DoubleIntegrator(Params p) : p_(p) {}

  std::size_t state_dim() const override { return 2; }
  std::size_t control_dim() const override { return 1; }
  std::size_t disturbance_dim() const override { return 1; }
  std::string name() const override { return "double_integrator"; }
  std::vector<Interval> control_bounds() const override { return {{p_.a_min, p_.a_max}}; }
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1}; }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Two decoupled double integrators stacked into one 4D state
/// (p1, v1, p2, v2); decomposition-exactness oracle.
class TwinDoubleIntegrator final : public DynamicsModel {
 public:
  TwinDoubleIntegrator() : p_{} {}
  explicit TwinDoubleIntegrator(DoubleIntegrator::Params p) : p_(p) {}

  std::size_t state_dim() const override { return 4; }
  std::size_t control_dim() const override { return 2; }
  std::size_t disturbance_dim() const override { return 2; }
  std::string name() const override { return "twin_double_integrator"; }
  std::vector<Interval> control_bounds() const override {
    return {{p_.a_min, p_.a_max}, {p_.a_min, p_.a_max}};
  }
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1, 3}; }

 private:
  DoubleIntegrator::Params p_;
};

/// Full 10D near-hover model, Eq.-for-eq. the stacked x/y planar and z
/// vertical subsystems. State order:
/// (p_x, v_x, th_x, w_x, p_y, v_y, th_y, w_y, p_z, v_z); controls
/// (S_x, S_y, T_z); disturbances (d_x, d_y, d_z).
class NearHover10D final : public DynamicsModel {
 public:
  NearHover10D() : x_("x"), y_("y"), z_() {}
  NearHover10D(NearHoverPlanar4D::Params planar, NearHoverVertical2D::Params vert)
      : x_("x", planar), y_("y", planar), z_(vert) {}

  std::size_t state_dim() const override { return 10; }
  std::size_t control_dim() const override { return 3; }
  std::size_t disturbance_dim() const override { return 3; }
  std::string name() const override { return "near_hover_10d"; }
  std::vector<Interval> control_bounds() const override;
  void affine(std::span<const double> x, AffineFlow& out) const override;
  std::vector<std::size_t> disturbance_rows() const override { return {1, 5, 9}; }

  const NearHoverPlanar4D& planar_x() const { return x_; }
  const NearHoverPlanar4D& planar_y() const { return y_; }
  const NearHoverVertical2D& vertical() const { return z_; }

 private:
  NearHoverPlanar4D x_, y_;
  NearHoverVertical2D z_;
};

/// Factory by model name; throws on unknown names. Parameters not listed in
/// `params` keep their defaults.
std::shared_ptr<const DynamicsModel> make_model(const std::string& name);

}  // namespace hjsafe
