#include "hjsafe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjsafe {

void AffineFlow::reset(std::size_t n, std::size_t m, std::size_t p) {
  state_dim = n;
  control_dim = m;
  disturbance_dim = p;
  drift.fill(0.0);
  for (auto& row : control) row.fill(0.0);
  for (auto& row : disturbance) row.fill(0.0);
}

std::vector<std::size_t> DynamicsModel::disturbance_rows() const {
  return {};
}

void DynamicsModel::flow(std::span<const double> x, std::span<const double> u,
                         std::span<const double> d, std::span<double> xdot) const {
  if (x.size() != state_dim() || u.size() != control_dim() ||
      d.size() != disturbance_dim() || xdot.size() != state_dim())
    throw std::invalid_argument("flow: dimension mismatch");
  AffineFlow af;
  affine(x, af);
  for (std::size_t i = 0; i < state_dim(); ++i) {
    double v = af.drift[i];
    for (std::size_t j = 0; j < control_dim(); ++j) v += af.control[i][j] * u[j];
    for (std::size_t k = 0; k < disturbance_dim(); ++k) v += af.disturbance[i][k] * d[k];
    xdot[i] = v;
  }
}

ExtremalInputs extremal_inputs(const AffineFlow& flow, std::span<const double> costate,
                               std::span<const Interval> ubounds,
                               std::span<const Interval> dbounds) {
  ExtremalInputs out;
  bool any_active = false;
  for (std::size_t j = 0; j < flow.control_dim; ++j) {
    double coeff = 0.0;
    for (std::size_t i = 0; i < flow.state_dim; ++i)
      coeff += costate[i] * flow.control[i][j];
    // control minimizes: positive coefficient pulls to the lower bound
    out.u[j] = coeff > 0.0 ? ubounds[j].lo : (coeff < 0.0 ? ubounds[j].hi : ubounds[j].lo);
    if (coeff != 0.0) any_active = true;
  }
  for (std::size_t k = 0; k < flow.disturbance_dim; ++k) {
    double coeff = 0.0;
    for (std::size_t i = 0; i < flow.state_dim; ++i)
      coeff += costate[i] * flow.disturbance[i][k];
    // disturbance maximizes
    out.d[k] = coeff > 0.0 ? dbounds[k].hi : (coeff < 0.0 ? dbounds[k].lo : dbounds[k].lo);
    if (coeff != 0.0) any_active = true;
  }
  out.degenerate = !any_active && (flow.control_dim + flow.disturbance_dim) > 0;
  return out;
}

ExtremalInputs extremal_inputs(const DynamicsModel& model, std::span<const double> x,
                               std::span<const double> costate,
                               std::span<const Interval> dbounds) {
  AffineFlow af;
  model.affine(x, af);
  const auto ub = model.control_bounds();
  return extremal_inputs(af, costate, ub, dbounds);
}

double hamiltonian(const AffineFlow& flow, std::span<const double> costate,
                   std::span<const Interval> ubounds, std::span<const Interval> dbounds) {
  const auto ext = extremal_inputs(flow, costate, ubounds, dbounds);
  double h = 0.0;
  for (std::size_t i = 0; i < flow.state_dim; ++i) {
    double fi = flow.drift[i];
    for (std::size_t j = 0; j < flow.control_dim; ++j) fi += flow.control[i][j] * ext.u[j];
    for (std::size_t k = 0; k < flow.disturbance_dim; ++k)
      fi += flow.disturbance[i][k] * ext.d[k];
    h += costate[i] * fi;
  }
  return h;
}

double hamiltonian(const DynamicsModel& model, std::span<const double> x,
                   std::span<const double> costate, std::span<const Interval> dbounds) {
  AffineFlow af;
  model.affine(x, af);
  const auto ub = model.control_bounds();
  return hamiltonian(af, costate, ub, dbounds);
}

void flow_bounds(const AffineFlow& flow, std::span<const Interval> ubounds,
                 std::span<const Interval> dbounds, std::span<double> alpha) {
  for (std::size_t i = 0; i < flow.state_dim; ++i) {
    double lo = flow.drift[i];
    double hi = flow.drift[i];
    for (std::size_t j = 0; j < flow.control_dim; ++j) {
      const double a = flow.control[i][j] * ubounds[j].lo;
      const double b = flow.control[i][j] * ubounds[j].hi;
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    for (std::size_t k = 0; k < flow.disturbance_dim; ++k) {
      const double a = flow.disturbance[i][k] * dbounds[k].lo;
      const double b = flow.disturbance[i][k] * dbounds[k].hi;
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    alpha[i] = std::max(std::abs(lo), std::abs(hi));
  }
}

std::vector<double> flow_bounds(const DynamicsModel& model, std::span<const double> x,
                                std::span<const Interval> dbounds) {
  AffineFlow af;
  model.affine(x, af);
  const auto ub = model.control_bounds();
  std::vector<double> alpha(model.state_dim());
  flow_bounds(af, ub, dbounds, alpha);
  return alpha;
}

// ---------------------------------------------------------------------------

void Quad2DVert::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(2, 1, 1);
  out.drift[0] = x[1];
  out.drift[1] = p_.gravity + p_.k_offset;
  out.control[1][0] = p_.k_thrust;
  out.disturbance[1][0] = 1.0;
}

void NearHoverPlanar4D::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(4, 1, 1);
  const double theta = x[2];
  out.drift[0] = x[1];
  out.drift[1] = p_.gravity * std::tan(theta);
  out.drift[2] = -p_.d1 * theta + x[3];
  out.drift[3] = -p_.d0 * theta;
  out.control[3][0] = p_.n0;
  out.disturbance[1][0] = 1.0;
}

void NearHoverVertical2D::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(2, 1, 1);
  out.drift[0] = x[1];
  out.drift[1] = -p_.gravity;
  out.control[1][0] = p_.thrust_gain;
  out.disturbance[1][0] = 1.0;
}

void DoubleIntegrator::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(2, 1, 1);
  out.drift[0] = x[1];
  out.control[1][0] = 1.0;
  out.disturbance[1][0] = 1.0;
}

void TwinDoubleIntegrator::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(4, 2, 2);
  out.drift[0] = x[1];
  out.control[1][0] = 1.0;
  out.disturbance[1][0] = 1.0;
  out.drift[2] = x[3];
  out.control[3][1] = 1.0;
  out.disturbance[3][1] = 1.0;
}

std::vector<Interval> NearHover10D::control_bounds() const {
  auto bx = x_.control_bounds();
  auto by = y_.control_bounds();
  auto bz = z_.control_bounds();
  return {bx[0], by[0], bz[0]};
}

void NearHover10D::affine(std::span<const double> x, AffineFlow& out) const {
  out.reset(10, 3, 3);
  AffineFlow sub;
  x_.affine(x.subspan(0, 4), sub);
  for (std::size_t i = 0; i < 4; ++i) {
    out.drift[i] = sub.drift[i];
    out.control[i][0] = sub.control[i][0];
    out.disturbance[i][0] = sub.disturbance[i][0];
  }
  y_.affine(x.subspan(4, 4), sub);
  for (std::size_t i = 0; i < 4; ++i) {
    out.drift[4 + i] = sub.drift[i];
    out.control[4 + i][1] = sub.control[i][0];
    out.disturbance[4 + i][1] = sub.disturbance[i][0];
  }
  z_.affine(x.subspan(8, 2), sub);
  for (std::size_t i = 0; i < 2; ++i) {
    out.drift[8 + i] = sub.drift[i];
    out.control[8 + i][2] = sub.control[i][0];
    out.disturbance[8 + i][2] = sub.disturbance[i][0];
  }
}

std::shared_ptr<const DynamicsModel> make_model(const std::string& name) {
  if (name == "quad2d_vert") return std::make_shared<Quad2DVert>();
  if (name == "near_hover_x4d") return std::make_shared<NearHoverPlanar4D>("x");
  if (name == "near_hover_y4d") return std::make_shared<NearHoverPlanar4D>("y");
  if (name == "near_hover_z2d") return std::make_shared<NearHoverVertical2D>();
  if (name == "near_hover_10d") return std::make_shared<NearHover10D>();
  if (name == "double_integrator") return std::make_shared<DoubleIntegrator>();
  if (name == "twin_double_integrator") return std::make_shared<TwinDoubleIntegrator>();
  throw std::invalid_argument("unknown model: " + name);
}

}  // namespace hjsafe
