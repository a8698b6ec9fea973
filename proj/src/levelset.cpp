#include "hjsafe/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hjsafe {

double signed_distance_box_at(std::span<const double> x, std::span<const double> lo,
                              std::span<const double> hi) {
  double inside = std::numeric_limits<double>::infinity();
  double outside_sq = 0.0;
  bool outside = false;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double below = lo[d] - x[d];
    const double above = x[d] - hi[d];
    const double excess = std::max(below, above);
    if (excess > 0.0) {
      outside = true;
      outside_sq += excess * excess;
    } else {
      inside = std::min(inside, -excess);  // distance to the nearest face
    }
  }
  if (outside) return std::sqrt(outside_sq);
  return -inside;
}

ScalarField signed_distance_box(const Grid& grid, std::span<const double> lo,
                                std::span<const double> hi) {
  if (lo.size() != grid.ndims() || hi.size() != grid.ndims())
    throw std::invalid_argument("signed_distance_box: bounds rank mismatch");
  for (std::size_t d = 0; d < grid.ndims(); ++d)
    if (!(lo[d] < hi[d]))
      throw std::invalid_argument("signed_distance_box: lo must be < hi in dim " +
                                  std::to_string(d));

  ScalarField out(grid);
  std::vector<std::size_t> idx(grid.ndims(), 0);
  std::vector<double> x(grid.ndims());
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    for (std::size_t d = 0; d < grid.ndims(); ++d) x[d] = grid.coord(d, idx[d]);
    out[lin] = signed_distance_box_at(x, lo, hi);
    for (std::size_t d = grid.ndims(); d-- > 0;) {
      if (++idx[d] < grid.dim(d).n) break;
      idx[d] = 0;
    }
  }
  return out;
}

ScalarField signed_distance_band(const Grid& grid, std::size_t dim, double lo, double hi) {
  if (dim >= grid.ndims())
    throw std::invalid_argument("signed_distance_band: dim out of range");
  if (!(lo < hi)) throw std::invalid_argument("signed_distance_band: lo must be < hi");
  ScalarField out(grid);
  const std::size_t stride = grid.stride(dim);
  const std::size_t n = grid.dim(dim).n;
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    const double x = grid.coord(dim, (lin / stride) % n);
    out[lin] = std::max(lo - x, x - hi);
  }
  return out;
}

namespace {

template <typename Op>
ScalarField combine(const ScalarField& a, const ScalarField& b, Op op, const char* what) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

}  // namespace

ScalarField field_max(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](double x, double y) { return std::max(x, y); }, "field_max");
}

ScalarField field_min(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](double x, double y) { return std::min(x, y); }, "field_min");
}

ImplicitSet set_intersect(const ImplicitSet& a, const ImplicitSet& b) {
  return {field_max(a.field, b.field)};
}

ImplicitSet set_union(const ImplicitSet& a, const ImplicitSet& b) {
  return {field_min(a.field, b.field)};
}

}  // namespace hjsafe
