#include "hjsafe/grid.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hjsafe {

Grid::Grid(std::vector<GridDim> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("Grid: ndims must be >= 1");
  if (dims_.size() > 32) throw std::invalid_argument("Grid: ndims must be <= 32");
  spacing_.resize(dims_.size());
  strides_.resize(dims_.size());
  size_ = 1;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (!(d.min < d.max))
      throw std::invalid_argument("Grid: min must be < max in dim " + std::to_string(i));
    if (d.n < 2)
      throw std::invalid_argument("Grid: need at least 2 nodes in dim " + std::to_string(i));
    if (!std::isfinite(d.min) || !std::isfinite(d.max))
      throw std::invalid_argument("Grid: non-finite bounds in dim " + std::to_string(i));
    spacing_[i] = (d.max - d.min) / static_cast<double>(d.n - 1);
    size_ *= d.n;
  }
  // last dimension fastest-varying
  strides_[dims_.size() - 1] = 1;
  for (std::size_t i = dims_.size() - 1; i-- > 0;)
    strides_[i] = strides_[i + 1] * dims_[i + 1].n;
}

double Grid::coord(std::size_t d, std::size_t k) const {
  const auto& dim = dims_[d];
  if (k >= dim.n) throw std::out_of_range("Grid::coord: index out of range");
  if (k == dim.n - 1) return dim.max;  // endpoint exact regardless of rounding
  return dim.min + static_cast<double>(k) * spacing_[d];
}

std::size_t Grid::linear_index(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size())
    throw std::invalid_argument("Grid::linear_index: index rank mismatch");
  std::size_t lin = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (index[i] >= dims_[i].n)
      throw std::out_of_range("Grid::linear_index: index out of range in dim " +
                              std::to_string(i));
    lin += index[i] * strides_[i];
  }
  return lin;
}

void Grid::unravel(std::size_t lin, std::span<std::size_t> index) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    index[i] = lin / strides_[i];
    lin -= index[i] * strides_[i];
  }
}

ScalarField::ScalarField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("ScalarField: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: non-finite value");
}

std::vector<double> node_coords(const Grid& grid, std::span<const std::size_t> index) {
  if (index.size() != grid.ndims())
    throw std::invalid_argument("node_coords: index rank mismatch");
  std::vector<double> x(grid.ndims());
  for (std::size_t i = 0; i < grid.ndims(); ++i) x[i] = grid.coord(i, index[i]);
  return x;
}

namespace {

// Locate the cell containing x along each dim: base node index and the
// fractional offset within the cell. Clamps and reports whether x fell
// outside the grid extent.
struct CellLocation {
  std::size_t base[32];
  double frac[32];
  bool out_of_domain = false;
};

CellLocation locate(const Grid& grid, std::span<const double> x) {
  if (x.size() != grid.ndims())
    throw std::invalid_argument("interp: query rank mismatch");
  CellLocation loc;
  for (std::size_t d = 0; d < grid.ndims(); ++d) {
    if (!std::isfinite(x[d])) throw std::invalid_argument("interp: non-finite query");
    const auto& dim = grid.dim(d);
    double t = (x[d] - dim.min) / grid.spacing(d);
    if (t < 0.0) {
      t = 0.0;
      loc.out_of_domain = true;
    }
    const double tmax = static_cast<double>(dim.n - 1);
    if (t > tmax) {
      t = tmax;
      if (x[d] > dim.max) loc.out_of_domain = true;
    }
    std::size_t i0 = static_cast<std::size_t>(t);
    if (i0 > dim.n - 2) i0 = dim.n - 2;
    loc.base[d] = i0;
    loc.frac[d] = t - static_cast<double>(i0);
  }
  return loc;
}

}  // namespace

InterpResult interp_ex(const ScalarField& field, std::span<const double> x) {
  const Grid& grid = field.grid();
  const CellLocation loc = locate(grid, x);
  const std::size_t nd = grid.ndims();

  double value = 0.0;
  const std::size_t corners = std::size_t{1} << nd;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t lin = 0;
    for (std::size_t d = 0; d < nd; ++d) {
      const bool hi = (corner >> d) & 1u;
      w *= hi ? loc.frac[d] : 1.0 - loc.frac[d];
      lin += (loc.base[d] + (hi ? 1 : 0)) * grid.stride(d);
    }
    if (w != 0.0) value += w * field[lin];
  }
  return {value, loc.out_of_domain};
}

double interp(const ScalarField& field, std::span<const double> x) {
  return interp_ex(field, x).value;
}

std::pair<double, double> gradient_at(const ScalarField& field, std::size_t lin,
                                      std::size_t d) {
  const Grid& grid = field.grid();
  const std::size_t n = grid.dim(d).n;
  const std::size_t stride = grid.stride(d);
  const std::size_t k = (lin / stride) % n;
  const double inv_dx = 1.0 / grid.spacing(d);

  double left, right;
  if (k > 0 && k < n - 1) {
    left = (field[lin] - field[lin - stride]) * inv_dx;
    right = (field[lin + stride] - field[lin]) * inv_dx;
  } else if (k == 0) {
    right = (field[lin + stride] - field[lin]) * inv_dx;
    left = right;  // replicate the interior one-sided value
  } else {
    left = (field[lin] - field[lin - stride]) * inv_dx;
    right = left;
  }
  return {left, right};
}

GradientPair gradient(const ScalarField& field, std::span<const std::size_t> index) {
  const Grid& grid = field.grid();
  const std::size_t lin = grid.linear_index(index);
  GradientPair g;
  g.left.resize(grid.ndims());
  g.right.resize(grid.ndims());
  for (std::size_t d = 0; d < grid.ndims(); ++d) {
    auto [l, r] = gradient_at(field, lin, d);
    g.left[d] = l;
    g.right[d] = r;
  }
  return g;
}

double max_cell_jump(const ScalarField& field, std::span<const double> x) {
  const Grid& grid = field.grid();
  const CellLocation loc = locate(grid, x);
  const std::size_t nd = grid.ndims();
  double jump = 0.0;
  const std::size_t corners = std::size_t{1} << nd;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    std::size_t lin = 0;
    for (std::size_t d = 0; d < nd; ++d)
      lin += (loc.base[d] + ((corner >> d) & 1u)) * grid.stride(d);
    // edges: flip one coordinate at a time, count each edge once
    for (std::size_t d = 0; d < nd; ++d) {
      if ((corner >> d) & 1u) continue;
      const double dv = std::abs(field[lin + grid.stride(d)] - field[lin]);
      if (dv > jump) jump = dv;
    }
  }
  return jump;
}

double max_adjacent_jump(const ScalarField& field) {
  const Grid& grid = field.grid();
  double jump = 0.0;
  std::vector<std::size_t> idx(grid.ndims(), 0);
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    for (std::size_t d = 0; d < grid.ndims(); ++d) {
      if (idx[d] + 1 >= grid.dim(d).n) continue;
      const double dv = std::abs(field[lin + grid.stride(d)] - field[lin]);
      if (dv > jump) jump = dv;
    }
    for (std::size_t d = grid.ndims(); d-- > 0;) {
      if (++idx[d] < grid.dim(d).n) break;
      idx[d] = 0;
    }
  }
  return jump;
}

ScalarField resample(const ScalarField& field, const Grid& target) {
  if (target.ndims() != field.grid().ndims())
    throw std::invalid_argument("resample: dimension mismatch");
  ScalarField out(target);
  std::vector<std::size_t> idx(target.ndims(), 0);
  std::vector<double> x(target.ndims());
  for (std::size_t lin = 0; lin < target.size(); ++lin) {
    for (std::size_t d = 0; d < target.ndims(); ++d) x[d] = target.coord(d, idx[d]);
    out[lin] = interp(field, x);
    // odometer increment, last dim fastest
    for (std::size_t d = target.ndims(); d-- > 0;) {
      if (++idx[d] < target.dim(d).n) break;
      idx[d] = 0;
    }
  }
  return out;
}

}  // namespace hjsafe
