#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hjsafe {

/// One axis of a uniform Cartesian grid: n nodes spaced evenly over [min, max].
struct GridDim {
  double min = 0.0;
  double max = 1.0;
  std::size_t n = 2;

  bool operator==(const GridDim&) const = default;
};

/// N-dimensional uniform Cartesian grid. Node k along dim i sits at
/// min_i + k * spacing_i; index 0 and n-1 land on min and max exactly.
/// Linear storage convention is row-major with the last dimension
/// fastest-varying.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<GridDim> dims);

  std::size_t ndims() const { return dims_.size(); }
  std::size_t size() const { return size_; }
  const GridDim& dim(std::size_t i) const { return dims_[i]; }
  const std::vector<GridDim>& dims() const { return dims_; }
  double spacing(std::size_t i) const { return spacing_[i]; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  /// Coordinate of node k along dim d.
  double coord(std::size_t d, std::size_t k) const;

  std::size_t linear_index(std::span<const std::size_t> index) const;
  void unravel(std::size_t lin, std::span<std::size_t> index) const;

  bool operator==(const Grid&) const = default;

 private:
  std::vector<GridDim> dims_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// A scalar value per grid node. Immutable by convention once built: the
/// solver and filters share fields across threads without locking.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Grid grid, double fill = 0.0);
  ScalarField(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t lin) const { return values_[lin]; }
  double& operator[](std::size_t lin) { return values_[lin]; }
  std::size_t size() const { return values_.size(); }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Coordinates of the node addressed by a multi-index. Throws on
/// out-of-range indices.
std::vector<double> node_coords(const Grid& grid, std::span<const std::size_t> index);

struct InterpResult {
  double value = 0.0;
  bool out_of_domain = false;  // query was clamped to the grid boundary
};

/// Multilinear interpolation at x. Out-of-bounds queries clamp to the
/// boundary node and set the out_of_domain flag; the safety filter treats
/// that flag as unsafe. Non-finite x throws.
InterpResult interp_ex(const ScalarField& field, std::span<const double> x);
double interp(const ScalarField& field, std::span<const double> x);

/// One-sided difference pair (D-, D+) along dim d at a node given by linear
/// index. At grid boundaries the available one-sided difference is
/// replicated to the missing side.
std::pair<double, double> gradient_at(const ScalarField& field, std::size_t lin,
                                      std::size_t d);

struct GradientPair {
  std::vector<double> left;   // D- per dim
  std::vector<double> right;  // D+ per dim
};

GradientPair gradient(const ScalarField& field, std::span<const std::size_t> index);

/// Field value jumps between adjacent nodes of the cell containing x,
/// reported as the largest |dV| over the cell's edges. Used to size the
/// filter switching band.
double max_cell_jump(const ScalarField& field, std::span<const double> x);

/// Largest |dV| between any pair of adjacent nodes, a Lipschitz-times-
/// spacing scale for the whole field.
double max_adjacent_jump(const ScalarField& field);

/// Sample a field onto another grid of the same dimension by multilinear
/// interpolation. Works both coarse-to-fine and fine-to-coarse.
ScalarField resample(const ScalarField& field, const Grid& target);

}  // namespace hjsafe
