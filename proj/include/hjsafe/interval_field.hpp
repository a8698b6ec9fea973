#pragma once

#include "hjsafe/dynamics.hpp"
#include "hjsafe/grid.hpp"

namespace hjsafe {

/// Per-node disturbance interval, one [lo, hi] pair per channel sampled on a
/// solver grid. The solver reads these instead of querying the GP in its
/// inner loop.
class IntervalField {
 public:
  IntervalField() = default;
  IntervalField(Grid grid, std::size_t channels);

  /// Constant bounds everywhere.
  static IntervalField constant(Grid grid, std::span<const Interval> bounds);

  const Grid& grid() const { return grid_; }
  std::size_t channels() const { return lo_.size(); }

  ScalarField& lo(std::size_t ch) { return lo_[ch]; }
  ScalarField& hi(std::size_t ch) { return hi_[ch]; }
  const ScalarField& lo(std::size_t ch) const { return lo_[ch]; }
  const ScalarField& hi(std::size_t ch) const { return hi_[ch]; }

  Interval at_node(std::size_t ch, std::size_t lin) const {
    return {lo_[ch][lin], hi_[ch][lin]};
  }

  /// Interpolated interval at a state (clamped at the grid edge).
  Interval at(std::size_t ch, std::span<const double> x) const;

  /// lo <= hi at every node; throws otherwise.
  void validate() const;

  bool operator==(const IntervalField& other) const;

 private:
  Grid grid_;
  std::vector<ScalarField> lo_, hi_;
};

}  // namespace hjsafe
