#include "hjsafe/interval_field.hpp"

#include <stdexcept>

namespace hjsafe {

IntervalField::IntervalField(Grid grid, std::size_t channels) : grid_(std::move(grid)) {
  lo_.reserve(channels);
  hi_.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    lo_.emplace_back(grid_);
    hi_.emplace_back(grid_);
  }
}

IntervalField IntervalField::constant(Grid grid, std::span<const Interval> bounds) {
  IntervalField f(std::move(grid), bounds.size());
  for (std::size_t c = 0; c < bounds.size(); ++c) {
    if (!(bounds[c].lo <= bounds[c].hi))
      throw std::invalid_argument("IntervalField: lo > hi");
    for (std::size_t i = 0; i < f.grid_.size(); ++i) {
      f.lo_[c][i] = bounds[c].lo;
      f.hi_[c][i] = bounds[c].hi;
    }
  }
  return f;
}

Interval IntervalField::at(std::size_t ch, std::span<const double> x) const {
  return {interp(lo_[ch], x), interp(hi_[ch], x)};
}

void IntervalField::validate() const {
  for (std::size_t c = 0; c < channels(); ++c)
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (!(lo_[c][i] <= hi_[c][i]))
        throw std::runtime_error("IntervalField: lo > hi at a node");
}

bool IntervalField::operator==(const IntervalField& other) const {
  if (!(grid_ == other.grid_) || channels() != other.channels()) return false;
  for (std::size_t c = 0; c < channels(); ++c) {
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (lo_[c][i] != other.lo_[c][i] || hi_[c][i] != other.hi_[c][i]) return false;
  }
  return true;
}

}  // namespace hjsafe
