#pragma once

#include "hjsafe/grid.hpp"

namespace hjsafe {

/// Implicit set in level-set form: the set is {x : field(x) <= 0}, its
/// boundary the zero level set.
struct ImplicitSet {
  ScalarField field;

  bool contains(std::span<const double> x) const {
    auto r = interp_ex(field, x);
    return !r.out_of_domain && r.value <= 0.0;
  }
};

/// Signed distance to an axis-aligned box, sampled on grid nodes: negative
/// inside (minus the distance to the nearest face), Euclidean distance
/// outside. Exact for boxes, no distance transform involved.
ScalarField signed_distance_box(const Grid& grid, std::span<const double> lo,
                                std::span<const double> hi);

/// Pointwise signed distance of a single point to the box.
double signed_distance_box_at(std::span<const double> x, std::span<const double> lo,
                              std::span<const double> hi);

/// Signed distance to the band lo <= x_dim <= hi in a single coordinate,
/// ignoring the others. Per-axis bands combine into boxes via set_intersect.
ScalarField signed_distance_band(const Grid& grid, std::size_t dim, double lo, double hi);

/// Set algebra in level-set form: intersection is the pointwise max of the
/// fields, union the pointwise min. The result is a valid level-set function
/// for the combined set though not a true signed distance.
ImplicitSet set_intersect(const ImplicitSet& a, const ImplicitSet& b);
ImplicitSet set_union(const ImplicitSet& a, const ImplicitSet& b);

ScalarField field_max(const ScalarField& a, const ScalarField& b);
ScalarField field_min(const ScalarField& a, const ScalarField& b);

}  // namespace hjsafe
