#pragma once

#include <cstddef>
#include <vector>

#include "aaslip/model.hpp"

namespace aaslip {

/// Stance-phase knot trajectory on a uniform grid over [0, duration].
struct Trajectory {
  double duration = 0.0;
  std::vector<StanceState> states;
  std::vector<ControlInput> controls;

  std::size_t num_knots() const { return states.size(); }

  /// Uniform knot spacing, duration / (num_knots - 1).
  double step() const;
  double knot_time(std::size_t i) const;

  /// Throws InvalidArgumentError on mismatched counts, fewer than two knots,
  /// or a negative / non-finite duration.
  void validate() const;
};

}  // namespace aaslip
