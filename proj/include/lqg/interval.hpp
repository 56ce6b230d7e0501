#pragma once

namespace lqg {

// Closed-left, open-right boundary interval [lo, hi). The half-open convention
// makes mass additivity at grid-aligned cut points exact: every atom belongs
// to exactly one side of a split.
struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  bool valid() const { return hi > lo; }
  bool contains(double x) const { return x >= lo && x < hi; }
  bool covers(const Interval& sub) const { return sub.lo >= lo && sub.hi <= hi; }
};

}  // namespace lqg
