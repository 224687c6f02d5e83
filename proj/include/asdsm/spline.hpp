#pragma once

#include <span>
#include <vector>

#include "asdsm/errors.hpp"

namespace asdsm {

// Natural cubic spline interpolant (zero second derivative at both ends).
// Evaluation at a knot returns the knot value exactly.
class CubicSpline {
 public:
  // Knots strictly increasing, at least two of them.
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  double operator()(double x) const;

  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }

 private:
  std::vector<double> x_, y_, m_;  // m_: second derivatives at the knots
};

// The correction interpolant used on coarse error data: knots are the interior
// points (strictly increasing, inside (0,1)) augmented with 0 and 1 where the
// value is clamped to zero, matching homogeneous boundary corrections.
CubicSpline zero_clamped_spline(std::span<const double> interior_knots,
                                std::span<const double> interior_values);

}  // namespace asdsm
