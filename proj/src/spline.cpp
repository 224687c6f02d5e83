#include "asdsm/spline.hpp"

#include <algorithm>
#include <cstddef>

namespace asdsm {

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : x_(std::move(knots)), y_(std::move(values)) {
  const std::size_t n = x_.size();
  if (y_.size() != n) throw DimensionMismatch("spline knot/value count mismatch");
  if (n < 2) throw DegenerateError("spline needs at least two knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw DegenerateError("spline knots must be strictly increasing");

  m_.assign(n, 0.0);
  if (n == 2) return;  // natural spline through two points is the chord

  // Tridiagonal system for the interior second derivatives (Thomas algorithm).
  const std::size_t ni = n - 2;
  std::vector<double> diag(ni), upper(ni), rhs(ni);
  for (std::size_t i = 0; i < ni; ++i) {
    const double hl = x_[i + 1] - x_[i];
    const double hr = x_[i + 2] - x_[i + 1];
    diag[i] = (hl + hr) / 3.0;
    upper[i] = hr / 6.0;
    rhs[i] = (y_[i + 2] - y_[i + 1]) / hr - (y_[i + 1] - y_[i]) / hl;
  }
  for (std::size_t i = 1; i < ni; ++i) {
    const double lower = (x_[i + 1] - x_[i]) / 6.0;
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[ni] = rhs[ni - 1] / diag[ni - 1];
  for (std::size_t i = ni - 1; i >= 1; --i) m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
}

double CubicSpline::operator()(double x) const {
  // Segment lookup; points at or beyond the last knot use the last segment.
  const std::size_t n = x_.size();
  if (x == x_.back()) return y_.back();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  if (i == 0) i = 1;
  if (i > n - 1) i = n - 1;
  --i;

  const double h = x_[i + 1] - x_[i];
  const double t = x - x_[i];
  const double c1 = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  const double c2 = m_[i] / 2.0;
  const double c3 = (m_[i + 1] - m_[i]) / (6.0 * h);
  return y_[i] + t * (c1 + t * (c2 + t * c3));
}

CubicSpline zero_clamped_spline(std::span<const double> interior_knots,
                                std::span<const double> interior_values) {
  if (interior_knots.size() != interior_values.size())
    throw DimensionMismatch("zero_clamped_spline: knot/value count mismatch");
  std::vector<double> xs, ys;
  xs.reserve(interior_knots.size() + 2);
  ys.reserve(interior_knots.size() + 2);
  xs.push_back(0.0);
  ys.push_back(0.0);
  for (std::size_t i = 0; i < interior_knots.size(); ++i) {
    if (!(interior_knots[i] > 0.0 && interior_knots[i] < 1.0))
      throw IndexOutOfRange("zero_clamped_spline: knots must lie inside (0,1)");
    xs.push_back(interior_knots[i]);
    ys.push_back(interior_values[i]);
  }
  xs.push_back(1.0);
  ys.push_back(0.0);
  return CubicSpline(std::move(xs), std::move(ys));
}

}  // namespace asdsm
