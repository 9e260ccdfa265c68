#include "segflow/core/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segflow/core/errors.hpp"

namespace segflow {

SegmentShape SegmentShape::make(std::size_t dim, double delay, double step) {
  if (dim == 0) throw ShapeError("segment dimension must be positive");
  if (!(delay > 0.0) || !std::isfinite(delay)) throw ShapeError("delay must be positive and finite");
  if (!(step > 0.0) || !std::isfinite(step)) throw ShapeError("step must be positive and finite");
  const double ratio = delay / step;
  const double m = std::round(ratio);
  // One representable unit of slack on the ratio.
  if (m < 1.0 || std::fabs(ratio - m) > 4.0 * std::numeric_limits<double>::epsilon() * m) {
    throw ShapeError("step " + std::to_string(step) + " does not divide delay " +
                     std::to_string(delay));
  }
  SegmentShape s;
  s.dim = dim;
  s.delay = delay;
  s.step = step;
  s.intervals = static_cast<std::size_t>(m);
  return s;
}

bool SegmentShape::operator==(const SegmentShape& other) const {
  return dim == other.dim && intervals == other.intervals && delay == other.delay &&
         step == other.step;
}

SegmentView::SegmentView(const SegmentShape& shape, std::span<const double> values)
    : shape_(&shape), values_(values) {
  if (values.size() != shape.size()) throw ShapeError("segment view size does not match shape");
}

double SegmentView::at(double theta, std::size_t j) const {
  const auto& s = *shape_;
  if (theta < -s.delay || theta > 0.0) throw RangeError("segment evaluated outside [-r0, 0]");
  const double pos = (theta + s.delay) / s.step;
  const auto k = std::min(static_cast<std::size_t>(pos), s.intervals);
  if (k == s.intervals) return node(k, j);
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * node(k, j) + w * node(k + 1, j);
}

Segment::Segment(SegmentShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeError("segment has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(shape_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ShapeError("segment values must be finite");
  }
}

Segment Segment::constant(const SegmentShape& shape, double value) {
  return Segment(shape, std::vector<double>(shape.size(), value));
}

Segment Segment::from_view(const SegmentView& view) {
  return Segment(view.shape(), std::vector<double>(view.values().begin(), view.values().end()));
}

bool Segment::operator==(const Segment& other) const {
  return shape_ == other.shape_ && values_ == other.values_;
}

double sup_norm(const SegmentView& s) {
  const std::size_t d = s.shape().dim;
  const auto v = s.values();
  double best = 0.0;
  if (d == 1) {
    for (double x : v) best = std::max(best, std::fabs(x));
    return best;
  }
  for (std::size_t k = 0; k < s.shape().nodes(); ++k) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += v[k * d + j] * v[k * d + j];
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

double sup_distance(const SegmentView& x, const SegmentView& y) {
  if (!(x.shape() == y.shape())) throw ShapeError("segments have incompatible shapes");
  const std::size_t d = x.shape().dim;
  const auto a = x.values();
  const auto b = y.values();
  double best = 0.0;
  if (d == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::fabs(a[i] - b[i]));
    return best;
  }
  for (std::size_t k = 0; k < x.shape().nodes(); ++k) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = a[k * d + j] - b[k * d + j];
      sq += diff * diff;
    }
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

} // namespace segflow
