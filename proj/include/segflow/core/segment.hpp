#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace segflow {

// Grid geometry shared by every segment of a model: dim coordinates sampled at
// times -delay, -delay + step, ..., 0 with delay = intervals * step.
struct SegmentShape {
  std::size_t dim = 1;
  double delay = 1.0;
  double step = 1.0;
  std::size_t intervals = 1;

  // Validates delay/step divisibility and returns the shape; throws ShapeError.
  static SegmentShape make(std::size_t dim, double delay, double step);

  std::size_t nodes() const { return intervals + 1; }
  std::size_t size() const { return nodes() * dim; }
  bool operator==(const SegmentShape& other) const;
};

// Non-owning, read-only window over nodes()*dim row-major values (node-major,
// oldest node first). This is what drift, diffusion and observables consume;
// integrators hand out views directly into their history buffers.
class SegmentView {
public:
  SegmentView(const SegmentShape& shape, std::span<const double> values);

  const SegmentShape& shape() const { return *shape_; }
  std::span<const double> values() const { return values_; }

  // Coordinate j of the node at grid time theta_k = -delay + k * step.
  double node(std::size_t k, std::size_t j = 0) const { return values_[k * shape_->dim + j]; }
  // xi(0) and xi(-r0), the two evaluations most models use.
  double now(std::size_t j = 0) const { return node(shape_->intervals, j); }
  double oldest(std::size_t j = 0) const { return node(0, j); }

  // xi(theta) for theta in [-delay, 0], linear between nodes.
  double at(double theta, std::size_t j = 0) const;

private:
  const SegmentShape* shape_;
  std::span<const double> values_;
};

// An owned element of C([-r0,0]; R^d) discretised on the shape's grid.
class Segment {
public:
  Segment(SegmentShape shape, std::vector<double> values);

  static Segment constant(const SegmentShape& shape, double value);
  // Copies a view; the result no longer aliases integrator storage.
  static Segment from_view(const SegmentView& view);

  const SegmentShape& shape() const { return shape_; }
  std::span<const double> values() const { return values_; }
  SegmentView view() const { return SegmentView(shape_, values_); }
  operator SegmentView() const { return view(); }

  double node(std::size_t k, std::size_t j = 0) const { return values_[k * shape_.dim + j]; }
  double now(std::size_t j = 0) const { return node(shape_.intervals, j); }

  bool operator==(const Segment& other) const;

private:
  SegmentShape shape_;
  std::vector<double> values_;
};

// Grid-level uniform norm: max over nodes of the Euclidean norm of the node.
double sup_norm(const SegmentView& s);
// sup_norm(x - y) without materialising the difference.
double sup_distance(const SegmentView& x, const SegmentView& y);

} // namespace segflow
