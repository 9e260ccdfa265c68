#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "segflow/core/model.hpp"
#include "segflow/core/rng.hpp"
#include "segflow/core/segment.hpp"

namespace segflow {

// Sample sources are indexed so that a check is a pure function of its inputs.
using SegmentSampler = std::function<Segment(std::size_t)>;
using PairSampler = std::function<std::pair<Segment, Segment>(std::size_t)>;

// Random piecewise-linear segments: a Gaussian random walk on the grid scaled
// to sup norm ~ `scale`, mixed with constants and spikes so both smooth and
// rough directions get exercised.
SegmentSampler random_segments(const SegmentShape& shape, RngStream rng, double scale);
// Pairs (xi, eta) at mixed distances, from independent draws down to
// perturbations of relative size 1e-3.
PairSampler random_pairs(const SegmentShape& shape, RngStream rng, double scale);

struct DissipativityReport {
  std::size_t n_pairs = 0;
  double max_g = 0.0;
  std::size_t worst_pair = 0;
  double side_margin = 0.0;
  bool pass = false;
};

// max over pairs of 2<x-y, b(xi)-b(eta)> + l1|x-y|^2 - l2 ||xi-eta||^2 with
// x = xi(0), y = eta(0). Passes when max_g is below rounding level
// (1e-9 of the magnitude of the terms) and the side margin is positive.
DissipativityReport check_dissipativity(const ModelSpec& model, const PairSampler& pairs,
                                        std::size_t n_pairs);

struct EllipticityReport {
  std::size_t n = 0;
  double max_sigma_norm = 0.0;
  double max_sigma_inv_norm = 0.0;
  bool pass = false;
};

// Operator norms of sigma(xi) and its inverse over the samples. Throws
// EllipticityViolation naming the sample when sigma(xi) is singular.
EllipticityReport check_ellipticity(const ModelSpec& model, const SegmentSampler& sampler,
                                    std::size_t n);

} // namespace segflow
