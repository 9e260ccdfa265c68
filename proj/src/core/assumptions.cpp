#include "segflow/core/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "segflow/core/errors.hpp"

namespace segflow {

namespace {

std::vector<double> random_walk(const SegmentShape& shape, const RngStream& rng, double scale) {
  const std::size_t n = shape.size();
  const std::size_t d = shape.dim;
  std::vector<double> v(n);
  NormalSource z(rng);
  const double style = rng.uniform(0);
  if (style < 0.15) {
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * z.at(i % d);
    return v;
  }
  double peak = 0.0;
  for (std::size_t j = 0; j < d; ++j) v[j] = z.at(j);
  for (std::size_t k = 1; k < shape.nodes(); ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      v[k * d + j] = v[(k - 1) * d + j] + z.at(k * d + j) / std::sqrt(double(shape.intervals));
    }
  }
  if (style > 0.85) {
    // One sharp spike at a random node.
    const auto k = static_cast<std::size_t>(rng.uniform(1) * double(shape.nodes())) % shape.nodes();
    for (std::size_t j = 0; j < d; ++j) v[k * d + j] += 3.0 * z.at(n + j);
  }
  for (double x : v) peak = std::max(peak, std::fabs(x));
  const double amp = scale * (0.25 + 1.75 * rng.uniform(2));
  if (peak > 0.0) {
    for (double& x : v) x *= amp / peak;
  }
  return v;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

SegmentSampler random_segments(const SegmentShape& shape, RngStream rng, double scale) {
  return [shape, rng, scale](std::size_t i) {
    return Segment(shape, random_walk(shape, rng.child(i), scale));
  };
}

PairSampler random_pairs(const SegmentShape& shape, RngStream rng, double scale) {
  return [shape, rng, scale](std::size_t i) {
    const RngStream s = rng.child(i);
    std::vector<double> a = random_walk(shape, s.child(0), scale);
    std::vector<double> b;
    const double u = s.uniform(0);
    if (u < 0.5) {
      b = random_walk(shape, s.child(1), scale);
    } else {
      const double rel = u < 0.75 ? 1e-1 : 1e-3;
      std::vector<double> dv = random_walk(shape, s.child(1), scale * rel);
      b = a;
      for (std::size_t k = 0; k < b.size(); ++k) b[k] += dv[k];
    }
    return std::make_pair(Segment(shape, std::move(a)), Segment(shape, std::move(b)));
  };
}

DissipativityReport check_dissipativity(const ModelSpec& model, const PairSampler& pairs,
                                        std::size_t n_pairs) {
  if (n_pairs == 0) throw RangeError("check_dissipativity needs at least one pair");
  const std::size_t d = model.dim();
  std::vector<double> bx(d), by(d);
  DissipativityReport rep;
  rep.n_pairs = n_pairs;
  rep.max_g = -std::numeric_limits<double>::infinity();
  rep.side_margin = model.side_margin();
  bool within = true;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto [xi, eta] = pairs(i);
    model.drift(xi, bx);
    model.drift(eta, by);
    double inner = 0.0, dx2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dx = xi.now(j) - eta.now(j);
      inner += dx * (bx[j] - by[j]);
      dx2 += dx * dx;
    }
    const double sup = sup_distance(xi, eta);
    const double t1 = 2.0 * inner;
    const double t2 = model.lambda1() * dx2;
    const double t3 = model.lambda2() * sup * sup;
    const double g = t1 + t2 - t3;
    if (!std::isfinite(g)) {
      throw NumericError("check_dissipativity: non-finite drift at pair " + std::to_string(i));
    }
    const double tol = 1e-9 * (std::fabs(t1) + std::fabs(t2) + std::fabs(t3));
    if (g > tol) within = false;
    if (g > rep.max_g) {
      rep.max_g = g;
      rep.worst_pair = i;
    }
  }
  rep.pass = within && rep.side_margin > 0.0;
  return rep;
}

EllipticityReport check_ellipticity(const ModelSpec& model, const SegmentSampler& sampler,
                                    std::size_t n) {
  if (n == 0) throw RangeError("check_ellipticity needs at least one segment");
  const auto d = static_cast<Eigen::Index>(model.dim());
  std::vector<double> buf(model.dim() * model.dim());
  EllipticityReport rep;
  rep.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment xi = sampler(i);
    model.diffusion(xi, buf);
    if (!all_finite(buf)) {
      throw NumericError("check_ellipticity: non-finite diffusion at segment " + std::to_string(i));
    }
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        sigma(buf.data(), d, d);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(d - 1);
    if (!(smin > 1e-12 * std::max(1.0, smax))) {
      throw EllipticityViolation("sigma is singular at sample segment " + std::to_string(i) +
                                 " (xi(0) = " + std::to_string(xi.now()) + ")");
    }
    rep.max_sigma_norm = std::max(rep.max_sigma_norm, smax);
    rep.max_sigma_inv_norm = std::max(rep.max_sigma_inv_norm, 1.0 / smin);
  }
  const double slack = 1.0 + 1e-12;
  rep.pass = rep.max_sigma_norm <= model.sigma_bound() * slack &&
             rep.max_sigma_inv_norm <= model.sigma_inv_bound() * slack;
  return rep;
}

} // namespace segflow
