#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segflow/core/segment.hpp"

namespace segflow {

// b: C([-r0,0];R^d) -> R^d, written into out (size d).
using DriftFn = std::function<void(const SegmentView&, std::span<double> out)>;
// sigma: C([-r0,0];R^d) -> R^{d x d}, row-major into out (size d*d).
using DiffusionFn = std::function<void(const SegmentView&, std::span<double> out)>;

// A path-dependent SDE dX = b(X_t) dt + sigma(X_t) dW together with the
// dissipativity constants and ellipticity bounds it declares.
//
// Construction enforces lambda1 > 0, lambda2 >= 0, lambda1 > lambda2 * exp(lambda1 * r0)
// and finite positive sigma bounds; violations throw DomainError. The declared
// values are claims to be checked by check_dissipativity/check_ellipticity.
class ModelSpec {
public:
  struct Params {
    std::string name;
    std::size_t dim = 1;
    double delay = 1.0;
    DriftFn drift;
    DiffusionFn diffusion;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double sigma_bound = 1.0;
    double sigma_inv_bound = 1.0;
    // Set when sigma does not depend on the segment; lets the integrator skip
    // per-step diffusion calls. Must agree with `diffusion`.
    std::optional<std::vector<double>> constant_diffusion;
  };

  explicit ModelSpec(Params params);

  const std::string& name() const { return p_.name; }
  std::size_t dim() const { return p_.dim; }
  double delay() const { return p_.delay; }
  double lambda1() const { return p_.lambda1; }
  double lambda2() const { return p_.lambda2; }
  double sigma_bound() const { return p_.sigma_bound; }
  double sigma_inv_bound() const { return p_.sigma_inv_bound; }
  const std::optional<std::vector<double>>& constant_diffusion() const {
    return p_.constant_diffusion;
  }

  // lambda1 - lambda2 * exp(lambda1 * r0); positive for every constructed model.
  double side_margin() const;

  void drift(const SegmentView& x, std::span<double> out) const { p_.drift(x, out); }
  void diffusion(const SegmentView& x, std::span<double> out) const { p_.diffusion(x, out); }

  SegmentShape shape(double step) const { return SegmentShape::make(p_.dim, p_.delay, step); }

private:
  Params p_;
};

} // namespace segflow
