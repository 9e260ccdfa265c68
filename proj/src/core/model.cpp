#include "segflow/core/model.hpp"

#include <cmath>
#include <sstream>

#include "segflow/core/errors.hpp"

namespace segflow {

ModelSpec::ModelSpec(Params params) : p_(std::move(params)) {
  if (p_.dim == 0) throw DomainError("model dimension must be positive");
  if (!(p_.delay > 0.0) || !std::isfinite(p_.delay)) throw DomainError("model delay must be positive");
  if (!p_.drift || !p_.diffusion) throw DomainError("model needs both drift and diffusion");
  if (!(p_.lambda1 > 0.0)) {
    std::ostringstream os;
    os << "model '" << p_.name << "': lambda1 = " << p_.lambda1 << " must be positive";
    throw DomainError(os.str());
  }
  if (!(p_.lambda2 >= 0.0)) throw DomainError("model '" + p_.name + "': lambda2 must be non-negative");
  if (!(side_margin() > 0.0)) {
    std::ostringstream os;
    os << "model '" << p_.name << "': dissipativity side condition lambda1 > lambda2*exp(lambda1*r0) "
       << "fails (" << p_.lambda1 << " <= " << p_.lambda2 * std::exp(p_.lambda1 * p_.delay) << ")";
    throw DomainError(os.str());
  }
  const auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!finite_positive(p_.sigma_bound) || !finite_positive(p_.sigma_inv_bound)) {
    throw DomainError("model '" + p_.name + "': sigma bounds must be finite and positive");
  }
  if (p_.constant_diffusion && p_.constant_diffusion->size() != p_.dim * p_.dim) {
    throw DomainError("model '" + p_.name + "': constant diffusion must be d x d");
  }
}

double ModelSpec::side_margin() const {
  return p_.lambda1 - p_.lambda2 * std::exp(p_.lambda1 * p_.delay);
}

} // namespace segflow
