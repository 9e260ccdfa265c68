#pragma once

#include <map>
#include <string>
#include <vector>

#include "segflow/core/model.hpp"
#include "segflow/metric/metric.hpp"

namespace segflow {

using ParamMap = std::map<std::string, double>;

struct RegistryEntry {
  std::string name;
  std::string description;
  // Accepted parameters and their defaults; anything else is rejected.
  ParamMap defaults;
};

std::vector<RegistryEntry> model_entries();
std::vector<RegistryEntry> observable_entries();

// Defaults merged with `params`; ConfigError naming "<where>.<key>" on unknown keys.
ParamMap resolve_params(const RegistryEntry& entry, const ParamMap& params, const std::string& where);

// linear_delay_ou: b(xi) = -a xi(0) + b xi(-r0), sigma = s I.
// tanh_diffusion:  b(xi) = -a xi(0) + b sin(xi(-r0)), sigma = diag(1 + 0.5 tanh(xi_j(0))).
// Both declare lambda1 = 2a - |b|, lambda2 = |b|.
ModelSpec make_model(const std::string& name, const ParamMap& params);
Observable make_observable(const std::string& name, const ParamMap& params);

// Convenience: linear_delay_ou with the given constants.
ModelSpec linear_delay_ou(double a, double b, double s = 1.0, double delay = 0.5, std::size_t dim = 1);

} // namespace segflow
