#include "segflow/harness/registry.hpp"

#include <cmath>

#include "segflow/core/errors.hpp"

namespace segflow {

namespace {

const RegistryEntry* find(const std::vector<RegistryEntry>& table, const std::string& name) {
  for (const auto& e : table) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::size_t as_count(double v, const std::string& key) {
  if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(key + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

} // namespace

std::vector<RegistryEntry> model_entries() {
  return {
      {"linear_delay_ou", "b = -a xi(0) + b xi(-r0), sigma = s I",
       {{"a", 2.0}, {"b", 0.1}, {"s", 1.0}, {"delay", 0.5}, {"dim", 1.0}}},
      {"tanh_diffusion", "b = -a xi(0) + b sin(xi(-r0)), sigma = 1 + 0.5 tanh(xi(0))",
       {{"a", 2.0}, {"b", 0.1}, {"delay", 0.5}, {"dim", 1.0}}},
  };
}

std::vector<RegistryEntry> observable_entries() {
  return {
      {"eval0", "xi(0), coordinate `coord`", {{"coord", 0.0}}},
      {"sup_norm_pow", "||xi||^q", {{"q", 2.0}}},
      {"sin_eval0", "sin(xi(0))", {}},
      {"constant", "the constant c", {{"c", 0.0}}},
      {"lincomb", "w_eval0 xi(0) + w_sin sin(xi(0)) + w_sup ||xi||^q",
       {{"w_eval0", 1.0}, {"w_sin", 0.0}, {"w_sup", 0.0}, {"q", 2.0}}},
  };
}

ParamMap resolve_params(const RegistryEntry& entry, const ParamMap& params, const std::string& where) {
  ParamMap out = entry.defaults;
  for (const auto& [k, v] : params) {
    if (!entry.defaults.count(k)) {
      throw ConfigError("unknown parameter '" + where + "." + k + "' for '" + entry.name + "'");
    }
    if (!std::isfinite(v)) throw ConfigError(where + "." + k + " must be finite");
    out[k] = v;
  }
  return out;
}

ModelSpec linear_delay_ou(double a, double b, double s, double delay, std::size_t dim) {
  ModelSpec::Params p;
  p.name = "linear_delay_ou";
  p.dim = dim;
  p.delay = delay;
  p.drift = [a, b, dim](const SegmentView& x, std::span<double> out) {
    for (std::size_t j = 0; j < dim; ++j) out[j] = -a * x.now(j) + b * x.oldest(j);
  };
  std::vector<double> sigma(dim * dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) sigma[j * dim + j] = s;
  p.diffusion = [sigma](const SegmentView&, std::span<double> out) {
    std::copy(sigma.begin(), sigma.end(), out.begin());
  };
  p.constant_diffusion = sigma;
  p.lambda1 = 2.0 * a - std::fabs(b);
  p.lambda2 = std::fabs(b);
  p.sigma_bound = std::fabs(s);
  p.sigma_inv_bound = s != 0.0 ? 1.0 / std::fabs(s) : 0.0;
  return ModelSpec(std::move(p));
}

ModelSpec make_model(const std::string& name, const ParamMap& params) {
  const auto table = model_entries();
  const RegistryEntry* e = find(table, name);
  if (!e) throw ConfigError("unknown model '" + name + "'");
  const ParamMap p = resolve_params(*e, params, "model.params");
  const std::size_t dim = as_count(p.at("dim"), "model.params.dim");
  const double a = p.at("a"), b = p.at("b"), delay = p.at("delay");
  if (name == "linear_delay_ou") return linear_delay_ou(a, b, p.at("s"), delay, dim);

  ModelSpec::Params mp;
  mp.name = name;
  mp.dim = dim;
  mp.delay = delay;
  mp.drift = [a, b, dim](const SegmentView& x, std::span<double> out) {
    for (std::size_t j = 0; j < dim; ++j) out[j] = -a * x.now(j) + b * std::sin(x.oldest(j));
  };
  mp.diffusion = [dim](const SegmentView& x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < dim; ++j) out[j * dim + j] = 1.0 + 0.5 * std::tanh(x.now(j));
  };
  mp.lambda1 = 2.0 * a - std::fabs(b);
  mp.lambda2 = std::fabs(b);
  mp.sigma_bound = 1.5;
  mp.sigma_inv_bound = 2.0;
  return ModelSpec(std::move(mp));
}

Observable make_observable(const std::string& name, const ParamMap& params) {
  const auto table = observable_entries();
  const RegistryEntry* e = find(table, name);
  if (!e) throw ConfigError("unknown observable '" + name + "'");
  const ParamMap p = resolve_params(*e, params, "observable.params");
  if (name == "eval0") {
    const double c = p.at("coord");
    if (!(c >= 0.0) || c != std::floor(c)) throw ConfigError("observable.params.coord must be a non-negative integer");
    return eval0_observable(static_cast<std::size_t>(c));
  }
  if (name == "sup_norm_pow") return sup_norm_pow_observable(p.at("q"));
  if (name == "sin_eval0") return sin_eval0_observable();
  if (name == "constant") return constant_observable(p.at("c"));
  return linear_combination({p.at("w_eval0"), p.at("w_sin"), p.at("w_sup")},
                            {eval0_observable(), sin_eval0_observable(), sup_norm_pow_observable(p.at("q"))});
}

} // namespace segflow
