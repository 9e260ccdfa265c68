#include "segflow/limit/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"

namespace segflow {

namespace {

// Unit-time skeleton X_0..X_n of one path.
std::vector<Segment> unit_path(const SemigroupEvaluator& sg, const SegmentView& xi, std::size_t n,
                               const RngStream& rng) {
  std::vector<std::optional<Segment>> tmp(n + 1);
  sg.walk(xi, 1.0, n, rng, [&](std::size_t k, const SegmentView& x) { tmp[k].emplace(Segment::from_view(x)); });
  std::vector<Segment> out;
  out.reserve(n + 1);
  for (auto& s : tmp) out.push_back(std::move(*s));
  return out;
}

Estimate series_mean(const std::vector<double>& v, std::size_t batches) {
  if (v.size() >= 2 * batches && batches >= 2) return batch_means(v, batches);
  return mean_estimate(v);
}

} // namespace

Estimate MartingaleIncrements::mean_square(std::size_t batches) const {
  std::vector<double> sq(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    sq[k] = z[k] * z[k] - tail_variance[k + 1] - tail_variance[k];
  }
  return series_mean(sq, batches);
}

MartingaleIncrements martingale_increments(const SemigroupEvaluator& sg,
                                           const CenteredObservable& f, const SegmentView& xi,
                                           std::size_t n, const CorrectorConfig& cfg,
                                           const RngStream& rng) {
  cfg.validate();
  if (n == 0) throw RangeError("martingale_increments needs n >= 1");
  const Observable fc = f.as_observable();
  const auto path = unit_path(sg, xi, n, rng.child(0));
  MartingaleIncrements m;
  m.tail.resize(n + 1);
  m.tail_variance.resize(n + 1);
  m.f_values.resize(n + 1);
  parallel::parallel_for(n + 1, [&](std::size_t k) {
    const CorrectorSample c =
        corrector_sample(sg, fc, path[k], IncrementKind::discrete, cfg, rng.child(1).child(k));
    m.tail[k] = c.value;
    m.tail_variance[k] = c.variance;
    m.f_values[k] = fc(path[k]);
  });
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double zk = m.f_values[k] + m.tail[k] - m.tail[k - 1];
    m.z.push_back(zk);
    s += zk;
    m.partial_sums.push_back(s);
  }
  return m;
}

double telescoped_sum(const MartingaleIncrements& m) {
  double s = 0.0;
  for (std::size_t k = 1; k < m.f_values.size(); ++k) s += m.f_values[k];
  return s + m.tail.back() - m.tail.front();
}

QuadraticVariation quadratic_variation(const SemigroupEvaluator& sg, const CenteredObservable& f,
                                       const SegmentView& xi, std::size_t k, QvKind kind,
                                       const CorrectorConfig& cfg, const RngStream& rng,
                                       std::size_t batches) {
  cfg.validate();
  if (k == 0) throw RangeError("quadratic_variation needs k >= 1");
  const auto path = unit_path(sg, xi, k - 1, rng.child(0));
  const IncrementKind ik = kind == QvKind::continuous ? IncrementKind::continuous : IncrementKind::discrete;
  QuadraticVariation qv;
  qv.kind = kind;
  qv.k = k;
  qv.terms.resize(k);
  parallel::parallel_for(k, [&](std::size_t i) {
    qv.terms[i] = phi_sample(sg, f, path[i], ik, cfg, rng.child(1 + i)).phi.value;
  });
  for (double t : qv.terms) qv.sum += t;
  qv.per_step = series_mean(qv.terms, batches);
  qv.per_step.value = qv.sum / static_cast<double>(k);
  return qv;
}

QvLlnReport qv_lln_check(const SemigroupEvaluator& sg, const CenteredObservable& f,
                         const SegmentView& xi, std::size_t n, const Estimate& d_hat2,
                         std::size_t sum_replicas, const CorrectorConfig& cfg,
                         const RngStream& rng) {
  cfg.validate();
  if (sum_replicas < 2) throw RangeError("qv_lln_check needs at least two replicas");
  QvLlnReport rep;
  rep.n = n;
  rep.d_hat2 = d_hat2;
  const auto m = martingale_increments(sg, f, xi, n, cfg, rng.child(0));
  rep.mean_square = m.mean_square();

  const Observable fc = f.as_observable();
  std::vector<double> ratio(sum_replicas);
  parallel::parallel_for(sum_replicas, [&](std::size_t r) {
    const RngStream s = rng.child(1).child(r);
    double sum = 0.0;
    std::optional<Segment> last;
    sg.walk(xi, 1.0, n, s.child(0), [&](std::size_t k, const SegmentView& x) {
      if (k > 0) sum += fc(x);
      if (k == n) last.emplace(Segment::from_view(x));
    });
    const CorrectorSample cn = corrector_sample(sg, fc, *last, IncrementKind::discrete, cfg, s.child(1));
    const CorrectorSample c0 = corrector_sample(sg, fc, xi, IncrementKind::discrete, cfg, s.child(2));
    const double total = sum + cn.value - c0.value;
    ratio[r] = (total * total - cn.variance - c0.variance) / static_cast<double>(n);
  });
  rep.s_n2_over_n = mean_estimate(ratio);

  const bool flat = std::all_of(m.f_values.begin(), m.f_values.end(), [](double v) { return v == 0.0; });
  if (flat && d_hat2.value == 0.0) {
    rep.zero_signal = true;
    return rep;
  }
  const auto z = [&](const Estimate& e) {
    const double se = std::hypot(e.se, d_hat2.se);
    return se > 0.0 ? (e.value - d_hat2.value) / se : (e.value == d_hat2.value ? 0.0 : INFINITY);
  };
  rep.z_mean_square = z(rep.mean_square);
  rep.z_s_n2 = z(rep.s_n2_over_n);
  rep.pass = std::fabs(rep.z_mean_square) <= 3.0 && std::fabs(rep.z_s_n2) <= 3.0;
  return rep;
}

} // namespace segflow
